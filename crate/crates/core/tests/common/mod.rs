//! Brute-force reference computations shared by the integration suites.
//! They recount everything from the raw values and never call into the
//! ranking code they check.

#![allow(dead_code)]

use globenv::CurveSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random curves with standard normal values (distinct with probability one).
pub fn random_curves(rng: &mut ChaCha8Rng, s: usize, d: usize) -> CurveSet {
    let values = (0..s * d).map(|_| rng.sample(StandardNormal)).collect();
    CurveSet::with_unit_grid(values, s).unwrap()
}

/// Random curves on a coarse integer lattice, so ties are common.
pub fn tied_curves(rng: &mut ChaCha8Rng, s: usize, d: usize) -> CurveSet {
    let values = (0..s * d).map(|_| rng.random_range(0..4) as f64).collect();
    CurveSet::with_unit_grid(values, s).unwrap()
}

pub fn all_distinct_per_point(curves: &CurveSet) -> bool {
    (0..curves.num_points()).all(|k| {
        let mut col = curves.column(k);
        col.sort_by(f64::total_cmp);
        col.windows(2).all(|w| w[0] != w[1])
    })
}

/// `R_ik = min(1 + #{T_j < T_i}, 1 + #{T_j > T_i})` by direct counting.
pub fn brute_ranks(curves: &CurveSet) -> Vec<Vec<u32>> {
    let (s, d) = (curves.num_curves(), curves.num_points());
    (0..s)
        .map(|i| {
            (0..d)
                .map(|k| {
                    let v = curves.get(i, k);
                    let below = (0..s).filter(|&j| curves.get(j, k) < v).count() as u32;
                    let above = (0..s).filter(|&j| curves.get(j, k) > v).count() as u32;
                    (below + 1).min(above + 1)
                })
                .collect()
        })
        .collect()
}

pub fn brute_extreme_rank(ranks: &[Vec<u32>]) -> Vec<f64> {
    ranks.iter().map(|r| f64::from(*r.iter().min().unwrap())).collect()
}

/// Fraction of curves whose sorted rank vector is lexicographically <= curve i's.
pub fn brute_erl(ranks: &[Vec<u32>]) -> Vec<f64> {
    let sorted: Vec<Vec<u32>> = ranks
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v.sort();
            v
        })
        .collect();
    let s = ranks.len() as f64;
    sorted
        .iter()
        .map(|a| sorted.iter().filter(|b| *b <= a).count() as f64 / s)
        .collect()
}

/// max { M_i : #{j : M_j < M_i} <= alpha s } over every candidate.
pub fn brute_crit(m: &[f64], alpha: f64) -> f64 {
    let limit = alpha * m.len() as f64;
    m.iter()
        .copied()
        .filter(|&c| {
            let below = m.iter().filter(|&&x| x < c).count() as f64;
            below <= limit + 1e-9 * limit
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// True when the curve leaves `[lower, upper]` somewhere.
pub fn exits(curve: &[f64], lower: &[f64], upper: &[f64]) -> bool {
    curve
        .iter()
        .zip(lower.iter().zip(upper))
        .any(|(v, (lo, up))| v < lo || v > up)
}

/// Prints the one-line verdict for an acceptance criterion and fails the test on a miss.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {id}: {name} -- {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}
