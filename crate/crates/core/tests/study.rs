mod common;

use common::*;
use globenv::sim::simulate_extract;
use globenv::study::{detect_first_all, rep_seed};
use globenv::{
    compute_measure, detect_first, run_rep, run_study, CurveSet, GpConfig, MeasureKind,
    OutlierKind, ScenarioGrid,
};

fn small_grid(seed: u64) -> ScenarioGrid {
    ScenarioGrid {
        s_list: vec![20, 40],
        d_list: vec![20, 100],
        scale_list: vec![0.0, 1.0],
        outliers: vec![OutlierKind::None, OutlierKind::Maximum],
        reps: 6,
        ..ScenarioGrid::paper(seed)
    }
}

#[test]
fn dominant_outlier_is_detected_by_every_measure() {
    let mut rng = rng(1);
    let base = random_curves(&mut rng, 20, 20);
    let shifted: Vec<f64> = base
        .values()
        .iter()
        .enumerate()
        .map(|(n, &v)| if n < 20 { v + 100.0 } else { v })
        .collect();
    let curves = CurveSet::new(shifted, base.grid().to_vec(), 20).unwrap();
    for kind in [MeasureKind::Erl, MeasureKind::Cont, MeasureKind::Area, MeasureKind::Qdir] {
        assert!(detect_first(&curves, kind, 0.05).unwrap(), "{kind}");
    }
    // Extreme rank ties the shifted curve with the pointwise minima.
    assert!(!detect_first(&curves, MeasureKind::Rank, 0.05).unwrap());
}

#[test]
fn rank_never_detects_when_alpha_s_below_one() {
    let mut rng = rng(2);
    for _ in 0..50 {
        let curves = random_curves(&mut rng, 15, 10);
        assert!(!detect_first(&curves, MeasureKind::Rank, 0.05).unwrap());
    }
}

#[test]
fn detection_at_alpha_s_one_means_unique_most_extreme() {
    let mut rng = rng(3);
    for _ in 0..300 {
        let curves = random_curves(&mut rng, 20, 5);
        for kind in [MeasureKind::Erl, MeasureKind::Cont, MeasureKind::Area, MeasureKind::Qdir] {
            let m = compute_measure(&curves, kind, 0.025).unwrap().0.m;
            let unique_min = (1..20).all(|j| m[0] < m[j]);
            assert_eq!(detect_first(&curves, kind, 0.05).unwrap(), unique_min, "{kind}");
        }
    }
}

#[test]
fn study_is_deterministic_and_thread_independent() {
    let grid = small_grid(11);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| run_study(&grid).unwrap());
    let b = three.install(|| run_study(&grid).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), grid.cardinality());
    for r in &a.rows {
        assert!(r.detections <= r.reps);
        assert!(r.ci_lo <= r.power && r.power <= r.ci_hi);
    }
    let c = run_study(&ScenarioGrid { master_seed: 12, ..grid }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn cells_of_a_rep_share_nested_curves() {
    let grid = small_grid(5);
    let seed = rep_seed(grid.master_seed, 1.0, OutlierKind::Maximum, 2);
    let config = GpConfig::new(1.0, seed);
    let big = simulate_extract(&config, OutlierKind::Maximum, 40, 100).unwrap();
    let small = simulate_extract(&config, OutlierKind::Maximum, 20, 100).unwrap();
    assert_eq!(small.values(), &big.values()[..20 * 100]);

    let bits = run_rep(&grid, 1.0, OutlierKind::Maximum, 2).unwrap();
    for (si, &s) in grid.s_list.iter().enumerate() {
        for (di, &d) in grid.d_list.iter().enumerate() {
            let curves = simulate_extract(&config, OutlierKind::Maximum, s, d).unwrap();
            let hits = detect_first_all(&curves, &grid.measures, grid.alpha, grid.beta).unwrap();
            for (mi, hit) in hits.into_iter().enumerate() {
                assert_eq!(bits[grid.cell_index(si, di, mi)], hit);
            }
        }
    }
}

#[test]
fn rep_bitmaps_repeat_for_equal_seeds() {
    let grid = small_grid(8);
    for rep in 1..=grid.reps {
        assert_eq!(
            run_rep(&grid, 0.0, OutlierKind::None, rep).unwrap(),
            run_rep(&grid.clone(), 0.0, OutlierKind::None, rep).unwrap()
        );
    }
}

#[test]
fn cell_seed_does_not_depend_on_grid_position() {
    let full = small_grid(4);
    let alone = ScenarioGrid {
        scale_list: vec![1.0],
        outliers: vec![OutlierKind::Maximum],
        ..full.clone()
    };
    let a = run_study(&full).unwrap();
    let b = run_study(&alone).unwrap();
    for r in &b.rows {
        assert_eq!(a.get(r.measure, r.s, r.d, r.scale, r.outlier), Some(r));
    }
}
