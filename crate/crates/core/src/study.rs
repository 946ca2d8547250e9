//! Factorial Monte Carlo power study over number of curves, resolution,
//! correlation scale, outlier type and measure.
//!
//! Each replication draws one pool of `max(s_list)` base-resolution curves
//! per (scale, outlier) pair and evaluates every (s, d) cell on nested
//! prefixes/subsamples of it. Seeds are derived from the master seed and the
//! cell coordinates, so the table is identical for any thread count.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::CurveSet;
use crate::envelope::critical_value;
use crate::error::{invalid, Error, Result};
use crate::measures::{compute_measure, compute_measures, MeasureKind, DEFAULT_QDIR_BETA};
use crate::sim::{
    extract, inject_outlier, simulate_extract, simulate_gp, GpConfig, OutlierKind,
    BASE_RESOLUTION,
};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MEMORY_BUDGET: usize = 512 * 1024 * 1024;

/// How curve sets are shared between (s, d) cells within a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolMode {
    /// One pool per replication; cells are nested prefixes and subsamples.
    #[default]
    Shared,
    /// Every (s, d) cell draws its own pool.
    IndependentCells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGrid {
    pub s_list: Vec<usize>,
    pub d_list: Vec<usize>,
    pub scale_list: Vec<f64>,
    pub outliers: Vec<OutlierKind>,
    pub measures: Vec<MeasureKind>,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub beta: f64,
    pub pool_mode: PoolMode,
    /// Largest shared pool, in bytes, before falling back to per-cell regeneration.
    pub memory_budget: usize,
}

impl ScenarioGrid {
    /// Full published design: 10 sample sizes, 4 resolutions, 3 scales, 1000 reps.
    pub fn paper(master_seed: u64) -> Self {
        Self {
            s_list: vec![20, 40, 80, 160, 320, 640, 1280, 2560, 5120, 10240],
            d_list: vec![20, 100, 500, 2500],
            scale_list: vec![0.0, 0.1, 1.0],
            outliers: OutlierKind::ALL.to_vec(),
            measures: MeasureKind::ALL.to_vec(),
            alpha: DEFAULT_ALPHA,
            reps: 1000,
            master_seed,
            beta: DEFAULT_QDIR_BETA,
            pool_mode: PoolMode::Shared,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    /// Reduced design that finishes in minutes on a workstation.
    pub fn desk(master_seed: u64) -> Self {
        Self {
            s_list: vec![20, 40, 80, 160, 320, 640],
            d_list: vec![20, 100, 500],
            reps: 500,
            ..Self::paper(master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("s_list", self.s_list.is_empty()),
            ("d_list", self.d_list.is_empty()),
            ("scale_list", self.scale_list.is_empty()),
            ("outliers", self.outliers.is_empty()),
            ("measures", self.measures.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(invalid(format!("{name} must not be empty")));
        }
        if self.reps < 1 {
            return Err(invalid("reps must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let Some(d) = self.d_list.iter().find(|&&d| d == 0 || !BASE_RESOLUTION.is_multiple_of(d)) {
            return Err(invalid(format!("resolution {d} does not divide {BASE_RESOLUTION}")));
        }
        let min_s = self.measures.iter().map(|m| m.min_curves()).max().unwrap_or(2);
        if let Some(s) = self.s_list.iter().find(|&&s| s < min_s) {
            return Err(invalid(format!("s = {s} is below the minimum of {min_s} for the chosen measures")));
        }
        if let Some(x) = self.scale_list.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(invalid(format!("scale must be finite and >= 0, got {x}")));
        }
        Ok(())
    }

    pub fn s_max(&self) -> usize {
        self.s_list.iter().copied().max().unwrap_or(0)
    }

    /// Number of (s, d, measure) detections produced by one replication.
    pub fn cells_per_rep(&self) -> usize {
        self.s_list.len() * self.d_list.len() * self.measures.len()
    }

    /// Position of (s index, d index, measure index) in a replication bitmap.
    pub fn cell_index(&self, si: usize, di: usize, mi: usize) -> usize {
        (si * self.d_list.len() + di) * self.measures.len() + mi
    }

    /// Rows in the resulting power table.
    pub fn cardinality(&self) -> usize {
        self.cells_per_rep() * self.scale_list.len() * self.outliers.len()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix64(h ^ splitmix64(v))
}

/// Seed of the pool for one replication of one (scale, outlier) pair.
///
/// Depends on the scale value and the outlier kind rather than their list
/// positions, so a cell reproduces whether run alone or inside a larger grid.
pub fn rep_seed(master_seed: u64, scale: f64, outlier: OutlierKind, rep_index: usize) -> u64 {
    let h = mix(splitmix64(master_seed), scale.to_bits());
    let h = mix(h, outlier.code());
    mix(h, rep_index as u64)
}

/// Seed of an independent per-cell pool.
pub fn cell_seed(rep_seed: u64, s: usize, d: usize) -> u64 {
    mix(mix(rep_seed, s as u64), d as u64)
}

/// Whether curve 1 is among the `alpha s` most extreme curves.
pub fn detect_first(curves: &CurveSet, kind: MeasureKind, alpha: f64) -> Result<bool> {
    let (m, _) = compute_measure(curves, kind, DEFAULT_QDIR_BETA)?;
    Ok(m.m[0] < critical_value(&m, alpha)?)
}

/// Detections of curve 1 for each measure in `kinds`, sharing rank computations.
pub fn detect_first_all(
    curves: &CurveSet,
    kinds: &[MeasureKind],
    alpha: f64,
    beta: f64,
) -> Result<Vec<bool>> {
    compute_measures(curves, kinds, beta)?
        .into_iter()
        .map(|(m, _)| Ok(m.m[0] < critical_value(&m, alpha)?))
        .collect()
}

/// Detection bitmap of one replication, indexed by [`ScenarioGrid::cell_index`].
pub fn run_rep(
    grid: &ScenarioGrid,
    scale: f64,
    outlier: OutlierKind,
    rep_index: usize,
) -> Result<Vec<bool>> {
    if rep_index < 1 || rep_index > grid.reps {
        return Err(invalid(format!("rep index {rep_index} outside 1..={}", grid.reps)));
    }
    let seed = rep_seed(grid.master_seed, scale, outlier, rep_index);
    let mut out = vec![false; grid.cells_per_rep()];

    let mut record = |si: usize, di: usize, curves: &CurveSet| -> Result<()> {
        let hits = detect_first_all(curves, &grid.measures, grid.alpha, grid.beta)?;
        for (mi, hit) in hits.into_iter().enumerate() {
            out[grid.cell_index(si, di, mi)] = hit;
        }
        Ok(())
    };

    match grid.pool_mode {
        PoolMode::IndependentCells => {
            for (si, &s) in grid.s_list.iter().enumerate() {
                for (di, &d) in grid.d_list.iter().enumerate() {
                    let config = GpConfig::new(scale, cell_seed(seed, s, d));
                    record(si, di, &simulate_extract(&config, outlier, s, d)?)?;
                }
            }
        }
        PoolMode::Shared => {
            let config = GpConfig::new(scale, seed);
            match shared_pool(&config, grid.s_max(), outlier, grid.memory_budget) {
                Ok(pool) => {
                    for (si, &s) in grid.s_list.iter().enumerate() {
                        for (di, &d) in grid.d_list.iter().enumerate() {
                            record(si, di, &extract(&pool, s, d)?)?;
                        }
                    }
                }
                Err(Error::Resource { .. }) => {
                    // Rows come from per-row streams, so regenerating per cell
                    // yields the same curves as the pool would have held.
                    for (si, &s) in grid.s_list.iter().enumerate() {
                        for (di, &d) in grid.d_list.iter().enumerate() {
                            record(si, di, &simulate_extract(&config, outlier, s, d)?)?;
                        }
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn shared_pool(
    config: &GpConfig,
    n: usize,
    outlier: OutlierKind,
    budget: usize,
) -> Result<crate::sim::CurvePool> {
    let needed = n
        .saturating_mul(config.base_resolution)
        .saturating_mul(std::mem::size_of::<f64>());
    if needed > budget {
        return Err(Error::Resource { needed, budget });
    }
    Ok(inject_outlier(simulate_gp(config, n)?, outlier))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub measure: MeasureKind,
    pub s: usize,
    pub d: usize,
    pub scale: f64,
    pub outlier: OutlierKind,
    pub alpha: f64,
    pub reps: usize,
    pub detections: usize,
    pub power: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTable {
    pub rows: Vec<PowerEstimate>,
}

impl PowerTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(
        &self,
        measure: MeasureKind,
        s: usize,
        d: usize,
        scale: f64,
        outlier: OutlierKind,
    ) -> Option<&PowerEstimate> {
        self.rows.iter().find(|r| {
            r.measure == measure && r.s == s && r.d == d && r.scale == scale && r.outlier == outlier
        })
    }

    pub fn power(
        &self,
        measure: MeasureKind,
        s: usize,
        d: usize,
        scale: f64,
        outlier: OutlierKind,
    ) -> Option<f64> {
        self.get(measure, s, d, scale, outlier).map(|r| r.power)
    }
}

/// Wilson score interval at 95%.
pub fn wilson_ci(detections: usize, reps: usize) -> (f64, f64) {
    wilson_ci_z(detections, reps, Z_95)
}

/// Wilson score interval for normal quantile `z`.
pub fn wilson_ci_z(detections: usize, reps: usize, z: f64) -> (f64, f64) {
    assert!(reps >= 1 && detections <= reps, "need 0 <= detections <= reps, reps >= 1");
    let n = reps as f64;
    let p = detections as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if detections == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if detections == reps { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

pub fn run_study(grid: &ScenarioGrid) -> Result<PowerTable> {
    run_study_with_progress(grid, |_, _| {})
}

/// Runs every replication of every (scale, outlier) pair on the current
/// rayon pool. `progress(done, total)` is called after each replication.
pub fn run_study_with_progress(
    grid: &ScenarioGrid,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<PowerTable> {
    grid.validate()?;
    let pairs: Vec<(OutlierKind, f64)> = grid
        .outliers
        .iter()
        .flat_map(|&o| grid.scale_list.iter().map(move |&x| (o, x)))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (1..=grid.reps).map(move |r| (p, r)))
        .collect();
    let total = tasks.len();
    let done = AtomicUsize::new(0);

    let bitmaps: Vec<Vec<bool>> = tasks
        .par_iter()
        .map(|&(p, rep)| {
            let (outlier, scale) = pairs[p];
            let bits = run_rep(grid, scale, outlier, rep)?;
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            Ok(bits)
        })
        .collect::<Result<_>>()?;

    let cells = grid.cells_per_rep();
    let mut rows = Vec::with_capacity(grid.cardinality());
    for (p, &(outlier, scale)) in pairs.iter().enumerate() {
        let mut counts = vec![0usize; cells];
        for bits in &bitmaps[p * grid.reps..(p + 1) * grid.reps] {
            for (c, &hit) in counts.iter_mut().zip(bits) {
                *c += usize::from(hit);
            }
        }
        for (di, &d) in grid.d_list.iter().enumerate() {
            for (si, &s) in grid.s_list.iter().enumerate() {
                for (mi, &measure) in grid.measures.iter().enumerate() {
                    let detections = counts[grid.cell_index(si, di, mi)];
                    let (ci_lo, ci_hi) = wilson_ci(detections, grid.reps);
                    rows.push(PowerEstimate {
                        measure,
                        s,
                        d,
                        scale,
                        outlier,
                        alpha: grid.alpha,
                        reps: grid.reps,
                        detections,
                        power: detections as f64 / grid.reps as f64,
                        ci_lo,
                        ci_hi,
                        master_seed: grid.master_seed,
                    });
                }
            }
        }
    }
    Ok(PowerTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Solves |p_hat - p| <= z sqrt(p (1 - p) / n) for its endpoints by bisection.
    fn wilson_oracle(x: usize, n: usize) -> (f64, f64) {
        let p_hat = x as f64 / n as f64;
        let inside = |p: f64| (p_hat - p).abs() <= Z_95 * (p * (1.0 - p) / n as f64).sqrt();
        let bisect = |mut out: f64, mut inn: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (out + inn);
                if inside(mid) {
                    inn = mid;
                } else {
                    out = mid;
                }
            }
            inn
        };
        let lo = if x == 0 { 0.0 } else { bisect(0.0, p_hat) };
        let hi = if x == n { 1.0 } else { bisect(1.0, p_hat) };
        (lo, hi)
    }

    #[test]
    fn wilson_matches_oracle() {
        for &(x, n) in &[(50, 100), (0, 20), (20, 20), (3, 500), (499, 500), (1, 1)] {
            let (lo, hi) = wilson_ci(x, n);
            let (olo, ohi) = wilson_oracle(x, n);
            assert!((lo - olo).abs() < 1e-9, "{x}/{n}: {lo} vs {olo}");
            assert!((hi - ohi).abs() < 1e-9, "{x}/{n}: {hi} vs {ohi}");
        }
        let (lo, hi) = wilson_ci(50, 100);
        assert!((lo - 0.404).abs() < 5e-4 && (hi - 0.596).abs() < 5e-4);
        assert_eq!(wilson_ci(0, 37).0, 0.0);
        assert_eq!(wilson_ci(37, 37).1, 1.0);
    }

    #[test]
    fn seeds_differ_per_coordinate() {
        let base = rep_seed(1, 0.1, OutlierKind::Integral, 1);
        assert_ne!(base, rep_seed(2, 0.1, OutlierKind::Integral, 1));
        assert_ne!(base, rep_seed(1, 1.0, OutlierKind::Integral, 1));
        assert_ne!(base, rep_seed(1, 0.1, OutlierKind::Maximum, 1));
        assert_ne!(base, rep_seed(1, 0.1, OutlierKind::Integral, 2));
        assert_eq!(base, rep_seed(1, 0.1, OutlierKind::Integral, 1));
    }

    fn tiny_grid() -> ScenarioGrid {
        ScenarioGrid {
            s_list: vec![20, 40],
            d_list: vec![20, 100],
            scale_list: vec![0.1],
            outliers: vec![OutlierKind::Integral],
            reps: 3,
            ..ScenarioGrid::paper(99)
        }
    }

    #[test]
    fn memory_fallback_is_bit_identical() {
        let grid = tiny_grid();
        let tight = ScenarioGrid { memory_budget: 1024, ..grid.clone() };
        for rep in 1..=3 {
            assert_eq!(
                run_rep(&grid, 0.1, OutlierKind::Integral, rep).unwrap(),
                run_rep(&tight, 0.1, OutlierKind::Integral, rep).unwrap()
            );
        }
    }

    #[test]
    fn independent_cells_run() {
        let grid = ScenarioGrid { pool_mode: PoolMode::IndependentCells, ..tiny_grid() };
        let table = run_study(&grid).unwrap();
        assert_eq!(table.len(), grid.cardinality());
    }

    #[test]
    fn rep_index_checked() {
        let grid = tiny_grid();
        assert!(run_rep(&grid, 0.1, OutlierKind::Integral, 0).is_err());
        assert!(run_rep(&grid, 0.1, OutlierKind::Integral, 4).is_err());
    }

    #[test]
    fn grid_validation() {
        let mut g = tiny_grid();
        g.d_list = vec![30];
        assert!(g.validate().is_err());
        let mut g = tiny_grid();
        g.s_list = vec![2];
        assert!(g.validate().is_err());
        g.measures = vec![MeasureKind::Rank];
        assert!(g.validate().is_ok());
        let mut g = tiny_grid();
        g.reps = 0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn single_rep_power_is_binary() {
        let grid = ScenarioGrid { reps: 1, s_list: vec![20], d_list: vec![20], ..tiny_grid() };
        let table = run_study(&grid).unwrap();
        assert!(table.rows.iter().all(|r| r.power == 0.0 || r.power == 1.0));
    }

    #[test]
    fn default_grid_cardinality() {
        let g = ScenarioGrid::paper(0);
        assert_eq!(g.cardinality(), 5 * 10 * 4 * 3 * 3);
        g.validate().unwrap();
        ScenarioGrid::desk(0).validate().unwrap();
    }
}
