//! Discretized Gaussian processes with exponential correlation on `[0, 1]`
//! and the two contamination functions added to the first curve.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::CurveSet;
use crate::error::{invalid, Error, Result};

/// Number of grid points every realization is generated at.
pub const BASE_RESOLUTION: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpConfig {
    /// Correlation scale `phi`; correlation is `exp(-|x - x'| / phi)`, 0 means i.i.d.
    pub scale: f64,
    pub base_resolution: usize,
    pub seed: u64,
}

impl GpConfig {
    pub fn new(scale: f64, seed: u64) -> Self {
        Self { scale, base_resolution: BASE_RESOLUTION, seed }
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(invalid(format!("scale must be finite and >= 0, got {}", self.scale)));
        }
        if self.base_resolution < 2 {
            return Err(invalid("base resolution must be at least 2"));
        }
        Ok(())
    }

    /// Lag-one correlation between neighbouring base grid points.
    pub fn lag_one_correlation(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            (-(1.0 / self.base_resolution as f64) / self.scale).exp()
        }
    }

    /// Abscissa of zero-based base grid index `k`: `(k + 1) / D`.
    #[inline]
    pub fn abscissa(&self, k: usize) -> f64 {
        (k + 1) as f64 / self.base_resolution as f64
    }

    /// Independent random stream for one row.
    fn row_rng(&self, row: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(row as u64);
        rng
    }

    /// Fills `out` with row `row` at full base resolution.
    fn fill_row(&self, row: usize, out: &mut [f64]) {
        let rho = self.lag_one_correlation();
        let innovation = (1.0 - rho * rho).sqrt();
        let mut rng = self.row_rng(row);
        let mut x: f64 = rng.sample(StandardNormal);
        out[0] = x;
        for slot in &mut out[1..] {
            let z: f64 = rng.sample(StandardNormal);
            x = rho * x + innovation * z;
            *slot = x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierKind {
    None,
    /// `5x(1 - x)` over the whole domain.
    Integral,
    /// `100x(1 - 10x)` on `[0, 0.1]`, zero elsewhere.
    Maximum,
}

impl OutlierKind {
    pub const ALL: [OutlierKind; 3] = [OutlierKind::None, OutlierKind::Integral, OutlierKind::Maximum];

    pub fn as_str(self) -> &'static str {
        match self {
            OutlierKind::None => "none",
            OutlierKind::Integral => "integral",
            OutlierKind::Maximum => "maximum",
        }
    }

    /// Stable numeric id used in seed derivation.
    pub fn code(self) -> u64 {
        match self {
            OutlierKind::None => 0,
            OutlierKind::Integral => 1,
            OutlierKind::Maximum => 2,
        }
    }
}

impl fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutlierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OutlierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| invalid(format!("unknown outlier '{s}' (expected none, integral or maximum)")))
    }
}

pub fn outlier_value(kind: OutlierKind, x: f64) -> f64 {
    match kind {
        OutlierKind::None => 0.0,
        OutlierKind::Integral => 5.0 * x * (1.0 - x),
        OutlierKind::Maximum if x <= 0.1 => 100.0 * x * (1.0 - 10.0 * x),
        OutlierKind::Maximum => 0.0,
    }
}

/// Realizations at the base resolution, row-major `n x D`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePool {
    values: Vec<f64>,
    n: usize,
    config: GpConfig,
}

impl CurvePool {
    pub fn num_rows(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.config.base_resolution
    }

    pub fn config(&self) -> &GpConfig {
        &self.config
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.resolution();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.resolution()).map(|k| self.config.abscissa(k)).collect()
    }
}

/// Draws `n` independent rows with the autoregressive recursion
/// `X_1 ~ N(0,1)`, `X_{k+1} = rho X_k + sqrt(1 - rho^2) Z_k`, `rho = exp(-1/(D phi))`.
///
/// Rows come from per-row streams, so the result does not depend on the
/// rayon thread count.
pub fn simulate_gp(config: &GpConfig, n: usize) -> Result<CurvePool> {
    config.validate()?;
    if n < 1 {
        return Err(invalid("need at least one realization"));
    }
    let d = config.base_resolution;
    let mut values = vec![0.0; n * d];
    values
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(row, out)| config.fill_row(row, out));
    Ok(CurvePool { values, n, config: *config })
}

/// Adds the contamination function to row 1.
pub fn inject_outlier(mut pool: CurvePool, kind: OutlierKind) -> CurvePool {
    if kind != OutlierKind::None {
        let config = pool.config;
        for (k, v) in pool.values[..config.base_resolution].iter_mut().enumerate() {
            *v += outlier_value(kind, config.abscissa(k));
        }
    }
    pool
}

fn subsample_step(base: usize, d: usize) -> Result<usize> {
    if d == 0 || !base.is_multiple_of(d) {
        return Err(invalid(format!("resolution {d} does not divide {base}")));
    }
    Ok(base / d)
}

/// First `s` rows at grid indices `step, 2 step, ..., D` with `step = D / d`.
pub fn extract(pool: &CurvePool, s: usize, d: usize) -> Result<CurveSet> {
    let base = pool.resolution();
    let step = subsample_step(base, d)?;
    if s > pool.num_rows() {
        return Err(invalid(format!("requested {s} curves from a pool of {}", pool.num_rows())));
    }
    let mut values = Vec::with_capacity(s * d);
    for i in 0..s {
        values.extend(pool.row(i).iter().skip(step - 1).step_by(step));
    }
    let grid = (0..d).map(|j| pool.config.abscissa((j + 1) * step - 1)).collect();
    CurveSet::new(values, grid, s)
}

/// Same curves as `extract(inject_outlier(simulate_gp(config, s), outlier), s, d)`
/// without materializing the base-resolution pool.
pub fn simulate_extract(
    config: &GpConfig,
    outlier: OutlierKind,
    s: usize,
    d: usize,
) -> Result<CurveSet> {
    config.validate()?;
    let base = config.base_resolution;
    let step = subsample_step(base, d)?;
    let mut values = vec![0.0; s * d];
    values.par_chunks_mut(d).enumerate().for_each_init(
        || vec![0.0; base],
        |row_buf, (row, out)| {
            config.fill_row(row, row_buf);
            if row == 0 {
                for (k, v) in row_buf.iter_mut().enumerate() {
                    *v += outlier_value(outlier, config.abscissa(k));
                }
            }
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = row_buf[(j + 1) * step - 1];
            }
        },
    );
    let grid = (0..d).map(|j| config.abscissa((j + 1) * step - 1)).collect();
    CurveSet::new(values, grid, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn outlier_values() {
        assert_abs_diff_eq!(outlier_value(OutlierKind::Integral, 0.5), 1.25);
        assert_abs_diff_eq!(outlier_value(OutlierKind::Maximum, 0.05), 2.5);
        assert_eq!(outlier_value(OutlierKind::Maximum, 0.2), 0.0);
        assert_eq!(outlier_value(OutlierKind::Integral, 0.0), 0.0);
        assert_eq!(outlier_value(OutlierKind::Integral, 1.0), 0.0);
        assert_eq!(outlier_value(OutlierKind::None, 0.3), 0.0);
    }

    #[test]
    fn rho_for_scale_one() {
        let c = GpConfig::new(1.0, 0);
        assert_abs_diff_eq!(c.lag_one_correlation(), (-0.0004f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.lag_one_correlation(), 0.99960, epsilon = 1e-5);
        assert_eq!(GpConfig::new(0.0, 0).lag_one_correlation(), 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(simulate_gp(&GpConfig::new(-1.0, 0), 3).is_err());
        assert!(simulate_gp(&GpConfig::new(0.1, 0), 0).is_err());
    }

    #[test]
    fn injection_touches_only_row_one() {
        let pool = simulate_gp(&GpConfig::new(0.1, 7), 4).unwrap();
        let same = inject_outlier(pool.clone(), OutlierKind::None);
        assert_eq!(same, pool);
        let hit = inject_outlier(pool.clone(), OutlierKind::Integral);
        for k in 0..pool.resolution() {
            let x = pool.config().abscissa(k);
            assert_eq!(hit.row(0)[k], pool.row(0)[k] + 5.0 * x * (1.0 - x));
        }
        for i in 1..4 {
            assert_eq!(hit.row(i), pool.row(i));
        }
    }

    #[test]
    fn extraction_grid_and_nesting() {
        let pool = simulate_gp(&GpConfig::new(1.0, 3), 40).unwrap();
        let full = extract(&pool, 40, 2500).unwrap();
        assert_eq!(full.values(), pool.values());
        let coarse = extract(&pool, 40, 20).unwrap();
        let expected: Vec<f64> = (1..=20).map(|j| j as f64 * 0.05).collect();
        for (a, b) in coarse.grid().iter().zip(&expected) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        assert_eq!(coarse.get(3, 0), pool.row(3)[124]);
        let small = extract(&pool, 20, 20).unwrap();
        assert_eq!(small.values(), &coarse.values()[..20 * 20]);
        assert!(extract(&pool, 20, 30).is_err());
        assert!(extract(&pool, 41, 20).is_err());
    }

    #[test]
    fn streamed_extraction_matches_pool() {
        let config = GpConfig::new(0.1, 11);
        for outlier in OutlierKind::ALL {
            let pool = inject_outlier(simulate_gp(&config, 12).unwrap(), outlier);
            let a = extract(&pool, 12, 100).unwrap();
            let b = simulate_extract(&config, outlier, 12, 100).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rows_are_prefix_stable() {
        let config = GpConfig::new(0.1, 5);
        let big = simulate_gp(&config, 10).unwrap();
        let small = simulate_gp(&config, 3).unwrap();
        assert_eq!(small.values(), &big.values()[..3 * 2500]);
    }
}
