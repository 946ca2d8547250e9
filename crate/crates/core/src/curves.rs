//! The set of discretized functions every measure operates on.

use crate::error::{invalid, Result};

/// `s` curves of length `d` on a common grid, stored row-major.
///
/// Curve `i` at grid point `k` lives at `values[i * d + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    values: Vec<f64>,
    grid: Vec<f64>,
    s: usize,
    d: usize,
}

impl CurveSet {
    /// Validates shape, finiteness and grid monotonicity.
    pub fn new(values: Vec<f64>, grid: Vec<f64>, s: usize) -> Result<Self> {
        let d = grid.len();
        if s < 2 {
            return Err(invalid(format!("need at least 2 curves, got {s}")));
        }
        if d < 1 {
            return Err(invalid("grid must have at least one point"));
        }
        if values.len() != s * d {
            return Err(invalid(format!(
                "expected {s}x{d} = {} values, got {}",
                s * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite value at curve {}, point {}",
                pos / d + 1,
                pos % d + 1
            )));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite grid abscissa"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("grid must be strictly increasing"));
        }
        Ok(Self { values, grid, s, d })
    }

    /// Builds a curve set from per-curve rows.
    pub fn from_rows(rows: &[Vec<f64>], grid: Vec<f64>) -> Result<Self> {
        let d = grid.len();
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(invalid(format!(
                "curve {} has {} values, grid has {d}",
                i + 1,
                rows[i].len()
            )));
        }
        Self::new(rows.concat(), grid, rows.len())
    }

    /// Curves on the regular grid `k / d`, `k = 1..=d`.
    pub fn with_unit_grid(values: Vec<f64>, s: usize) -> Result<Self> {
        if s == 0 || !values.len().is_multiple_of(s) {
            return Err(invalid("value count is not a multiple of the curve count"));
        }
        let d = values.len() / s;
        let grid = (1..=d).map(|k| k as f64 / d as f64).collect();
        Self::new(values, grid, s)
    }

    pub fn num_curves(&self) -> usize {
        self.s
    }

    pub fn num_points(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn curve(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn curves(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.d + k]
    }

    /// Values of all curves at grid point `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.s).map(|i| self.get(i, k)).collect()
    }

    /// Applies `f` to every value, keeping the grid. Used for transform-invariance checks.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|&v| f(v)).collect(),
            self.grid.clone(),
            self.s,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(CurveSet::new(vec![1.0], vec![0.5], 1).is_err());
        assert!(CurveSet::new(vec![1.0, 2.0, 3.0], vec![0.5], 2).is_err());
        assert!(CurveSet::new(vec![], vec![], 2).is_err());
        assert!(CurveSet::new(vec![1.0, f64::NAN], vec![0.5], 2).is_err());
        assert!(CurveSet::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.5, 0.5], 2).is_err());
        assert!(CurveSet::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.7, 0.5], 2).is_err());
    }

    #[test]
    fn row_major_access() {
        let c = CurveSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.5, 1.0]).unwrap();
        assert_eq!(c.curve(1), &[3.0, 4.0]);
        assert_eq!(c.column(0), vec![1.0, 3.0]);
        assert_eq!(c.get(0, 1), 2.0);
    }
}
