//! Two-sided pointwise ranks, integer and continuous.

use crate::curves::CurveSet;
use crate::error::{invalid, Result};

/// Relative width below which a spacing in a column counts as degenerate.
pub const SPACING_EPS: f64 = 1e-12;

/// Integer two-sided pointwise ranks `R_ik`, row-major `s x d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    r: Vec<u32>,
    s: usize,
    d: usize,
}

impl RankMatrix {
    /// Wraps precomputed ranks; every entry must be at least 1.
    pub fn from_raw(r: Vec<u32>, s: usize, d: usize) -> Result<Self> {
        if s == 0 || d == 0 || r.len() != s * d {
            return Err(invalid("rank matrix shape mismatch"));
        }
        if r.contains(&0) {
            return Err(invalid("ranks start at 1"));
        }
        Ok(Self { r, s, d })
    }

    pub fn num_curves(&self) -> usize {
        self.s
    }

    pub fn num_points(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.r[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.r.chunks_exact(self.d)
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> u32 {
        self.r[i * self.d + k]
    }
}

/// Continuous two-sided pointwise ranks `c_ik`, row-major `s x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContRankMatrix {
    c: Vec<f64>,
    s: usize,
    d: usize,
}

impl ContRankMatrix {
    pub fn from_raw(c: Vec<f64>, s: usize, d: usize) -> Result<Self> {
        if s == 0 || d == 0 || c.len() != s * d {
            return Err(invalid("continuous rank matrix shape mismatch"));
        }
        if c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("continuous ranks must be positive and finite"));
        }
        Ok(Self { c, s, d })
    }

    pub fn num_curves(&self) -> usize {
        self.s
    }

    pub fn num_points(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.c[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.c.chunks_exact(self.d)
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.c[i * self.d + k]
    }
}

/// Indices of `col` sorted by value.
fn argsort(col: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..col.len()).collect();
    idx.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
    idx
}

/// Two-sided competition ranks of one column: `min(1 + #{<}, 1 + #{>})`.
pub(crate) fn two_sided_column(col: &[f64]) -> Vec<u32> {
    let s = col.len();
    let order = argsort(col);
    let mut out = vec![0u32; s];
    let mut start = 0;
    while start < s {
        let v = col[order[start]];
        let mut end = start + 1;
        while end < s && col[order[end]] == v {
            end += 1;
        }
        let below = start as u32 + 1;
        let above = (s - end) as u32 + 1;
        let rank = below.min(above);
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Interpolated rank from below for every entry of `col`.
///
/// Sorted values `y_1 <= ... <= y_s`; an entry whose tie group starts at
/// position `j` gets `exp(-(y_2 - y_1) / (y_s - y_2))` for `j = 1`,
/// `(j - 1) + (y_j - y_{j-1}) / (y_{j+1} - y_{j-1})` for interior `j`, and
/// `s` for `j = s`. Degenerate spacings fall back to the midpoint of the
/// admissible interval.
fn lower_continuous_column(col: &[f64]) -> Vec<f64> {
    let s = col.len();
    debug_assert!(s >= 3);
    let order = argsort(col);
    let y: Vec<f64> = order.iter().map(|&i| col[i]).collect();
    let eps = SPACING_EPS * (y[s - 1] - y[0]);
    let mut out = vec![0.0; s];
    let mut start = 0;
    while start < s {
        let v = y[start];
        let mut end = start + 1;
        while end < s && y[end] == v {
            end += 1;
        }
        let value = if start == 0 {
            let denom = y[s - 1] - y[1];
            if denom <= eps {
                0.5
            } else {
                (-(y[1] - y[0]) / denom).exp().max(f64::MIN_POSITIVE)
            }
        } else if start == s - 1 {
            s as f64
        } else {
            let denom = y[start + 1] - y[start - 1];
            let frac = if denom <= eps {
                0.5
            } else {
                (y[start] - y[start - 1]) / denom
            };
            (start as f64 + frac).max((start as f64).next_up())
        };
        for &i in &order[start..end] {
            out[i] = value;
        }
        start = end;
    }
    out
}

/// Continuous two-sided ranks of one column; requires at least 3 entries.
pub(crate) fn continuous_column(col: &[f64]) -> Vec<f64> {
    let lower = lower_continuous_column(col);
    let negated: Vec<f64> = col.iter().map(|v| -v).collect();
    let upper = lower_continuous_column(&negated);
    lower.iter().zip(&upper).map(|(a, b)| a.min(*b)).collect()
}

fn fill_columns<T: Copy + Default>(
    curves: &CurveSet,
    per_column: impl Fn(&[f64]) -> Vec<T>,
) -> Vec<T> {
    let (s, d) = (curves.num_curves(), curves.num_points());
    let mut out = vec![T::default(); s * d];
    let mut col = vec![0.0; s];
    for k in 0..d {
        for (i, slot) in col.iter_mut().enumerate() {
            *slot = curves.get(i, k);
        }
        for (i, v) in per_column(&col).into_iter().enumerate() {
            out[i * d + k] = v;
        }
    }
    out
}

/// Pointwise two-sided ranks of every curve among all curves.
pub fn two_sided_pointwise_ranks(curves: &CurveSet) -> RankMatrix {
    RankMatrix {
        r: fill_columns(curves, two_sided_column),
        s: curves.num_curves(),
        d: curves.num_points(),
    }
}

/// Continuous pointwise ranks; needs at least three curves.
pub fn continuous_pointwise_ranks(curves: &CurveSet) -> Result<ContRankMatrix> {
    let s = curves.num_curves();
    if s < 3 {
        return Err(invalid(format!(
            "continuous ranks need at least 3 curves, got {s}"
        )));
    }
    Ok(ContRankMatrix {
        c: fill_columns(curves, continuous_column),
        s,
        d: curves.num_points(),
    })
}
