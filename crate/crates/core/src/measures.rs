//! The five extremeness measures.
//!
//! Every measure is oriented so that a smaller value means a more extreme
//! curve; the directional quantile deviation is negated to fit that rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curves::CurveSet;
use crate::error::{invalid, Error, Result};
use crate::ranks::{
    continuous_pointwise_ranks, two_sided_pointwise_ranks, ContRankMatrix, RankMatrix,
    SPACING_EPS,
};

/// Default tail probability for the directional quantile measure.
pub const DEFAULT_QDIR_BETA: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Extreme rank: minimum pointwise two-sided rank.
    Rank,
    /// Extreme rank length: lexicographic order of sorted rank vectors.
    Erl,
    /// Minimum continuous rank.
    Cont,
    /// Extreme rank minus the mean continuous-rank deficit below it.
    Area,
    /// Directional quantile maximum absolute difference.
    Qdir,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::Rank,
        MeasureKind::Erl,
        MeasureKind::Cont,
        MeasureKind::Area,
        MeasureKind::Qdir,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Rank => "rank",
            MeasureKind::Erl => "erl",
            MeasureKind::Cont => "cont",
            MeasureKind::Area => "area",
            MeasureKind::Qdir => "qdir",
        }
    }

    /// Whether the envelope is the hull of the kept curves.
    pub fn is_rank_family(self) -> bool {
        !matches!(self, MeasureKind::Qdir)
    }

    /// Minimum number of curves the measure is defined for.
    pub fn min_curves(self) -> usize {
        match self {
            MeasureKind::Cont | MeasureKind::Area => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| invalid(format!("unknown measure '{s}' (expected rank, erl, cont, area or qdir)")))
    }
}

/// Per-curve measure values, smaller = more extreme.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    pub kind: MeasureKind,
    pub m: Vec<f64>,
}

impl MeasureVector {
    pub fn new(kind: MeasureKind, m: Vec<f64>) -> Result<Self> {
        if m.iter().any(|v| v.is_nan()) {
            return Err(invalid("measure values must not be NaN"));
        }
        Ok(Self { kind, m })
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

pub fn extreme_rank(ranks: &RankMatrix) -> MeasureVector {
    let m = ranks
        .rows()
        .map(|row| f64::from(*row.iter().min().expect("d >= 1")))
        .collect();
    MeasureVector { kind: MeasureKind::Rank, m }
}

/// Extreme rank length.
///
/// Each curve's ranks are sorted ascending and the resulting vectors are
/// compared lexicographically. The measure is the fraction of curves whose
/// sorted vector is lexicographically smaller than or equal to the curve's own,
/// so identical rank vectors share a value.
pub fn erl_measure(ranks: &RankMatrix) -> MeasureVector {
    let s = ranks.num_curves();
    let sorted: Vec<Vec<u32>> = ranks
        .rows()
        .map(|row| {
            let mut v = row.to_vec();
            v.sort_unstable();
            v
        })
        .collect();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_unstable_by(|&a, &b| sorted[a].cmp(&sorted[b]));

    let mut m = vec![0.0; s];
    let mut start = 0;
    while start < s {
        let mut end = start + 1;
        while end < s && sorted[order[end]] == sorted[order[start]] {
            end += 1;
        }
        let value = end as f64 / s as f64;
        for &i in &order[start..end] {
            m[i] = value;
        }
        start = end;
    }
    MeasureVector { kind: MeasureKind::Erl, m }
}

pub fn cont_measure(contranks: &ContRankMatrix) -> MeasureVector {
    let m = contranks
        .rows()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    MeasureVector { kind: MeasureKind::Cont, m }
}

/// Area rank: `k_i - (1/d) * sum_k max(0, k_i - c_ik)` with `k_i` the extreme rank.
///
/// Values lie in `(k_i - 1, k_i]`.
pub fn area_measure(ranks: &RankMatrix, contranks: &ContRankMatrix) -> Result<MeasureVector> {
    if ranks.num_curves() != contranks.num_curves() || ranks.num_points() != contranks.num_points()
    {
        return Err(invalid("rank matrices come from different curve sets"));
    }
    let d = ranks.num_points() as f64;
    let m = ranks
        .rows()
        .zip(contranks.rows())
        .map(|(r, c)| {
            let k = f64::from(*r.iter().min().expect("d >= 1"));
            // k - mean(max(0, k - c)) written as mean(min(c, k)); tiny ranks stay exact.
            let mean = c.iter().map(|&ci| ci.min(k)).sum::<f64>() / d;
            mean.max((k - 1.0).next_up())
        })
        .collect();
    Ok(MeasureVector { kind: MeasureKind::Area, m })
}

/// Central curve and pointwise quantiles for the directional quantile measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QdirParams {
    pub t0: Vec<f64>,
    pub qlo: Vec<f64>,
    pub qup: Vec<f64>,
    pub beta: f64,
    floor: Vec<f64>,
}

impl QdirParams {
    /// Assembles parameters from explicit curves; the clamp floor scales with `qup - qlo`.
    pub fn new(t0: Vec<f64>, qlo: Vec<f64>, qup: Vec<f64>, beta: f64) -> Result<Self> {
        let d = t0.len();
        if qlo.len() != d || qup.len() != d || d == 0 {
            return Err(invalid("qdir parameter lengths differ"));
        }
        check_beta(beta)?;
        let floor = qlo
            .iter()
            .zip(&qup)
            .map(|(lo, up)| clamp_floor((up - lo).abs()))
            .collect();
        let mut p = Self { t0, qlo, qup, beta, floor };
        p.clamp_order();
        Ok(p)
    }

    pub fn num_points(&self) -> usize {
        self.t0.len()
    }

    /// Denominator for deviations above the central curve.
    #[inline]
    pub fn upper_scale(&self, k: usize) -> f64 {
        (self.qup[k] - self.t0[k]).max(self.floor[k])
    }

    /// Denominator for deviations below the central curve.
    #[inline]
    pub fn lower_scale(&self, k: usize) -> f64 {
        (self.t0[k] - self.qlo[k]).max(self.floor[k])
    }

    fn clamp_order(&mut self) {
        for k in 0..self.t0.len() {
            self.qup[k] = self.qup[k].max(self.t0[k]);
            self.qlo[k] = self.qlo[k].min(self.t0[k]);
        }
    }
}

fn clamp_floor(range: f64) -> f64 {
    (SPACING_EPS * range).max(f64::MIN_POSITIVE)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(invalid(format!("beta must lie in (0, 0.5), got {beta}")));
    }
    Ok(())
}

/// Sample quantile of sorted data by linear interpolation of order
/// statistics at 1-based position `h = (n - 1) p + 1`.
pub(crate) fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

pub fn qdir_params(curves: &CurveSet, beta: f64) -> Result<QdirParams> {
    check_beta(beta)?;
    let (s, d) = (curves.num_curves(), curves.num_points());
    let mut t0 = Vec::with_capacity(d);
    let mut qlo = Vec::with_capacity(d);
    let mut qup = Vec::with_capacity(d);
    let mut floor = Vec::with_capacity(d);
    let mut degenerate = true;
    let mut col = vec![0.0; s];
    for k in 0..d {
        for (i, slot) in col.iter_mut().enumerate() {
            *slot = curves.get(i, k);
        }
        let mean = col.iter().sum::<f64>() / s as f64;
        col.sort_unstable_by(f64::total_cmp);
        let lo = interpolated_quantile(&col, beta);
        let up = interpolated_quantile(&col, 1.0 - beta);
        let eps = SPACING_EPS * (col[s - 1] - col[0]);
        if (up - mean).abs() > eps || (mean - lo).abs() > eps {
            degenerate = false;
        }
        t0.push(mean);
        qlo.push(lo);
        qup.push(up);
        floor.push(clamp_floor(col[s - 1] - col[0]));
    }
    if degenerate {
        return Err(Error::DegenerateData(
            "curves show no spread around the central curve at any point".into(),
        ));
    }
    let mut p = QdirParams { t0, qlo, qup, beta, floor };
    p.clamp_order();
    Ok(p)
}

/// Largest scaled deviation of every curve from the central curve.
pub fn qdir_deviations(curves: &CurveSet, params: &QdirParams) -> Result<Vec<f64>> {
    if params.num_points() != curves.num_points() {
        return Err(invalid("qdir parameters do not match the curve set"));
    }
    Ok(curves
        .curves()
        .map(|curve| {
            curve
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let above = (v - params.t0[k]) / params.upper_scale(k);
                    let below = (params.t0[k] - v) / params.lower_scale(k);
                    above.max(below)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

pub fn qdir_measure(curves: &CurveSet, params: &QdirParams) -> Result<MeasureVector> {
    let m = qdir_deviations(curves, params)?
        .into_iter()
        .map(|u| -u)
        .collect();
    MeasureVector::new(MeasureKind::Qdir, m)
}

/// Computes one measure for a curve set, along with the qdir parameters when relevant.
pub fn compute_measure(
    curves: &CurveSet,
    kind: MeasureKind,
    beta: f64,
) -> Result<(MeasureVector, Option<QdirParams>)> {
    if curves.num_curves() < kind.min_curves() {
        return Err(invalid(format!(
            "measure {kind} needs at least {} curves, got {}",
            kind.min_curves(),
            curves.num_curves()
        )));
    }
    Ok(match kind {
        MeasureKind::Rank => (extreme_rank(&two_sided_pointwise_ranks(curves)), None),
        MeasureKind::Erl => (erl_measure(&two_sided_pointwise_ranks(curves)), None),
        MeasureKind::Cont => (cont_measure(&continuous_pointwise_ranks(curves)?), None),
        MeasureKind::Area => {
            let r = two_sided_pointwise_ranks(curves);
            let c = continuous_pointwise_ranks(curves)?;
            (area_measure(&r, &c)?, None)
        }
        MeasureKind::Qdir => {
            let p = qdir_params(curves, beta)?;
            (qdir_measure(curves, &p)?, Some(p))
        }
    })
}

/// All requested measures sharing one rank computation.
pub fn compute_measures(
    curves: &CurveSet,
    kinds: &[MeasureKind],
    beta: f64,
) -> Result<Vec<(MeasureVector, Option<QdirParams>)>> {
    if let Some(k) = kinds.iter().find(|k| curves.num_curves() < k.min_curves()) {
        return Err(invalid(format!(
            "measure {k} needs at least {} curves, got {}",
            k.min_curves(),
            curves.num_curves()
        )));
    }
    let need_ranks = kinds
        .iter()
        .any(|k| matches!(k, MeasureKind::Rank | MeasureKind::Erl | MeasureKind::Area));
    let need_cont = kinds
        .iter()
        .any(|k| matches!(k, MeasureKind::Cont | MeasureKind::Area));
    let ranks = need_ranks.then(|| two_sided_pointwise_ranks(curves));
    let cont = if need_cont {
        Some(continuous_pointwise_ranks(curves)?)
    } else {
        None
    };
    kinds
        .iter()
        .map(|&kind| {
            Ok(match kind {
                MeasureKind::Rank => (extreme_rank(ranks.as_ref().expect("ranks")), None),
                MeasureKind::Erl => (erl_measure(ranks.as_ref().expect("ranks")), None),
                MeasureKind::Cont => (cont_measure(cont.as_ref().expect("cont")), None),
                MeasureKind::Area => (
                    area_measure(ranks.as_ref().expect("ranks"), cont.as_ref().expect("cont"))?,
                    None,
                ),
                MeasureKind::Qdir => {
                    let p = qdir_params(curves, beta)?;
                    (qdir_measure(curves, &p)?, Some(p))
                }
            })
        })
        .collect()
}
