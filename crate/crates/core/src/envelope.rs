//! Critical values and global envelopes with the graphical interpretation:
//! a curve leaves the envelope exactly when its measure falls below the
//! critical value.

use serde::Serialize;

use crate::curves::CurveSet;
use crate::error::{invalid, Result};
use crate::measures::{MeasureKind, MeasureVector, QdirParams};

/// Relative slack applied to `alpha * s` so integer boundaries do not flip.
const ALPHA_S_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalEnvelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Critical value `m_(alpha)` in measure units.
    pub crit: f64,
    /// Zero-based indices of curves with `M_i >= crit`.
    pub kept: Vec<usize>,
    pub alpha: f64,
}

impl GlobalEnvelope {
    /// True when `curve` leaves `[lower, upper]` at some point.
    pub fn excludes(&self, curve: &[f64]) -> bool {
        curve
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(v, (lo, up))| v < lo || v > up)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Largest count of strictly-more-extreme curves allowed at level `alpha`.
pub(crate) fn extreme_allowance(alpha: f64, s: usize) -> f64 {
    alpha * s as f64 * (1.0 + ALPHA_S_GUARD)
}

/// `m_(alpha) = max { M_i : #{j : M_j < M_i} <= alpha s }`.
pub fn critical_value(measures: &MeasureVector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if measures.is_empty() {
        return Err(invalid("empty measure vector"));
    }
    let mut sorted = measures.m.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let allowance = extreme_allowance(alpha, sorted.len());
    // sorted[j] has exactly `first index of its tie group` strictly smaller values.
    let mut crit = sorted[0];
    let mut group_start = 0;
    for j in 1..sorted.len() {
        if sorted[j] != sorted[j - 1] {
            group_start = j;
        }
        if group_start as f64 <= allowance {
            crit = sorted[j];
        } else {
            break;
        }
    }
    Ok(crit)
}

/// `out[i] = M_i < crit`.
pub fn classify(measures: &MeasureVector, crit: f64) -> Vec<bool> {
    measures.m.iter().map(|&v| v < crit).collect()
}

/// Builds the global envelope for `measures` at level `alpha`.
///
/// Rank-family measures use the pointwise hull of the kept curves. The qdir
/// envelope is the central curve widened by the critical deviation times the
/// directional quantile distances, so `params` must be given for that kind.
pub fn build_envelope(
    curves: &CurveSet,
    measures: &MeasureVector,
    alpha: f64,
    params: Option<&QdirParams>,
) -> Result<GlobalEnvelope> {
    if measures.len() != curves.num_curves() {
        return Err(invalid("measure vector length differs from the curve count"));
    }
    let crit = critical_value(measures, alpha)?;
    let kept: Vec<usize> = (0..measures.len())
        .filter(|&i| measures.m[i] >= crit)
        .collect();
    let d = curves.num_points();

    let mut lower = vec![f64::INFINITY; d];
    let mut upper = vec![f64::NEG_INFINITY; d];
    for &i in &kept {
        for (k, &v) in curves.curve(i).iter().enumerate() {
            lower[k] = lower[k].min(v);
            upper[k] = upper[k].max(v);
        }
    }

    if measures.kind == MeasureKind::Qdir {
        let params = params.ok_or_else(|| invalid("qdir envelope needs QdirParams"))?;
        if params.num_points() != d {
            return Err(invalid("qdir parameters do not match the curve set"));
        }
        let u_crit = -crit;
        // The hull of the kept curves is already filled in; taking the union
        // with the quantile band absorbs rounding in the deviation ratios.
        for k in 0..d {
            let lo = params.t0[k] - u_crit * params.lower_scale(k);
            let up = params.t0[k] + u_crit * params.upper_scale(k);
            lower[k] = lower[k].min(lo);
            upper[k] = upper[k].max(up);
        }
    }

    Ok(GlobalEnvelope { lower, upper, crit, kept, alpha })
}

/// Pointwise central curve reported next to the envelope: the median of the
/// kept curves for rank-family measures, the mean curve for qdir.
pub fn central_curve(
    curves: &CurveSet,
    envelope: &GlobalEnvelope,
    kind: MeasureKind,
    params: Option<&QdirParams>,
) -> Result<Vec<f64>> {
    if kind == MeasureKind::Qdir {
        let params = params.ok_or_else(|| invalid("qdir central curve needs QdirParams"))?;
        return Ok(params.t0.clone());
    }
    let mut buf = Vec::with_capacity(envelope.kept.len());
    Ok((0..curves.num_points())
        .map(|k| {
            buf.clear();
            buf.extend(envelope.kept.iter().map(|&i| curves.get(i, k)));
            buf.sort_unstable_by(f64::total_cmp);
            let n = buf.len();
            if n % 2 == 1 {
                buf[n / 2]
            } else {
                0.5 * (buf[n / 2 - 1] + buf[n / 2])
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::compute_measure;

    fn mv(m: &[f64]) -> MeasureVector {
        MeasureVector::new(MeasureKind::Cont, m.to_vec()).unwrap()
    }

    /// Exhaustive search over every candidate.
    fn crit_oracle(m: &[f64], alpha: f64) -> f64 {
        let s = m.len() as f64;
        m.iter()
            .copied()
            .filter(|&c| m.iter().filter(|&&x| x < c).count() as f64 <= alpha * s + 1e-9)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn critical_value_examples() {
        assert_eq!(critical_value(&mv(&[1.0, 1.0, 2.0, 2.0, 3.0]), 0.4).unwrap(), 2.0);
        assert_eq!(crit_oracle(&[1.0, 1.0, 2.0, 2.0, 3.0], 0.4), 2.0);
        let m = mv(&[0.1, 0.2, 0.3]);
        let c = critical_value(&m, 0.05).unwrap();
        assert_eq!(c, 0.1);
        assert!(classify(&m, c).iter().all(|x| !x));
        assert_eq!(critical_value(&mv(&[4.0; 6]), 0.5).unwrap(), 4.0);
    }

    #[test]
    fn alpha_bounds() {
        assert!(critical_value(&mv(&[1.0, 2.0]), 0.0).is_err());
        assert!(critical_value(&mv(&[1.0, 2.0]), 1.0).is_err());
        assert!(critical_value(&mv(&[1.0, 2.0]), f64::NAN).is_err());
    }

    #[test]
    fn alpha_s_integer_boundary_includes() {
        // 0.1 * 30 is 3.0000000000000004 in binary; 0.07 * 100 is 7.000000000000001.
        let m: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(critical_value(&mv(&m), 0.07).unwrap(), 7.0);
        let m: Vec<f64> = (0..30).map(f64::from).collect();
        assert_eq!(critical_value(&mv(&m), 0.1).unwrap(), 3.0);
        let m: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(critical_value(&mv(&m), 0.3).unwrap(), 3.0);
    }

    #[test]
    fn classify_examples() {
        let m = mv(&[1.0, 1.0, 2.0, 2.0, 3.0]);
        assert_eq!(classify(&m, 2.0), vec![true, true, false, false, false]);
        assert!(classify(&m, 1.0).iter().all(|x| !x));
        let m = mv(&(0..20).map(f64::from).collect::<Vec<_>>());
        let c = critical_value(&m, 0.05).unwrap();
        assert!(classify(&m, c).iter().filter(|x| **x).count() <= 1);
    }

    #[test]
    fn constant_curves_one_point() {
        let cs = CurveSet::with_unit_grid(vec![1.0, 2.0, 3.0], 3).unwrap();
        let (m, _) = compute_measure(&cs, MeasureKind::Rank, 0.025).unwrap();
        assert_eq!(m.m, vec![1.0, 2.0, 1.0]);
        // alpha s = 1.5 admits no more than one curve below crit; two curves have rank 1.
        let env = build_envelope(&cs, &m, 0.5, None).unwrap();
        assert_eq!(env.crit, 1.0);
        assert_eq!(env.kept, vec![0, 1, 2]);
        assert_eq!((env.lower[0], env.upper[0]), (1.0, 3.0));
    }

    #[test]
    fn qdir_requires_params() {
        let cs = CurveSet::with_unit_grid(vec![1.0, 2.0, 3.0, 5.0], 4).unwrap();
        let (m, p) = compute_measure(&cs, MeasureKind::Qdir, 0.025).unwrap();
        assert!(build_envelope(&cs, &m, 0.3, None).is_err());
        let env = build_envelope(&cs, &m, 0.3, p.as_ref()).unwrap();
        assert!(env.lower[0] <= env.upper[0]);
        let central = central_curve(&cs, &env, MeasureKind::Qdir, p.as_ref()).unwrap();
        assert!(env.lower[0] <= central[0] && central[0] <= env.upper[0]);
    }
}
