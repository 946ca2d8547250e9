//! Global envelopes for sets of discretized functions.
//!
//! Five extremeness measures order curves from most to least extreme
//! (extreme rank, extreme rank length, continuous rank, area rank and the
//! directional quantile deviation). A critical value at level `alpha` splits
//! the curves, and the resulting global envelope contains exactly the curves
//! that are not extreme. The [`sim`] and [`study`] modules reproduce a Monte
//! Carlo comparison of the measures' power on Gaussian process data.

pub mod curves;
pub mod envelope;
pub mod error;
pub mod formats;
pub mod measures;
pub mod ranks;
pub mod sim;
pub mod study;

pub use curves::CurveSet;
pub use envelope::{build_envelope, central_curve, classify, critical_value, GlobalEnvelope};
pub use error::{Error, Result};
pub use measures::{
    area_measure, compute_measure, compute_measures, cont_measure, erl_measure, extreme_rank,
    qdir_measure, qdir_params, MeasureKind, MeasureVector, QdirParams,
};
pub use ranks::{continuous_pointwise_ranks, two_sided_pointwise_ranks, ContRankMatrix, RankMatrix};
pub use sim::{extract, inject_outlier, outlier_value, simulate_gp, CurvePool, GpConfig, OutlierKind};
pub use study::{
    detect_first, run_rep, run_study, wilson_ci, PowerEstimate, PowerTable, ScenarioGrid,
};
