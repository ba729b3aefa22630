//! Conditional copula models for right-censored bivariate event times.
//!
//! The dependence between two clustered event times is modelled by a
//! one-parameter Archimedean copula whose parameter varies smoothly with a
//! cluster-level covariate. The calibration function is estimated by local
//! linear likelihood on pseudo-observations from parametric (Weibull) or
//! nonparametric (Beran) margins, and a generalized likelihood ratio test
//! with a cluster bootstrap checks whether it is constant.

pub mod bandwidth;
pub mod beran;
pub mod censored;
pub mod copula;
pub mod data;
pub mod error;
pub mod glr;
pub mod local;
pub mod margins;
pub mod numeric;
pub mod par;
pub mod rng;
pub mod sim;
pub mod weibull;

pub use bandwidth::{
    cv_copula, cv_joint, cv_joint_with, cv_parametric, log_spaced, oracle_beran_bandwidth, BandwidthChoice,
    BandwidthGrid, CriterionEntry,
};
pub use beran::{
    beran_eval, beran_fit, beran_inverse, kernel_weights, km_conditional_sample, km_fit,
    BeranCurve, KernelKind, KernelSpec, KmCurve, SortedMargin, StepCurve,
};
pub use censored::{fit_constant, fit_constant_weighted, loglik_contrib, total_loglik, ConstantFit};
pub use copula::{kendall_tau, Coordinate, CopulaFamily, CopulaParam, UnitPair};
pub use data::{censoring_fraction, margin_data, Member, Observation, PseudoObservation};
pub use error::{Error, Result};
pub use rng::{child_seed, RandomStream};
pub use sim::{
    estimate_replicate, estimation_study, generate_dataset, metrics_from, power_study, test_replicate, CensoringLevel,
    EstimationOutcome, MetricsRow, PowerRow, Scenario, StudyConfig, TauShape,
};
pub use weibull::{fit_weibull, weibull_loglik, WeibullFit};
pub use glr::{
    bootstrap_pvalue, bootstrap_resample, glr_from_sample, glr_statistic, p_value_from,
    CensoringModel, CensoringScheme, GlrResult, GlrSetup, GlrStatistic, Resample,
};
pub use local::{
    fit_at, fit_curve, fit_linear_calibration, local_loglik, CalibrationFit, CopulaSample,
    LinearCalibration, LocalFit, LocalFitConfig, LocalOptimizer,
};
pub use margins::{fit_margins, FittedMargin, FittedMargins, MarginKind, MarginSpec};
