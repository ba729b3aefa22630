//! Monte Carlo study: data generation, estimation accuracy of the
//! calibration curve, and size/power of the bootstrap test.

use serde::{Deserialize, Serialize};

use crate::bandwidth::{cv_copula, log_spaced, oracle_beran_bandwidth, BandwidthChoice};
use crate::copula::CopulaFamily;
use crate::data::{margin_data, Member, Observation};
use crate::error::{Error, Result};
use crate::glr::{bootstrap_pvalue, CensoringScheme, GlrResult, GlrSetup, MAX_FAILURE_SHARE};
use crate::local::{fit_curve, CalibrationFit, CopulaSample, LocalFitConfig};
use crate::margins::{fit_margins, MarginKind, MarginSpec};
use crate::par;
use crate::rng::{child_seed, RandomStream};
use crate::weibull::WeibullFit;

pub const X_RANGE: (f64, f64) = (2.0, 5.0);
pub const EVENT_LAMBDA: f64 = 0.5;
pub const EVENT_RHO: f64 = 1.5;
pub const EVENT_BETA: f64 = 0.8;
pub const CENSOR_LAMBDA: f64 = 1.5;
/// Spacing of the evaluation grid used for the integrated metrics.
pub const GRID_STEP: f64 = 0.1;

/// Shape of the true Kendall's tau as a function of the covariate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauShape {
    Constant,
    Convex,
    Concave,
}

impl TauShape {
    pub const ALL: [TauShape; 3] = [TauShape::Constant, TauShape::Convex, TauShape::Concave];

    pub fn tau(self, x: f64) -> f64 {
        match self {
            TauShape::Constant => 0.6,
            TauShape::Convex => 0.1 * (x - 3.0).powi(2) + 0.3,
            TauShape::Concave => -0.1 * (x - 3.0).powi(2) + 0.7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TauShape::Constant => "constant",
            TauShape::Convex => "convex",
            TauShape::Concave => "concave",
        }
    }
}

impl std::str::FromStr for TauShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown tau shape `{s}`")))
    }
}

/// Censoring level of the univariate Weibull censoring time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensoringLevel {
    None,
    /// About 20% censored.
    Low,
    /// About 50% censored.
    Moderate,
}

impl CensoringLevel {
    pub const ALL: [CensoringLevel; 3] =
        [CensoringLevel::None, CensoringLevel::Low, CensoringLevel::Moderate];

    /// Weibull shape of the censoring time, if any.
    pub fn shape(self) -> Option<f64> {
        match self {
            CensoringLevel::None => None,
            CensoringLevel::Low => Some(1.5),
            CensoringLevel::Moderate => Some(0.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CensoringLevel::None => "none",
            CensoringLevel::Low => "low",
            CensoringLevel::Moderate => "moderate",
        }
    }
}

impl std::str::FromStr for CensoringLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "0" | "0%" => Ok(CensoringLevel::None),
            "low" | "20" | "20%" => Ok(CensoringLevel::Low),
            "moderate" | "50" | "50%" => Ok(CensoringLevel::Moderate),
            other => Err(Error::InvalidArgument(format!("unknown censoring level `{other}`"))),
        }
    }
}

/// One simulation setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tau_shape: TauShape,
    pub family: CopulaFamily,
    pub n: usize,
    pub censoring: CensoringLevel,
    pub margin_kind: MarginKind,
    pub seed: u64,
}

impl Scenario {
    pub fn event_margin() -> WeibullFit {
        WeibullFit::with_params(EVENT_LAMBDA, EVENT_RHO, EVENT_BETA).expect("valid constants")
    }

    pub fn label(&self) -> String {
        format!(
            "{}/{}/n={}/{}/{}",
            self.family,
            self.tau_shape.name(),
            self.n,
            self.censoring.name(),
            self.margin_kind
        )
    }
}

/// Simulates one dataset of `s.n` clusters.
pub fn generate_dataset(s: &Scenario, rng: &mut RandomStream) -> Result<Vec<Observation>> {
    if s.n == 0 {
        return Err(Error::InvalidArgument("scenario needs n >= 1".into()));
    }
    let margin = Scenario::event_margin();
    let mut out = Vec::with_capacity(s.n);
    for _ in 0..s.n {
        let x = rng.uniform_in(X_RANGE.0, X_RANGE.1);
        let p = s.family.theta_from_tau(s.tau_shape.tau(x))?;
        let u = p.sample_pair(rng);
        let t1 = margin.inverse_survival(u.u1(), x)?;
        let t2 = margin.inverse_survival(u.u2(), x)?;
        let c = match s.censoring.shape() {
            None => f64::INFINITY,
            Some(rho) => (-rng.uniform().ln() / CENSOR_LAMBDA).powf(1.0 / rho),
        };
        out.push(Observation::new(t1.min(c), t2.min(c), t1 <= c, t2 <= c, x)?);
    }
    Ok(out)
}

/// Evaluation grid `{lo, lo + 0.1, ..., hi}`.
pub fn evaluation_grid(lo: f64, hi: f64) -> Vec<f64> {
    let k = ((hi - lo) / GRID_STEP).round() as usize;
    (0..=k).map(|i| lo + GRID_STEP * i as f64).collect()
}

/// Study-wide settings shared by every replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub grid: Vec<f64>,
    pub copula_bandwidths: Vec<f64>,
    pub margin_bandwidths: Vec<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            grid: evaluation_grid(X_RANGE.0, X_RANGE.1),
            copula_bandwidths: log_spaced(0.3, 3.0, 6),
            margin_bandwidths: log_spaced(0.3, 3.0, 6),
        }
    }
}

/// Integrated accuracy of the estimated tau curve (not rescaled).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub ibias2: f64,
    pub ivar: f64,
    pub imse: f64,
}

impl MetricsRow {
    /// The row multiplied by 100 for reporting.
    pub fn scaled(&self) -> [f64; 3] {
        [100.0 * self.ibias2, 100.0 * self.ivar, 100.0 * self.imse]
    }
}

/// Riemann-sum metrics from replicate curves evaluated on a common grid.
///
/// The pointwise variance divides by the number of replicates, so
/// `imse` equals `ibias2 + ivar` term by term.
pub fn metrics_from(curves: &[Vec<f64>], truth: &[f64], step: f64) -> Result<MetricsRow> {
    if curves.is_empty() {
        return Err(Error::EmptyInput("metrics_from"));
    }
    let m = curves.len() as f64;
    let mut ibias2 = 0.0;
    let mut ivar = 0.0;
    for (g, &t) in truth.iter().enumerate() {
        let mean = curves.iter().map(|c| c[g]).sum::<f64>() / m;
        let var = curves.iter().map(|c| (c[g] - mean).powi(2)).sum::<f64>() / m;
        ibias2 += (mean - t).powi(2) * step;
        ivar += var * step;
    }
    Ok(MetricsRow {
        ibias2,
        ivar,
        imse: ibias2 + ivar,
    })
}

/// Margins and bandwidth-selected copula sample of one simulated dataset.
struct Prepared {
    margin_spec: MarginSpec,
    sample: CopulaSample,
    choice: BandwidthChoice,
}

fn prepare(s: &Scenario, data: &[Observation], cfg: &StudyConfig) -> Result<Prepared> {
    let margin_spec = match s.margin_kind {
        MarginKind::Weibull => MarginSpec::Weibull,
        MarginKind::Beran => {
            let truth = Scenario::event_margin();
            let surv = |t: f64, x: f64| truth.survival(t, x).unwrap_or(1.0);
            let h1 = oracle_beran_bandwidth(
                &margin_data(data, Member::First),
                surv,
                &cfg.margin_bandwidths,
            )?;
            let h2 = oracle_beran_bandwidth(
                &margin_data(data, Member::Second),
                surv,
                &cfg.margin_bandwidths,
            )?;
            MarginSpec::Beran { h1, h2 }
        }
    };
    let margins = fit_margins(data, &margin_spec)?;
    let sample = CopulaSample::from_margins(data, &margins)?;
    let mut choice = cv_copula(
        &sample,
        &LocalFitConfig::new(s.family, 1.0),
        &cfg.copula_bandwidths,
    )?;
    if let MarginSpec::Beran { h1, h2 } = margin_spec {
        choice.h_margin1 = Some(h1);
        choice.h_margin2 = Some(h2);
    }
    Ok(Prepared {
        margin_spec,
        sample,
        choice,
    })
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_SHARE * total as f64 || failed == total {
        Err(Error::TooManyFailures { failed, total })
    } else {
        Ok(())
    }
}

/// One estimation replicate: simulate with `seed`, fit margins, select the
/// copula bandwidth and estimate the curve on the study grid.
pub fn estimate_replicate(
    s: &Scenario,
    seed: u64,
    cfg: &StudyConfig,
) -> Result<(CalibrationFit, BandwidthChoice)> {
    let data = generate_dataset(s, &mut RandomStream::new(seed))?;
    let prep = prepare(s, &data, cfg)?;
    let local = LocalFitConfig::new(s.family, prep.choice.h_copula);
    let curve = fit_curve(&prep.sample, &cfg.grid, &local)?;
    if !curve.failed.is_empty() {
        return Err(Error::Optimization("curve has unfitted grid points".into()));
    }
    Ok((curve, prep.choice))
}

/// One testing replicate: simulate with `seed`, select bandwidths and run the
/// bootstrap test with `b` replicates under univariate censoring.
pub fn test_replicate(s: &Scenario, seed: u64, b: usize, cfg: &StudyConfig) -> Result<GlrResult> {
    let data = generate_dataset(s, &mut RandomStream::new(seed))?;
    let prep = prepare(s, &data, cfg)?;
    let setup = GlrSetup {
        local: LocalFitConfig::new(s.family, prep.choice.h_copula),
        margins: prep.margin_spec,
        scheme: CensoringScheme::Univariate,
        replicates: b,
        seed: child_seed(seed, u64::MAX),
    };
    bootstrap_pvalue(&data, &setup, &prep.choice)
}

/// Result of an estimation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationOutcome {
    pub scenario: Scenario,
    pub replicates: usize,
    pub failed: usize,
    pub metrics: MetricsRow,
    pub grid: Vec<f64>,
    pub mean_tau: Vec<f64>,
    pub selected_bandwidths: Vec<f64>,
}

/// Accuracy of the estimated tau curve over `m` replicates.
pub fn estimation_study(s: &Scenario, m: usize, cfg: &StudyConfig) -> Result<EstimationOutcome> {
    if m < 2 {
        return Err(Error::InvalidArgument("estimation study needs M >= 2".into()));
    }
    let runs = par::map_range(m, |r| {
        estimate_replicate(s, child_seed(s.seed, r as u64), cfg)
            .map(|(curve, choice)| (curve.tau_hat, choice.h_copula))
    });
    let mut curves = Vec::new();
    let mut hs = Vec::new();
    let mut failed = 0;
    for r in runs {
        match r {
            Ok((c, h)) => {
                curves.push(c);
                hs.push(h);
            }
            Err(_) => failed += 1,
        }
    }
    check_failures(failed, m)?;
    let truth: Vec<f64> = cfg.grid.iter().map(|&x| s.tau_shape.tau(x)).collect();
    let metrics = metrics_from(&curves, &truth, GRID_STEP)?;
    let k = curves.len() as f64;
    let mean_tau = (0..cfg.grid.len())
        .map(|g| curves.iter().map(|c| c[g]).sum::<f64>() / k)
        .collect();
    Ok(EstimationOutcome {
        scenario: *s,
        replicates: m,
        failed,
        metrics,
        grid: cfg.grid.clone(),
        mean_tau,
        selected_bandwidths: hs,
    })
}

/// Empirical rejection rate of the bootstrap test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: Scenario,
    pub rejection_rate: f64,
    pub rejections: usize,
    /// Replicates that produced a p-value.
    pub m: usize,
    pub failed: usize,
    pub b: usize,
    pub alpha: f64,
    pub p_values: Vec<f64>,
}

/// Per-replicate p-values of the bootstrap test; failures are `None`.
pub fn power_p_values(s: &Scenario, m: usize, b: usize, cfg: &StudyConfig) -> Vec<Option<f64>> {
    par::map_range(m, |r| {
        test_replicate(s, child_seed(s.seed, r as u64), b, cfg)
            .ok()
            .map(|g| g.p_value)
    })
}

/// Rejection rate at level `alpha`; a replicate rejects iff `p <= alpha`.
pub fn power_from(s: &Scenario, p: &[Option<f64>], b: usize, alpha: f64) -> Result<PowerRow> {
    let p_values: Vec<f64> = p.iter().flatten().copied().collect();
    let failed = p.len() - p_values.len();
    check_failures(failed, p.len())?;
    let rejections = p_values.iter().filter(|&&v| v <= alpha).count();
    Ok(PowerRow {
        scenario: *s,
        rejection_rate: rejections as f64 / p_values.len() as f64,
        rejections,
        m: p_values.len(),
        failed,
        b,
        alpha,
        p_values,
    })
}

/// Size or power of the test over `m` replicates with `b` bootstrap samples.
pub fn power_study(
    s: &Scenario,
    m: usize,
    b: usize,
    alpha: f64,
    cfg: &StudyConfig,
) -> Result<PowerRow> {
    if m == 0 || b == 0 {
        return Err(Error::InvalidArgument("power study needs M >= 1 and B >= 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
        });
    }
    power_from(s, &power_p_values(s, m, b, cfg), b, alpha)
}
