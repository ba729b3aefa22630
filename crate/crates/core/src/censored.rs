//! Right-censored copula log-likelihood and the constant-parameter fit.

use crate::copula::{kendall_tau, CopulaFamily, CopulaParam, Coordinate};
use crate::data::PseudoObservation;
use crate::error::{Error, Result};
use crate::numeric::maximize_scalar;

const ETA_TOL: f64 = 1e-8;
const MAX_ITER: usize = 500;
const INIT_SUBSAMPLE: usize = 1000;

/// Log-likelihood contribution of one cluster.
///
/// Both censored: `ln C`; only the first observed: `ln dC/du1`;
/// only the second observed: `ln dC/du2`; both observed: `ln c`.
pub fn loglik_contrib(p: &CopulaParam, obs: &PseudoObservation) -> f64 {
    match (obs.d1, obs.d2) {
        (false, false) => p.log_cdf(&obs.pair),
        (true, false) => p.log_hfunc(&obs.pair, Coordinate::First),
        (false, true) => p.log_hfunc(&obs.pair, Coordinate::Second),
        (true, true) => p.log_pdf(&obs.pair),
    }
}

pub fn total_loglik(p: &CopulaParam, data: &[PseudoObservation]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("total_loglik"));
    }
    Ok(data.iter().map(|o| loglik_contrib(p, o)).sum())
}

/// Maximum likelihood fit of a covariate-free copula parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFit {
    pub theta0: CopulaParam,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ConstantFit {
    pub fn eta(&self) -> f64 {
        self.theta0.eta()
    }
}

/// Starting value on the calibration scale from the sample concordance.
pub fn initial_eta(family: CopulaFamily, data: &[PseudoObservation]) -> f64 {
    let fallback = match family {
        CopulaFamily::Frank => 0.1,
        _ => 0.0,
    };
    let take = data.len().min(INIT_SUBSAMPLE);
    let (u1, u2): (Vec<f64>, Vec<f64>) = data[..take]
        .iter()
        .map(|o| (o.pair.u1(), o.pair.u2()))
        .unzip();
    let tau = kendall_tau(&u1, &u2);
    let tau = match family {
        CopulaFamily::Clayton | CopulaFamily::Gumbel => tau.clamp(0.05, 0.95),
        CopulaFamily::Frank => {
            if tau.abs() < 0.01 {
                return fallback;
            }
            tau.clamp(-0.95, 0.95)
        }
    };
    family
        .theta_from_tau(tau)
        .map(|p| p.eta())
        .ok()
        .filter(|e| e.is_finite())
        .unwrap_or(fallback)
}

/// Maximizes the censored log-likelihood over a constant calibration value.
pub fn fit_constant(
    family: CopulaFamily,
    data: &[PseudoObservation],
    init: Option<f64>,
) -> Result<ConstantFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput("fit_constant"));
    }
    let init = init.unwrap_or_else(|| initial_eta(family, data));
    fit_constant_by(family, init, |p| data.iter().map(|o| loglik_contrib(p, o)).sum())
}

/// Kernel-weighted constant fit; used to start local fits.
pub fn fit_constant_weighted(
    family: CopulaFamily,
    data: &[PseudoObservation],
    weights: &[f64],
    init: Option<f64>,
) -> Result<ConstantFit> {
    if data.is_empty() || data.len() != weights.len() {
        return Err(Error::EmptyInput("fit_constant_weighted"));
    }
    let init = init.unwrap_or_else(|| initial_eta(family, data));
    fit_constant_by(family, init, |p| {
        data.iter()
            .zip(weights)
            .map(|(o, &w)| w * loglik_contrib(p, o))
            .sum()
    })
}

fn fit_constant_by<F: Fn(&CopulaParam) -> f64>(
    family: CopulaFamily,
    init: f64,
    objective: F,
) -> Result<ConstantFit> {
    let (lo, hi) = family.eta_bounds();
    let opt = maximize_scalar(
        |eta| objective(&family.link_inv(eta)),
        lo,
        hi,
        init,
        ETA_TOL,
        MAX_ITER,
    )?;
    let theta0 = family.link_inv(opt.x);
    Ok(ConstantFit {
        theta0,
        loglik: objective(&theta0),
        iterations: opt.iterations,
        converged: opt.converged,
    })
}
