//! Local polynomial likelihood estimation of the calibration function.
//!
//! At a target `x0` the calibration value of cluster `i` is approximated by
//! `b0 + b1 (X_i - x0)` and the kernel-weighted censored log-likelihood is
//! maximized over `(b0, b1)`; `b0` estimates `eta(x0)`.

use serde::{Deserialize, Serialize};

use crate::beran::{KernelKind, KernelSpec};
use crate::censored::{fit_constant_weighted, loglik_contrib};
use crate::copula::CopulaFamily;
use crate::data::{Observation, PseudoObservation};
use crate::error::{Error, Result};
use crate::margins::FittedMargins;
use crate::numeric::{maximize_nelder_mead, NelderMeadOptions};

/// Step used for the per-cluster derivatives in the calibration value.
const FD_STEP: f64 = 1e-4;
const NEWTON_MAX_ITER: usize = 100;
/// Largest Newton step on the (intercept, bandwidth-scaled slope) scale.
const MAX_STEP: f64 = 2.0;

/// Maximizer used for the two-parameter local problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalOptimizer {
    /// Damped Newton with per-cluster finite-difference curvature.
    Newton,
    /// Derivative-free simplex search.
    NelderMead,
}

/// Settings for local fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFitConfig {
    pub family: CopulaFamily,
    /// 0 for local constant, 1 for local linear.
    pub degree: u8,
    pub kernel: KernelSpec,
    pub min_effective_n: usize,
    pub optimizer: LocalOptimizer,
}

impl LocalFitConfig {
    /// Local linear fit with an Epanechnikov kernel.
    pub fn new(family: CopulaFamily, bandwidth: f64) -> Self {
        Self {
            family,
            degree: 1,
            kernel: KernelSpec::epanechnikov(bandwidth),
            min_effective_n: 5,
            optimizer: LocalOptimizer::Newton,
        }
    }

    pub fn with_degree(mut self, degree: u8) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_kernel(mut self, kind: KernelKind) -> Self {
        self.kernel.kind = kind;
        self
    }

    pub fn with_optimizer(mut self, optimizer: LocalOptimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn with_min_effective_n(mut self, n: usize) -> Self {
        self.min_effective_n = n;
        self
    }

    pub fn bandwidth(&self) -> f64 {
        self.kernel.bandwidth
    }

    fn check(&self) -> Result<()> {
        if self.degree > 1 {
            return Err(Error::InvalidArgument(format!(
                "local degree must be 0 or 1, got {}",
                self.degree
            )));
        }
        if !(self.kernel.bandwidth > 0.0 && self.kernel.bandwidth.is_finite()) {
            return Err(Error::Domain {
                what: "bandwidth",
                value: self.kernel.bandwidth,
            });
        }
        Ok(())
    }
}

/// Pseudo-observations paired with their covariates.
#[derive(Debug, Clone)]
pub struct CopulaSample {
    pub pseudo: Vec<PseudoObservation>,
    pub xs: Vec<f64>,
}

impl CopulaSample {
    pub fn new(pseudo: Vec<PseudoObservation>, xs: Vec<f64>) -> Result<Self> {
        if pseudo.len() != xs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} pseudo-observations but {} covariates",
                pseudo.len(),
                xs.len()
            )));
        }
        if pseudo.is_empty() {
            return Err(Error::EmptyInput("copula sample"));
        }
        Ok(Self { pseudo, xs })
    }

    pub fn from_margins(data: &[Observation], margins: &FittedMargins) -> Result<Self> {
        Self::new(
            margins.pseudo_observations(data)?,
            data.iter().map(|o| o.x).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Indices ordered by covariate, ties by index.
    pub fn order_by_x(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.xs[a].total_cmp(&self.xs[b]).then(a.cmp(&b)));
        idx
    }
}

/// The result of one local fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFit {
    pub x0: f64,
    /// Intercept, the estimate of `eta(x0)`.
    pub eta: f64,
    /// Slope in covariate units (zero for degree 0).
    pub slope: f64,
    /// Maximized kernel-weighted log-likelihood.
    pub objective: f64,
    pub effective_n: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl LocalFit {
    pub fn beta(&self) -> [f64; 2] {
        [self.eta, self.slope]
    }
}

struct Neighborhood<'a> {
    family: CopulaFamily,
    obs: Vec<&'a PseudoObservation>,
    /// Covariate offsets divided by the bandwidth.
    z: Vec<f64>,
    w: Vec<f64>,
    bounds: (f64, f64),
}

impl<'a> Neighborhood<'a> {
    fn build(
        sample: &'a CopulaSample,
        x0: f64,
        cfg: &LocalFitConfig,
        exclude: Option<usize>,
    ) -> Result<Self> {
        cfg.check()?;
        let h = cfg.kernel.bandwidth;
        let mut obs = Vec::new();
        let mut z = Vec::new();
        let mut w = Vec::new();
        for (i, (o, &x)) in sample.pseudo.iter().zip(&sample.xs).enumerate() {
            if Some(i) == exclude {
                continue;
            }
            let wi = cfg.kernel.eval(x - x0);
            if wi > 0.0 {
                obs.push(o);
                z.push((x - x0) / h);
                w.push(wi);
            }
        }
        if obs.is_empty() {
            return Err(Error::EmptyNeighborhood { x0, bandwidth: h });
        }
        if obs.len() < cfg.min_effective_n {
            return Err(Error::TooFewPoints {
                x0,
                found: obs.len(),
                required: cfg.min_effective_n,
            });
        }
        Ok(Self {
            family: cfg.family,
            obs,
            z,
            w,
            bounds: cfg.family.eta_bounds(),
        })
    }

    #[inline]
    fn eta_at(&self, b: [f64; 2], k: usize) -> f64 {
        (b[0] + b[1] * self.z[k]).clamp(self.bounds.0, self.bounds.1)
    }

    #[inline]
    fn ell(&self, eta: f64, k: usize) -> f64 {
        loglik_contrib(&self.family.link_inv(eta), self.obs[k])
    }

    fn value(&self, b: [f64; 2]) -> f64 {
        (0..self.obs.len())
            .map(|k| self.w[k] * self.ell(self.eta_at(b, k), k))
            .sum()
    }

    /// Value, gradient and Hessian on the scaled parametrization.
    fn derivs(&self, b: [f64; 2], degree: u8) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let mut f = 0.0;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for k in 0..self.obs.len() {
            let e = self.eta_at(b, k);
            let f0 = self.ell(e, k);
            let fp = self.ell(e + FD_STEP, k);
            let fm = self.ell(e - FD_STEP, k);
            let d1 = (fp - fm) / (2.0 * FD_STEP);
            let d2 = (fp - 2.0 * f0 + fm) / (FD_STEP * FD_STEP);
            let w = self.w[k];
            let z = if degree == 0 { 0.0 } else { self.z[k] };
            f += w * f0;
            g[0] += w * d1;
            g[1] += w * d1 * z;
            h[0][0] += w * d2;
            h[0][1] += w * d2 * z;
            h[1][1] += w * d2 * z * z;
        }
        h[1][0] = h[0][1];
        (f, g, h)
    }

    fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    fn weighted_start(&self) -> f64 {
        let pseudo: Vec<PseudoObservation> = self.obs.iter().map(|o| **o).collect();
        fit_constant_weighted(self.family, &pseudo, &self.w, None)
            .map(|c| c.eta())
            .unwrap_or(0.0)
    }
}

struct Solution {
    b: [f64; 2],
    value: f64,
    iterations: usize,
    converged: bool,
}

fn newton(nb: &Neighborhood, start: [f64; 2], degree: u8) -> Solution {
    let (lo, hi) = nb.bounds;
    let project = |b: [f64; 2]| [b[0].clamp(lo, hi), if degree == 0 { 0.0 } else { b[1] }];
    let mut b = project(start);
    let mut value = nb.value(b);
    let gtol = 1e-7 * (1.0 + nb.total_weight());
    let mut mu = 0.0_f64;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let (_, g, h) = nb.derivs(b, degree);
        let gmax = if degree == 0 { g[0].abs() } else { g[0].abs().max(g[1].abs()) };
        if gmax <= gtol {
            converged = true;
            break;
        }
        let mut accepted = false;
        let mut step_size = f64::INFINITY;
        while mu < 1e12 {
            let a00 = -h[0][0] + mu * h[0][0].abs().max(1e-8);
            let a11 = -h[1][1] + mu * h[1][1].abs().max(1e-8);
            let a01 = -h[0][1];
            let mut s = if degree == 0 {
                if a00 <= 0.0 {
                    mu = (mu * 10.0).max(1e-3);
                    continue;
                }
                [g[0] / a00, 0.0]
            } else {
                let det = a00 * a11 - a01 * a01;
                if a00 <= 0.0 || det <= 0.0 {
                    mu = (mu * 10.0).max(1e-3);
                    continue;
                }
                [(a11 * g[0] - a01 * g[1]) / det, (a00 * g[1] - a01 * g[0]) / det]
            };
            let big = s[0].abs().max(s[1].abs());
            if big > MAX_STEP {
                s = [s[0] * MAX_STEP / big, s[1] * MAX_STEP / big];
            }
            let mut t = 1.0;
            for _ in 0..20 {
                let cand = project([b[0] + t * s[0], b[1] + t * s[1]]);
                let v = nb.value(cand);
                if v > value {
                    step_size = (cand[0] - b[0]).abs().max((cand[1] - b[1]).abs());
                    b = cand;
                    value = v;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                mu = if mu < 1e-6 { 0.0 } else { mu * 0.25 };
                break;
            }
            mu = (mu * 10.0).max(1e-3);
        }
        if !accepted {
            // No ascent direction left at working precision.
            converged = gmax <= 1e3 * gtol;
            break;
        }
        if step_size < 1e-10 {
            converged = true;
            break;
        }
    }
    Solution {
        b,
        value,
        iterations,
        converged,
    }
}

fn simplex(nb: &Neighborhood, start: [f64; 2], degree: u8) -> Result<Solution> {
    let (lo, hi) = nb.bounds;
    if degree == 0 {
        let pseudo: Vec<PseudoObservation> = nb.obs.iter().map(|o| **o).collect();
        let c = fit_constant_weighted(nb.family, &pseudo, &nb.w, Some(start[0]))?;
        return Ok(Solution {
            b: [c.eta(), 0.0],
            value: c.loglik,
            iterations: c.iterations,
            converged: c.converged,
        });
    }
    let opt = maximize_nelder_mead(
        |b| {
            if b[0] < lo || b[0] > hi {
                f64::NEG_INFINITY
            } else {
                nb.value(b)
            }
        },
        start,
        [0.5, 0.5],
        NelderMeadOptions::default(),
    );
    Ok(Solution {
        b: opt.x,
        value: opt.value,
        iterations: opt.evaluations,
        converged: opt.converged,
    })
}

fn fit_core(
    sample: &CopulaSample,
    x0: f64,
    cfg: &LocalFitConfig,
    exclude: Option<usize>,
    init: Option<[f64; 2]>,
) -> Result<LocalFit> {
    let nb = Neighborhood::build(sample, x0, cfg, exclude)?;
    let h = cfg.kernel.bandwidth;
    let start = match init {
        Some([e, s]) if e.is_finite() && s.is_finite() => [e, s * h],
        _ => [nb.weighted_start(), 0.0],
    };
    let sol = match cfg.optimizer {
        LocalOptimizer::Newton => newton(&nb, start, cfg.degree),
        LocalOptimizer::NelderMead => simplex(&nb, start, cfg.degree)?,
    };
    if !sol.value.is_finite() {
        return Err(Error::Optimization(format!(
            "local likelihood not finite at x0 = {x0}"
        )));
    }
    Ok(LocalFit {
        x0,
        eta: sol.b[0],
        slope: sol.b[1] / h,
        objective: sol.value,
        effective_n: nb.obs.len(),
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// Kernel-weighted local log-likelihood at coefficients `beta` (covariate units).
pub fn local_loglik(
    beta: [f64; 2],
    x0: f64,
    sample: &CopulaSample,
    cfg: &LocalFitConfig,
) -> Result<f64> {
    let nb = Neighborhood::build(sample, x0, cfg, None)?;
    let slope = if cfg.degree == 0 { 0.0 } else { beta[1] };
    Ok(nb.value([beta[0], slope * cfg.kernel.bandwidth]))
}

/// Gradient of [`local_loglik`] in `beta` (covariate units).
pub fn local_gradient(
    beta: [f64; 2],
    x0: f64,
    sample: &CopulaSample,
    cfg: &LocalFitConfig,
) -> Result<[f64; 2]> {
    let nb = Neighborhood::build(sample, x0, cfg, None)?;
    let h = cfg.kernel.bandwidth;
    let slope = if cfg.degree == 0 { 0.0 } else { beta[1] };
    let (_, g, _) = nb.derivs([beta[0], slope * h], cfg.degree);
    Ok([g[0], g[1] * h])
}

/// Maximizes the local likelihood at `x0`.
pub fn fit_at(sample: &CopulaSample, x0: f64, cfg: &LocalFitConfig) -> Result<LocalFit> {
    fit_core(sample, x0, cfg, None, None)
}

/// As [`fit_at`], starting from `init` (intercept, slope) when given.
pub fn fit_at_from(
    sample: &CopulaSample,
    x0: f64,
    cfg: &LocalFitConfig,
    init: Option<[f64; 2]>,
) -> Result<LocalFit> {
    fit_core(sample, x0, cfg, None, init)
}

/// Local fit at `X_i` with cluster `i` left out.
pub fn fit_leave_one_out(
    sample: &CopulaSample,
    i: usize,
    cfg: &LocalFitConfig,
    init: Option<[f64; 2]>,
) -> Result<LocalFit> {
    fit_core(sample, sample.xs[i], cfg, Some(i), init)
}

/// Local fits at every observed covariate, in data order.
///
/// Points are visited in covariate order so each fit starts from its
/// neighbour's solution.
pub fn fit_at_data(sample: &CopulaSample, cfg: &LocalFitConfig) -> Vec<Result<LocalFit>> {
    let mut out: Vec<Option<Result<LocalFit>>> = vec![None; sample.len()];
    let mut warm: Option<[f64; 2]> = None;
    for i in sample.order_by_x() {
        let fit = fit_core(sample, sample.xs[i], cfg, None, warm);
        if let Ok(f) = &fit {
            warm = Some(f.beta());
        }
        out[i] = Some(fit);
    }
    out.into_iter().map(|f| f.expect("every index visited")).collect()
}

/// Estimated calibration curve over a covariate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub family: CopulaFamily,
    pub grid: Vec<f64>,
    pub eta_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub tau_hat: Vec<f64>,
    pub bandwidth: f64,
    pub per_point_converged: Vec<bool>,
    /// Grid points whose neighbourhood could not be fitted (values are NaN).
    pub failed: Vec<usize>,
}

/// Fits the calibration function at each grid point.
///
/// Individual failures are recorded; the call fails only if every point fails.
pub fn fit_curve(sample: &CopulaSample, grid: &[f64], cfg: &LocalFitConfig) -> Result<CalibrationFit> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("evaluation grid"));
    }
    cfg.check()?;
    let n = grid.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut fits: Vec<Option<LocalFit>> = vec![None; n];
    let mut last_err = None;
    let mut warm = None;
    for i in order {
        match fit_core(sample, grid[i], cfg, None, warm) {
            Ok(f) => {
                warm = Some(f.beta());
                fits[i] = Some(f);
            }
            Err(e) => last_err = Some(e),
        }
    }
    if fits.iter().all(Option::is_none) {
        return Err(last_err.unwrap_or(Error::EmptyInput("evaluation grid")));
    }
    let mut out = CalibrationFit {
        family: cfg.family,
        grid: grid.to_vec(),
        eta_hat: Vec::with_capacity(n),
        theta_hat: Vec::with_capacity(n),
        tau_hat: Vec::with_capacity(n),
        bandwidth: cfg.bandwidth(),
        per_point_converged: Vec::with_capacity(n),
        failed: Vec::new(),
    };
    for (i, f) in fits.into_iter().enumerate() {
        match f {
            Some(f) => {
                let p = cfg.family.link_inv(f.eta);
                out.eta_hat.push(f.eta);
                out.theta_hat.push(p.theta());
                out.tau_hat.push(p.tau());
                out.per_point_converged.push(f.converged);
            }
            None => {
                out.eta_hat.push(f64::NAN);
                out.theta_hat.push(f64::NAN);
                out.tau_hat.push(f64::NAN);
                out.per_point_converged.push(false);
                out.failed.push(i);
            }
        }
    }
    Ok(out)
}

/// Global fit of `eta(x) = a + b (x - center)` with unit weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCalibration {
    pub center: f64,
    pub intercept: f64,
    pub slope: f64,
    /// Unweighted censored log-likelihood at the maximum.
    pub loglik: f64,
    pub converged: bool,
}

/// Maximum likelihood linear calibration over the whole sample.
pub fn fit_linear_calibration(
    sample: &CopulaSample,
    family: CopulaFamily,
    optimizer: LocalOptimizer,
) -> Result<LinearCalibration> {
    let n = sample.len() as f64;
    let center = sample.xs.iter().sum::<f64>() / n;
    let spread = sample
        .xs
        .iter()
        .map(|x| (x - center).abs())
        .fold(0.0, f64::max);
    // A uniform kernel wider than the data gives every cluster the same weight.
    let h = 2.0 * spread.max(1.0);
    let cfg = LocalFitConfig::new(family, h)
        .with_kernel(KernelKind::Uniform)
        .with_optimizer(optimizer)
        .with_min_effective_n(2);
    let fit = fit_core(sample, center, &cfg, None, None)?;
    let loglik = fit.objective / cfg.kernel.eval(0.0);
    Ok(LinearCalibration {
        center,
        intercept: fit.eta,
        slope: fit.slope,
        loglik,
        converged: fit.converged,
    })
}
