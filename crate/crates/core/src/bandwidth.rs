//! Leave-one-out cross-validated bandwidth selection and the oracle selector
//! for Beran margins used in simulations.

use serde::{Deserialize, Serialize};

use crate::beran::{KernelSpec, SortedMargin};
use crate::censored::loglik_contrib;
use crate::copula::CopulaFamily;
use crate::data::Observation;
use crate::error::{Error, Result};
use crate::local::{fit_leave_one_out, CopulaSample, LocalFitConfig};
use crate::margins::{fit_margins, FittedMargin, FittedMargins, MarginSpec};
use crate::par;
use crate::weibull::WeibullFit;

/// `k` values equally spaced on the log scale from `lo` to `hi`.
pub fn log_spaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..k)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == k - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (k - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Candidate bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    pub copula: Vec<f64>,
    pub margins: Option<(Vec<f64>, Vec<f64>)>,
}

impl BandwidthGrid {
    pub fn copula_only(copula: Vec<f64>) -> Self {
        Self {
            copula,
            margins: None,
        }
    }

    /// Six values from 0.3 to 3 on the log scale.
    pub fn simulation_default() -> Self {
        Self::copula_only(log_spaced(0.3, 3.0, 6))
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .copula
            .iter()
            .chain(self.margins.iter().flat_map(|(a, b)| a.iter().chain(b)));
        for &h in all {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Domain {
                    what: "bandwidth candidate",
                    value: h,
                });
            }
        }
        if self.copula.is_empty() {
            return Err(Error::EmptyInput("copula bandwidth grid"));
        }
        if let Some((a, b)) = &self.margins {
            if a.is_empty() || b.is_empty() {
                return Err(Error::EmptyInput("margin bandwidth grid"));
            }
        }
        Ok(())
    }
}

/// One evaluated cell of the criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub h_margin1: Option<f64>,
    pub h_margin2: Option<f64>,
    pub h_copula: f64,
    /// `-inf` when some leave-one-out fit failed.
    pub value: f64,
}

/// Selected bandwidths with the full criterion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthChoice {
    pub h_copula: f64,
    pub h_margin1: Option<f64>,
    pub h_margin2: Option<f64>,
    pub criterion_value: f64,
    pub criterion_table: Vec<CriterionEntry>,
    /// Number of cells excluded because a leave-one-out fit failed.
    pub excluded: usize,
}

impl BandwidthChoice {
    /// A fixed choice that bypasses selection.
    pub fn fixed(h_copula: f64, margins: Option<(f64, f64)>) -> Self {
        Self {
            h_copula,
            h_margin1: margins.map(|m| m.0),
            h_margin2: margins.map(|m| m.1),
            criterion_value: f64::NAN,
            criterion_table: Vec::new(),
            excluded: 0,
        }
    }

    pub fn margin_spec(&self) -> MarginSpec {
        match (self.h_margin1, self.h_margin2) {
            (Some(h1), Some(h2)) => MarginSpec::Beran { h1, h2 },
            _ => MarginSpec::Weibull,
        }
    }
}

/// Held-out contributions `l(theta^(-i)(X_i), U_i)` in data order.
pub fn loo_contributions(sample: &CopulaSample, cfg: &LocalFitConfig) -> Result<Vec<f64>> {
    let mut out = vec![0.0; sample.len()];
    let mut warm = None;
    for i in sample.order_by_x() {
        let fit = fit_leave_one_out(sample, i, cfg, warm)?;
        warm = Some(fit.beta());
        out[i] = loglik_contrib(&cfg.family.link_inv(fit.eta), &sample.pseudo[i]);
    }
    Ok(out)
}

/// Leave-one-out criterion for one copula bandwidth; `-inf` on any failure.
pub fn loo_criterion(sample: &CopulaSample, cfg: &LocalFitConfig) -> f64 {
    match loo_contributions(sample, cfg) {
        Ok(c) => c.iter().sum(),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn pick(table: Vec<CriterionEntry>) -> Result<BandwidthChoice> {
    let excluded = table.iter().filter(|e| e.value == f64::NEG_INFINITY).count();
    let key = |e: &CriterionEntry| {
        (
            e.h_margin1.unwrap_or(0.0),
            e.h_margin2.unwrap_or(0.0),
            e.h_copula,
        )
    };
    let mut best: Option<&CriterionEntry> = None;
    for e in &table {
        if !e.value.is_finite() {
            continue;
        }
        best = match best {
            None => Some(e),
            Some(b) => {
                let better = e.value > b.value
                    || (e.value == b.value && key(e).partial_cmp(&key(b)) == Some(std::cmp::Ordering::Less));
                Some(if better { e } else { b })
            }
        };
    }
    let best = *best.ok_or_else(|| {
        Error::Optimization("every bandwidth candidate failed cross-validation".into())
    })?;
    Ok(BandwidthChoice {
        h_copula: best.h_copula,
        h_margin1: best.h_margin1,
        h_margin2: best.h_margin2,
        criterion_value: best.value,
        criterion_table: table,
        excluded,
    })
}

/// Copula bandwidth maximizing the leave-one-out criterion on fixed
/// pseudo-observations. `template` supplies every setting but the bandwidth.
pub fn cv_copula(
    sample: &CopulaSample,
    template: &LocalFitConfig,
    candidates: &[f64],
) -> Result<BandwidthChoice> {
    BandwidthGrid::copula_only(candidates.to_vec()).validate()?;
    let values = par::map_slice(candidates, |&h| {
        let mut cfg = *template;
        cfg.kernel.bandwidth = h;
        loo_criterion(sample, &cfg)
    });
    let table = candidates
        .iter()
        .zip(values)
        .map(|(&h, value)| CriterionEntry {
            h_margin1: None,
            h_margin2: None,
            h_copula: h,
            value,
        })
        .collect();
    pick(table)
}

/// Cross-validated copula bandwidth under Weibull margins.
pub fn cv_parametric(
    data: &[Observation],
    margins: (&WeibullFit, &WeibullFit),
    family: CopulaFamily,
    grid: &BandwidthGrid,
) -> Result<BandwidthChoice> {
    grid.validate()?;
    let fitted = FittedMargins {
        spec: MarginSpec::Weibull,
        first: FittedMargin::Weibull(*margins.0),
        second: FittedMargin::Weibull(*margins.1),
    };
    let sample = CopulaSample::from_margins(data, &fitted)?;
    cv_copula(&sample, &LocalFitConfig::new(family, 1.0), &grid.copula)
}

/// Joint search over margin and copula bandwidths under Beran margins.
///
/// Margins are fitted once per `(h1, h2)` on the full data; only the copula
/// fit leaves cluster `i` out.
pub fn cv_joint(
    data: &[Observation],
    family: CopulaFamily,
    grid: &BandwidthGrid,
) -> Result<BandwidthChoice> {
    cv_joint_with(data, &LocalFitConfig::new(family, 1.0), grid)
}

/// [`cv_joint`] with every local fit setting but the bandwidth taken from
/// `template`.
pub fn cv_joint_with(
    data: &[Observation],
    template: &LocalFitConfig,
    grid: &BandwidthGrid,
) -> Result<BandwidthChoice> {
    grid.validate()?;
    let (g1, g2) = grid
        .margins
        .as_ref()
        .ok_or(Error::InvalidArgument("cv_joint needs margin grids".into()))?;
    let mut cells = Vec::new();
    for &h1 in g1 {
        for &h2 in g2 {
            for &hc in &grid.copula {
                cells.push((h1, h2, hc));
            }
        }
    }
    let pairs: Vec<(f64, f64)> = g1
        .iter()
        .flat_map(|&h1| g2.iter().map(move |&h2| (h1, h2)))
        .collect();
    let samples: Vec<Option<CopulaSample>> = par::map_slice(&pairs, |&(h1, h2)| {
        fit_margins(data, &MarginSpec::Beran { h1, h2 })
            .and_then(|m| CopulaSample::from_margins(data, &m))
            .ok()
    });
    let nc = grid.copula.len();
    let values = par::map_range(cells.len(), |c| {
        let sample = match &samples[c / nc] {
            Some(s) => s,
            None => return f64::NEG_INFINITY,
        };
        let mut cfg = *template;
        cfg.kernel.bandwidth = cells[c].2;
        loo_criterion(sample, &cfg)
    });
    let table = cells
        .iter()
        .zip(values)
        .map(|(&(h1, h2, hc), value)| CriterionEntry {
            h_margin1: Some(h1),
            h_margin2: Some(h2),
            h_copula: hc,
            value,
        })
        .collect();
    pick(table)
}

/// Mean squared distance between Beran estimates and a known conditional
/// survival function over the observed `(time, covariate)` points.
pub fn beran_oracle_mse<F: Fn(f64, f64) -> f64>(
    margin: &[(f64, bool, f64)],
    truth: &F,
    bandwidth: f64,
) -> Result<f64> {
    let sorted = SortedMargin::new(margin);
    let k = KernelSpec::epanechnikov(bandwidth);
    let mut total = 0.0;
    for &(t, _, x) in margin {
        let c = sorted.curve(x, &k)?;
        let d = c.curve.eval(t) - truth(t, x);
        total += d * d;
    }
    Ok(total / margin.len() as f64)
}

/// Beran bandwidth closest to the truth in mean squared error; ties go to
/// the smallest candidate.
pub fn oracle_beran_bandwidth<F: Fn(f64, f64) -> f64 + Sync>(
    margin: &[(f64, bool, f64)],
    truth: F,
    candidates: &[f64],
) -> Result<f64> {
    if margin.is_empty() {
        return Err(Error::EmptyInput("oracle_beran_bandwidth"));
    }
    BandwidthGrid::copula_only(candidates.to_vec()).validate()?;
    let scores = par::map_slice(candidates, |&h| {
        beran_oracle_mse(margin, &truth, h).unwrap_or(f64::INFINITY)
    });
    let mut best: Option<(f64, f64)> = None;
    for (&h, &s) in candidates.iter().zip(&scores) {
        best = match best {
            Some((bh, bs)) if bs < s || (bs == s && bh <= h) => Some((bh, bs)),
            _ => Some((h, s)),
        };
    }
    Ok(best.expect("nonempty candidates").0)
}
