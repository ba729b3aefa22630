//! Fitted conditional margins of both cluster members and the
//! pseudo-observations they induce.

use serde::{Deserialize, Serialize};

use crate::beran::{BeranCurve, KernelSpec, SortedMargin};
use crate::data::{margin_data, Member, Observation, PseudoObservation};
use crate::error::{Error, Result};
use crate::par;
use crate::weibull::{fit_weibull, WeibullFit};

/// How the conditional margins are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MarginSpec {
    /// Weibull proportional hazards, fitted by maximum likelihood.
    Weibull,
    /// Beran estimator with an Epanechnikov kernel per member.
    Beran { h1: f64, h2: f64 },
}

impl MarginSpec {
    pub fn kind(&self) -> MarginKind {
        match self {
            MarginSpec::Weibull => MarginKind::Weibull,
            MarginSpec::Beran { .. } => MarginKind::Beran,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginKind {
    Weibull,
    Beran,
}

impl std::fmt::Display for MarginKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MarginKind::Weibull => "weibull",
            MarginKind::Beran => "beran",
        })
    }
}

impl std::str::FromStr for MarginKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weibull" | "parametric" => Ok(MarginKind::Weibull),
            "beran" | "nonparametric" => Ok(MarginKind::Beran),
            other => Err(Error::InvalidArgument(format!("unknown margin kind `{other}`"))),
        }
    }
}

/// One fitted margin.
#[derive(Debug, Clone)]
pub enum FittedMargin {
    Weibull(WeibullFit),
    /// Beran curves anchored at each observed covariate, in data order.
    Beran {
        bandwidth: f64,
        curves: Vec<BeranCurve>,
    },
}

impl FittedMargin {
    /// Survival pseudo-value for observation `i` with time `t` and covariate `x`.
    fn pseudo_value(&self, i: usize, t: f64, x: f64) -> Result<f64> {
        match self {
            FittedMargin::Weibull(w) => w.survival(t, x),
            // Midpoint of the left and right limits keeps the last event off 0.
            FittedMargin::Beran { curves, .. } => Ok(curves[i].curve.eval_mid(t)),
        }
    }

    /// Inverse conditional survival at the covariate of observation `i`.
    ///
    /// The flag reports a Beran inversion below the curve's range.
    pub fn inverse(&self, i: usize, u: f64, x: f64) -> Result<(f64, bool)> {
        match self {
            FittedMargin::Weibull(w) => Ok((w.inverse_survival(u, x)?, false)),
            FittedMargin::Beran { curves, .. } => Ok(curves[i].curve.inverse_flagged(u)),
        }
    }

    pub fn weibull(&self) -> Option<&WeibullFit> {
        match self {
            FittedMargin::Weibull(w) => Some(w),
            FittedMargin::Beran { .. } => None,
        }
    }
}

/// Fitted margins for both members.
#[derive(Debug, Clone)]
pub struct FittedMargins {
    pub spec: MarginSpec,
    pub first: FittedMargin,
    pub second: FittedMargin,
}

impl FittedMargins {
    pub fn get(&self, member: Member) -> &FittedMargin {
        match member {
            Member::First => &self.first,
            Member::Second => &self.second,
        }
    }

    /// Pseudo-observations for the data the margins were fitted on.
    pub fn pseudo_observations(&self, data: &[Observation]) -> Result<Vec<PseudoObservation>> {
        data.iter()
            .enumerate()
            .map(|(i, o)| {
                let u1 = self.first.pseudo_value(i, o.y1, o.x)?;
                let u2 = self.second.pseudo_value(i, o.y2, o.x)?;
                Ok(PseudoObservation::new(u1, u2, o.d1, o.d2))
            })
            .collect()
    }
}

/// Beran curves of one member anchored at every observed covariate value.
pub fn beran_curves_at_data(
    data: &[Observation],
    member: Member,
    bandwidth: f64,
) -> Result<Vec<BeranCurve>> {
    let sorted = SortedMargin::new(&margin_data(data, member));
    let k = KernelSpec::epanechnikov(bandwidth);
    let xs: Vec<f64> = data.iter().map(|o| o.x).collect();
    par::map_slice(&xs, |&x| sorted.curve(x, &k))
        .into_iter()
        .collect()
}

fn fit_one(data: &[Observation], member: Member, spec: &MarginSpec) -> Result<FittedMargin> {
    match *spec {
        MarginSpec::Weibull => Ok(FittedMargin::Weibull(fit_weibull(&margin_data(
            data, member,
        ))?)),
        MarginSpec::Beran { h1, h2 } => {
            let bandwidth = match member {
                Member::First => h1,
                Member::Second => h2,
            };
            Ok(FittedMargin::Beran {
                bandwidth,
                curves: beran_curves_at_data(data, member, bandwidth)?,
            })
        }
    }
}

/// Fits both margins according to `spec`.
pub fn fit_margins(data: &[Observation], spec: &MarginSpec) -> Result<FittedMargins> {
    if data.is_empty() {
        return Err(Error::EmptyInput("fit_margins"));
    }
    Ok(FittedMargins {
        spec: *spec,
        first: fit_one(data, Member::First, spec)?,
        second: fit_one(data, Member::Second, spec)?,
    })
}
