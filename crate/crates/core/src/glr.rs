//! Generalized likelihood ratio test of a constant calibration function,
//! with bootstrap p-values under parametric or Beran margins.

use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthChoice;
use crate::beran::{km_conditional_sample, km_fit, KmCurve};
use crate::censored::{fit_constant, loglik_contrib, ConstantFit};
use crate::copula::CopulaParam;
use crate::data::{Member, Observation};
use crate::error::{Error, Result};
use crate::local::{fit_at_data, CopulaSample, LocalFitConfig};
use crate::margins::{fit_margins, FittedMargins, MarginSpec};
use crate::par;
use crate::rng::RandomStream;

/// Largest tolerated share of failed bootstrap replicates.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

/// How censoring times are regenerated in the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensoringScheme {
    /// One censoring time per cluster shared by both members.
    Univariate,
    /// A censoring time per member.
    NonUnivariate,
}

impl std::fmt::Display for CensoringScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CensoringScheme::Univariate => "univariate",
            CensoringScheme::NonUnivariate => "non-univariate",
        })
    }
}

impl std::str::FromStr for CensoringScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "univariate" => Ok(CensoringScheme::Univariate),
            "non-univariate" | "nonunivariate" => Ok(CensoringScheme::NonUnivariate),
            other => Err(Error::InvalidArgument(format!("unknown censoring scheme `{other}`"))),
        }
    }
}

/// The statistic with both of its fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrStatistic {
    pub lambda: f64,
    pub null: ConstantFit,
    /// `sum_i l(theta_h(X_i), U_i)`.
    pub alternative_loglik: f64,
}

/// GLR statistic on fixed pseudo-observations.
pub fn glr_from_sample(sample: &CopulaSample, cfg: &LocalFitConfig) -> Result<GlrStatistic> {
    let null = fit_constant(cfg.family, &sample.pseudo, None)?;
    let fits = fit_at_data(sample, cfg);
    let mut alt = 0.0;
    for (i, fit) in fits.into_iter().enumerate() {
        let fit = fit?;
        alt += loglik_contrib(&cfg.family.link_inv(fit.eta), &sample.pseudo[i]);
    }
    Ok(GlrStatistic {
        lambda: alt - null.loglik,
        null,
        alternative_loglik: alt,
    })
}

/// GLR statistic for `data` under fitted margins.
pub fn glr_statistic(
    data: &[Observation],
    margins: &FittedMargins,
    cfg: &LocalFitConfig,
) -> Result<GlrStatistic> {
    glr_from_sample(&CopulaSample::from_margins(data, margins)?, cfg)
}

/// Censoring distributions estimated from the original data.
#[derive(Debug, Clone)]
pub enum CensoringModel {
    /// Kaplan-Meier curves of each member's censoring time.
    NonUnivariate([KmCurve; 2]),
    /// Kaplan-Meier curve of the cluster censoring time, built on
    /// `max(Y1, Y2)` with indicator `1 - d1 d2`.
    Univariate(KmCurve),
}

impl CensoringModel {
    pub fn new(data: &[Observation], scheme: CensoringScheme) -> Result<Self> {
        match scheme {
            CensoringScheme::NonUnivariate => {
                let curve = |m: Member| {
                    let pairs: Vec<(f64, bool)> =
                        data.iter().map(|o| (o.time(m), !o.event(m))).collect();
                    km_fit(&pairs)
                };
                Ok(CensoringModel::NonUnivariate([
                    curve(Member::First)?,
                    curve(Member::Second)?,
                ]))
            }
            CensoringScheme::Univariate => {
                let pairs: Vec<(f64, bool)> = data
                    .iter()
                    .map(|o| (o.y1.max(o.y2), !(o.d1 && o.d2)))
                    .collect();
                Ok(CensoringModel::Univariate(km_fit(&pairs)?))
            }
        }
    }

    pub fn scheme(&self) -> CensoringScheme {
        match self {
            CensoringModel::NonUnivariate(_) => CensoringScheme::NonUnivariate,
            CensoringModel::Univariate(_) => CensoringScheme::Univariate,
        }
    }

    /// Censoring times for cluster `o`; infinite when none applies.
    fn draw(&self, o: &Observation, rng: &mut RandomStream) -> [f64; 2] {
        match self {
            CensoringModel::NonUnivariate(curves) => {
                let mut c = [0.0; 2];
                for m in Member::BOTH {
                    let y = o.time(m);
                    c[m.index()] = if o.event(m) {
                        km_conditional_sample(&curves[m.index()], y, rng)
                    } else {
                        y
                    };
                }
                c
            }
            CensoringModel::Univariate(curve) => {
                let ymax = o.y1.max(o.y2);
                let c = if o.d1 && o.d2 {
                    km_conditional_sample(curve, ymax, rng)
                } else {
                    ymax
                };
                [c, c]
            }
        }
    }
}

/// One bootstrap sample.
#[derive(Debug, Clone)]
pub struct Resample {
    pub data: Vec<Observation>,
    /// Regenerated censoring times per cluster and member.
    pub censoring: Vec<[f64; 2]>,
    /// Beran inversions that fell below the estimated curve.
    pub inverse_fallbacks: usize,
}

/// Draws a bootstrap sample under the null copula `null`, keeping covariates.
pub fn bootstrap_resample(
    data: &[Observation],
    null: &CopulaParam,
    margins: &FittedMargins,
    censoring: &CensoringModel,
    rng: &mut RandomStream,
) -> Result<Resample> {
    let mut out = Vec::with_capacity(data.len());
    let mut cens = Vec::with_capacity(data.len());
    let mut fallbacks = 0;
    for (i, o) in data.iter().enumerate() {
        let u = null.sample_pair(rng);
        let (t1, f1) = margins.first.inverse(i, u.u1(), o.x)?;
        let (t2, f2) = margins.second.inverse(i, u.u2(), o.x)?;
        fallbacks += f1 as usize + f2 as usize;
        let c = censoring.draw(o, rng);
        out.push(Observation::new(
            t1.min(c[0]),
            t2.min(c[1]),
            t1 <= c[0],
            t2 <= c[1],
            o.x,
        )?);
        cens.push(c);
    }
    Ok(Resample {
        data: out,
        censoring: cens,
        inverse_fallbacks: fallbacks,
    })
}

/// Bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlrSetup {
    /// Local fit settings; the bandwidth is the selected copula bandwidth.
    pub local: LocalFitConfig,
    pub margins: MarginSpec,
    pub scheme: CensoringScheme,
    pub replicates: usize,
    pub seed: u64,
}

/// Outcome of the bootstrap test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlrResult {
    pub lambda_n: f64,
    /// Statistics of the successful replicates, in replicate order.
    pub boot_stats: Vec<f64>,
    pub p_value: f64,
    /// Requested number of replicates.
    pub replicates: usize,
    pub failed_replicates: usize,
    pub scheme: CensoringScheme,
    pub margins: MarginSpec,
    pub bandwidths: BandwidthChoice,
    pub null_theta: f64,
    pub null_tau: f64,
    pub inverse_fallbacks: usize,
}

/// Share of bootstrap statistics at least as large as `lambda`.
pub fn p_value_from(lambda: f64, boot: &[f64]) -> f64 {
    if boot.is_empty() {
        return f64::NAN;
    }
    boot.iter().filter(|&&l| l >= lambda).count() as f64 / boot.len() as f64
}

/// Bootstrap p-value of the GLR test of a constant calibration function.
///
/// Replicate `b` draws from its own stream `(seed, b)`, so the result does
/// not depend on the number of worker threads.
pub fn bootstrap_pvalue(
    data: &[Observation],
    setup: &GlrSetup,
    bandwidths: &BandwidthChoice,
) -> Result<GlrResult> {
    if setup.replicates == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
    }
    let margins = fit_margins(data, &setup.margins)?;
    let observed = glr_statistic(data, &margins, &setup.local)?;
    let censoring = CensoringModel::new(data, setup.scheme)?;
    let null = observed.null.theta0;

    let runs = par::map_range(setup.replicates, |b| -> Result<(f64, usize)> {
        let mut rng = RandomStream::derived(setup.seed, b as u64);
        let res = bootstrap_resample(data, &null, &margins, &censoring, &mut rng)?;
        let m = fit_margins(&res.data, &setup.margins)?;
        let stat = glr_statistic(&res.data, &m, &setup.local)?;
        if !stat.lambda.is_finite() {
            return Err(Error::Optimization("non-finite bootstrap statistic".into()));
        }
        Ok((stat.lambda, res.inverse_fallbacks))
    });

    let mut boot = Vec::with_capacity(setup.replicates);
    let mut failed = 0;
    let mut fallbacks = 0;
    for r in runs {
        match r {
            Ok((l, f)) => {
                boot.push(l);
                fallbacks += f;
            }
            Err(_) => failed += 1,
        }
    }
    if failed as f64 > MAX_FAILURE_SHARE * setup.replicates as f64 || boot.is_empty() {
        return Err(Error::TooManyFailures {
            failed,
            total: setup.replicates,
        });
    }
    Ok(GlrResult {
        lambda_n: observed.lambda,
        p_value: p_value_from(observed.lambda, &boot),
        boot_stats: boot,
        replicates: setup.replicates,
        failed_replicates: failed,
        scheme: setup.scheme,
        margins: setup.margins,
        bandwidths: bandwidths.clone(),
        null_theta: null.theta(),
        null_tau: null.tau(),
        inverse_fallbacks: fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_counts_ties() {
        assert_eq!(p_value_from(1.0, &[0.5, 1.0, 2.0, 0.1]), 0.5);
        assert_eq!(p_value_from(5.0, &[0.5, 1.0]), 0.0);
        assert!(p_value_from(1.0, &[]).is_nan());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(
            "non_univariate".parse::<CensoringScheme>().unwrap(),
            CensoringScheme::NonUnivariate
        );
        assert_eq!(CensoringScheme::Univariate.to_string(), "univariate");
        assert!("mixed".parse::<CensoringScheme>().is_err());
    }

    #[test]
    fn all_censored_keeps_observed_times() {
        let data: Vec<Observation> = (1..=20)
            .map(|i| Observation::new(i as f64, 0.5 * i as f64, false, false, i as f64 / 10.0).unwrap())
            .collect();
        let margins = fit_margins(&data, &MarginSpec::Beran { h1: 1.0, h2: 1.0 }).unwrap();
        let null = crate::copula::CopulaFamily::Clayton.link_inv(0.0);
        for scheme in [CensoringScheme::NonUnivariate, CensoringScheme::Univariate] {
            let model = CensoringModel::new(&data, scheme).unwrap();
            let res = bootstrap_resample(&data, &null, &margins, &model, &mut RandomStream::new(1))
                .unwrap();
            for (o, c) in data.iter().zip(&res.censoring) {
                match scheme {
                    CensoringScheme::NonUnivariate => assert_eq!(*c, [o.y1, o.y2]),
                    CensoringScheme::Univariate => assert_eq!(*c, [o.y1; 2]),
                }
            }
        }
    }
}
