#![allow(dead_code)]

use condcop::{CopulaFamily, CopulaParam, Observation, PseudoObservation, RandomStream};

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like start, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((0.5 * (1.0 - z), 0.5 * w));
    }
    out
}

pub fn param(family: CopulaFamily, theta: f64) -> CopulaParam {
    CopulaParam::new(family, theta).unwrap()
}

/// The parameter set used across the analytic checks.
pub fn reference_params() -> Vec<CopulaParam> {
    vec![
        param(CopulaFamily::Clayton, 0.5),
        param(CopulaFamily::Clayton, 3.0),
        param(CopulaFamily::Frank, -4.0),
        param(CopulaFamily::Frank, 4.0),
        param(CopulaFamily::Gumbel, 1.5),
        param(CopulaFamily::Gumbel, 3.0),
    ]
}

/// Complete and censored pseudo-observations from a constant copula.
pub fn pseudo_sample(p: &CopulaParam, n: usize, seed: u64, censor: f64) -> Vec<PseudoObservation> {
    let mut rng = RandomStream::new(seed);
    (0..n)
        .map(|_| {
            let u = p.sample_pair(&mut rng);
            let v1 = censor * rng.uniform();
            let v2 = censor * rng.uniform();
            PseudoObservation::new(u.u1().max(v1), u.u2().max(v2), u.u1() >= v1, u.u2() >= v2)
        })
        .collect()
}

/// Survival data with independent uniform censoring and covariates in [0, 1].
pub fn random_survival(n: usize, seed: u64, distinct_x: bool) -> Vec<Observation> {
    let mut rng = RandomStream::new(seed);
    (0..n)
        .map(|_| {
            let x = if distinct_x { rng.uniform() } else { 0.5 };
            // Coarse times so ties occur.
            let y1 = (rng.uniform() * 10.0).ceil() / 2.0;
            let y2 = (rng.uniform() * 10.0).ceil() / 2.0;
            Observation::new(y1, y2, rng.uniform() < 0.7, rng.uniform() < 0.6, x).unwrap()
        })
        .collect()
}

pub fn scenario(
    tau_shape: condcop::TauShape,
    n: usize,
    censoring: condcop::CensoringLevel,
    margin_kind: condcop::MarginKind,
) -> condcop::Scenario {
    condcop::Scenario {
        tau_shape,
        family: CopulaFamily::Clayton,
        n,
        censoring,
        margin_kind,
        seed: 0,
    }
}

/// Simulated data with fitted Weibull margins and their pseudo-observations.
pub fn weibull_sample(
    s: &condcop::Scenario,
    seed: u64,
) -> (Vec<Observation>, condcop::FittedMargins, condcop::CopulaSample) {
    let data = condcop::generate_dataset(s, &mut RandomStream::new(seed)).unwrap();
    let margins = condcop::fit_margins(&data, &condcop::MarginSpec::Weibull).unwrap();
    let sample = condcop::CopulaSample::from_margins(&data, &margins).unwrap();
    (data, margins, sample)
}
