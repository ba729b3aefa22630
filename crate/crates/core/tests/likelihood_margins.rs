mod common;

use common::{param, pseudo_sample, random_survival};
use condcop::beran::{beran_eval, beran_inverse, km_conditional_sample, SortedMargin};
use condcop::data::margin_data;
use condcop::sim::{CensoringLevel, Scenario, TauShape};
use condcop::weibull::weibull_gradient;
use condcop::{
    beran_fit, fit_constant, fit_weibull, generate_dataset, km_fit, loglik_contrib,
    total_loglik, weibull_loglik, CopulaFamily, KernelSpec, MarginKind, Member,
    PseudoObservation, RandomStream, WeibullFit,
};

#[test]
fn loglik_hand_values() {
    let g = param(CopulaFamily::Gumbel, 1.0);
    assert!(loglik_contrib(&g, &PseudoObservation::new(0.3, 0.7, true, true)).abs() < 1e-12);
    let v = loglik_contrib(&g, &PseudoObservation::new(0.3, 0.7, false, false));
    assert!((v - 0.21f64.ln()).abs() < 1e-12);
    let c = param(CopulaFamily::Clayton, 2.0);
    let v = loglik_contrib(&c, &PseudoObservation::new(0.5, 0.5, true, false));
    assert!((v - (8.0 * 7f64.powf(-1.5)).ln()).abs() < 1e-12);
}

#[test]
fn loglik_is_exchangeable_and_additive() {
    for p in common::reference_params() {
        let data = pseudo_sample(&p, 200, 3, 0.6);
        for o in &data {
            let a = loglik_contrib(&p, o);
            let b = loglik_contrib(&p, &o.swapped());
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{p:?}");
        }
        let single = total_loglik(&p, &data[..1]).unwrap();
        assert_eq!(single, loglik_contrib(&p, &data[0]));
        let doubled: Vec<_> = data.iter().chain(&data).copied().collect();
        let t = total_loglik(&p, &data).unwrap();
        assert!((total_loglik(&p, &doubled).unwrap() - 2.0 * t).abs() < 1e-9 * t.abs());
    }
    assert!(total_loglik(&param(CopulaFamily::Frank, 1.0), &[]).is_err());
}

#[test]
fn eta_derivative_matches_difference() {
    // The derivative in eta computed by Richardson extrapolation must agree
    // with a plain central difference at tolerance 1e-5.
    let mut rng = RandomStream::new(77);
    for family in CopulaFamily::ALL {
        let truth = family.theta_from_tau(0.4).unwrap();
        let data = pseudo_sample(&truth, 300, 5, 0.5);
        for _ in 0..5 {
            let eta = truth.eta() + rng.uniform_in(-0.5, 0.5);
            let f = |e: f64| total_loglik(&family.link_inv(e), &data).unwrap();
            let d = |h: f64| (f(eta + h) - f(eta - h)) / (2.0 * h);
            let richardson = (4.0 * d(1e-3) - d(2e-3)) / 3.0;
            let central = d(1e-5);
            assert!((richardson - central).abs() < 1e-5 * richardson.abs().max(1.0), "{family}");
        }
    }
}

#[test]
fn grid_search_oracle_for_clayton() {
    let p = param(CopulaFamily::Clayton, 3.0);
    let data = pseudo_sample(&p, 1000, 8, 0.0);
    let (best, _) = (0..=20)
        .map(|k| 2.0 + 0.1 * k as f64)
        .map(|t| (t, total_loglik(&param(CopulaFamily::Clayton, t), &data).unwrap()))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    assert!((best - 3.0).abs() <= 0.3, "{best}");
    let fit = fit_constant(CopulaFamily::Clayton, &data, None).unwrap();
    assert!((fit.theta0.theta() - best).abs() <= 0.1);
}

#[test]
fn constant_fit_recovers_gumbel() {
    let p = param(CopulaFamily::Gumbel, 2.0);
    let data = pseudo_sample(&p, 2000, 9, 0.0);
    let fit = fit_constant(CopulaFamily::Gumbel, &data, None).unwrap();
    assert!(fit.converged);
    assert!((fit.theta0.theta() - 2.0).abs() < 0.15, "{fit:?}");
    for init in [-1.0, 0.0, 1.0] {
        let other = fit_constant(CopulaFamily::Gumbel, &data, Some(init)).unwrap();
        assert!((other.eta() - fit.eta()).abs() < 1e-6, "{init}");
    }
}

#[test]
fn constant_fit_on_scenario_data() {
    let s = Scenario {
        tau_shape: TauShape::Constant,
        family: CopulaFamily::Clayton,
        n: 250,
        censoring: CensoringLevel::None,
        margin_kind: MarginKind::Weibull,
        seed: 0,
    };
    let data = generate_dataset(&s, &mut RandomStream::new(21)).unwrap();
    let truth = Scenario::event_margin();
    let pseudo: Vec<_> = data
        .iter()
        .map(|o| {
            PseudoObservation::new(
                truth.survival(o.y1, o.x).unwrap(),
                truth.survival(o.y2, o.x).unwrap(),
                o.d1,
                o.d2,
            )
        })
        .collect();
    let fit = fit_constant(CopulaFamily::Clayton, &pseudo, None).unwrap();
    assert!((fit.theta0.tau() - 0.6).abs() < 0.08, "{}", fit.theta0.tau());
}

#[test]
fn all_censored_at_the_corner_is_finite() {
    let data = vec![PseudoObservation::new(1.0 - 1e-10, 1.0 - 1e-10, false, false); 30];
    for family in CopulaFamily::ALL {
        let fit = fit_constant(family, &data, None).unwrap();
        assert!(fit.loglik.is_finite() && fit.eta().is_finite(), "{family}");
    }
}

#[test]
fn weibull_hand_values() {
    let w = WeibullFit::with_params(0.5, 1.5, 0.8).unwrap();
    assert!((w.survival(1.0, 0.0).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
    assert!((w.survival(1.0, 1.0).unwrap() - 0.328_647_193).abs() < 1e-8);
    assert!((w.survival(1e-12, 3.0).unwrap() - 1.0).abs() < 1e-9);
    assert!((w.inverse_survival((-0.5f64).exp(), 0.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((w.inverse_survival(0.5, 2.0).unwrap() - 0.427_880_857).abs() < 1e-8);
    let mut rng = RandomStream::new(4);
    for _ in 0..100 {
        let u = rng.uniform();
        let x = rng.uniform_in(-2.0, 5.0);
        let t = w.inverse_survival(u, x).unwrap();
        assert!((w.survival(t, x).unwrap() - u).abs() < 1e-9);
    }
}

#[test]
fn weibull_survival_monotone() {
    let up = WeibullFit::with_params(0.5, 1.5, 0.8).unwrap();
    let down = WeibullFit::with_params(0.5, 1.5, -0.8).unwrap();
    for k in 1..50 {
        let t = 0.1 * k as f64;
        assert!(up.survival(t + 0.1, 1.0).unwrap() < up.survival(t, 1.0).unwrap());
        assert!(up.survival(t, 1.1).unwrap() < up.survival(t, 1.0).unwrap());
        assert!(down.survival(t, 1.1).unwrap() > down.survival(t, 1.0).unwrap());
    }
}

fn weibull_margin(seed: u64) -> Vec<(f64, bool, f64)> {
    let s = Scenario {
        tau_shape: TauShape::Constant,
        family: CopulaFamily::Clayton,
        n: 2000,
        censoring: CensoringLevel::Low,
        margin_kind: MarginKind::Weibull,
        seed,
    };
    let data = generate_dataset(&s, &mut RandomStream::new(seed)).unwrap();
    margin_data(&data, Member::First)
}

#[test]
fn weibull_gradient_matches_difference() {
    let data = weibull_margin(1);
    let mut rng = RandomStream::new(12);
    for _ in 0..5 {
        let p = [rng.uniform_in(-1.5, 0.0), rng.uniform_in(0.0, 0.8), rng.uniform_in(0.3, 1.2)];
        let g = weibull_gradient(&data, p);
        for j in 0..3 {
            let h = 1e-5;
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let fd = (weibull_loglik(&data, a) - weibull_loglik(&data, b)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-5 * g[j].abs().max(1.0), "{j}: {fd} vs {}", g[j]);
        }
    }
}

#[test]
fn weibull_recovers_parameters() {
    for seed in 0..20 {
        let fit = fit_weibull(&weibull_margin(seed)).unwrap();
        assert!(fit.converged && fit.identifiable);
        for (est, truth, se) in [
            (fit.lambda, 0.5, fit.se[0]),
            (fit.rho, 1.5, fit.se[1]),
            (fit.beta, 0.8, fit.se[2]),
        ] {
            assert!((est - truth).abs() < 3.0 * se, "seed {seed}: {est} vs {truth} (se {se})");
        }
    }
}

#[test]
fn weibull_constant_covariate_is_unidentified() {
    let margin: Vec<_> = weibull_margin(3).into_iter().map(|(t, d, _)| (t, d, 1.0)).collect();
    let fit = fit_weibull(&margin).unwrap();
    assert!(!fit.identifiable);
    assert!(fit.se[2].is_infinite());
}

#[test]
fn beran_equals_km_with_common_covariate() {
    for seed in 0..50 {
        let data = random_survival(5 + (seed as usize % 20), seed, false);
        for member in Member::BOTH {
            let m = margin_data(&data, member);
            let b = beran_fit(&m, 0.5, &KernelSpec::epanechnikov(0.7)).unwrap();
            let pairs: Vec<_> = m.iter().map(|&(t, d, _)| (t, d)).collect();
            let k = km_fit(&pairs).unwrap();
            assert_eq!(b.jump_times(), k.jump_times());
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(b.values()), bits(k.values()), "seed {seed}");
        }
    }
}

#[test]
fn beran_curves_are_monotone_and_invertible() {
    for seed in 0..20 {
        let data = random_survival(60, seed, true);
        let sorted = SortedMargin::new(&margin_data(&data, Member::First));
        for x0 in [0.0, 0.3, 0.9] {
            let c = sorted.curve(x0, &KernelSpec::epanechnikov(0.4)).unwrap();
            let v = c.values();
            assert!(v.windows(2).all(|w| w[1] <= w[0]));
            assert!(v.iter().all(|&s| (0.0..=1.0).contains(&s)));
            for k in 1..100 {
                let u = k as f64 / 100.0;
                if u > c.curve.min_value() {
                    assert!(beran_eval(&c, beran_inverse(&c, u)) <= u);
                }
            }
        }
    }
}

#[test]
fn conditional_km_draws_follow_truncated_masses() {
    let data: Vec<(f64, bool)> = random_survival(80, 5, true)
        .iter()
        .map(|o| (o.y1, o.d1))
        .collect();
    let km = km_fit(&data).unwrap();
    let lower = 1.5;
    let mut rng = RandomStream::new(99);
    let draws: Vec<f64> = (0..10_000).map(|_| km_conditional_sample(&km, lower, &mut rng)).collect();
    assert!(draws.iter().all(|&t| t > lower));
    // Oracle: renormalized jump masses above `lower`, residual at infinity.
    let s_lower = km.curve.eval(lower);
    let mut prev = 1.0;
    let mut cdf_points = Vec::new();
    let mut acc = 0.0;
    for (&t, &v) in km.jump_times().iter().zip(km.values()) {
        let mass = prev - v;
        prev = v;
        if t > lower {
            acc += mass / s_lower;
            cdf_points.push((t, acc));
        }
    }
    let n = draws.len() as f64;
    let ks = cdf_points
        .iter()
        .map(|&(t, f)| (draws.iter().filter(|&&d| d <= t).count() as f64 / n - f).abs())
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "{ks}");
}
