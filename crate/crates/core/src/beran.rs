//! Nonparametric margins: kernel weights, Beran's conditional product-limit
//! estimator and the plain Kaplan-Meier estimator.
//!
//! Both estimators share one weighted product-limit routine. Observations
//! are sorted by time with events ahead of censorings at ties, and the risk
//! set at `t` contains every observation with time `>= t`.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Kernel shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `0.75 (1 - u^2)` on `[-1, 1]`.
    Epanechnikov,
    /// `0.5` on `[-1, 1]`; with a bandwidth covering the data every weight
    /// is identical, which gives the global (unweighted) fit.
    Uniform,
}

/// A kernel with its bandwidth, in covariate units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn epanechnikov(bandwidth: f64) -> Self {
        Self {
            kind: KernelKind::Epanechnikov,
            bandwidth,
        }
    }

    pub fn uniform(bandwidth: f64) -> Self {
        Self {
            kind: KernelKind::Uniform,
            bandwidth,
        }
    }

    /// Kernel value `K(u)`.
    #[inline]
    pub fn profile(&self, u: f64) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelKind::Uniform => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// Scaled kernel `K_h(d) = K(d / h) / h`.
    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        self.profile(d / self.bandwidth) / self.bandwidth
    }

    fn check(&self) -> Result<()> {
        if self.bandwidth > 0.0 && self.bandwidth.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "bandwidth",
                value: self.bandwidth,
            })
        }
    }
}

/// Normalized kernel weights `K_h(x_i - x0) / sum_j K_h(x_j - x0)`.
pub fn kernel_weights(xs: &[f64], x0: f64, k: &KernelSpec) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("kernel_weights"));
    }
    k.check()?;
    let raw: Vec<f64> = xs.iter().map(|&x| k.eval(x - x0)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyNeighborhood {
            x0,
            bandwidth: k.bandwidth,
        });
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Right-continuous step function starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub jump_times: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepCurve {
    /// Value at `t` (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit at `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&s| s < t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Average of left and right limits at `t`.
    pub fn eval_mid(&self, t: f64) -> f64 {
        0.5 * (self.eval_left(t) + self.eval(t))
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(1.0)
    }

    /// Generalized inverse `inf { t : S(t) <= u }`.
    ///
    /// The second element is true when the curve never reaches `u`, in which
    /// case the largest jump time is returned, or infinity for a flat curve.
    pub fn inverse_flagged(&self, u: f64) -> (f64, bool) {
        // values are nonincreasing, so `> u` holds on a prefix.
        let idx = self.values.partition_point(|&v| v > u);
        match self.jump_times.get(idx) {
            Some(&t) => (t, false),
            None => (self.jump_times.last().copied().unwrap_or(f64::INFINITY), true),
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        self.inverse_flagged(u).0
    }
}

/// Beran's estimate of `S(t | anchor_x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeranCurve {
    pub curve: StepCurve,
    pub anchor_x: f64,
    pub bandwidth: f64,
}

impl BeranCurve {
    pub fn jump_times(&self) -> &[f64] {
        &self.curve.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.curve.values
    }
}

/// Kaplan-Meier estimate of a survival function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmCurve {
    pub curve: StepCurve,
    /// True iff the last value is zero (no residual mass beyond the last jump).
    pub proper: bool,
}

impl KmCurve {
    pub fn jump_times(&self) -> &[f64] {
        &self.curve.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.curve.values
    }
}

pub fn beran_eval(curve: &BeranCurve, t: f64) -> f64 {
    curve.curve.eval(t)
}

pub fn beran_inverse(curve: &BeranCurve, u: f64) -> f64 {
    curve.curve.inverse(u)
}

fn time_order(a: (f64, bool), b: (f64, bool)) -> Ordering {
    // Events (true) precede censorings at tied times.
    a.0.total_cmp(&b.0).then(b.1.cmp(&a.1))
}

/// Weighted product-limit estimator over pre-sorted data.
fn product_limit(ys: &[f64], ds: &[bool], ws: &[f64]) -> StepCurve {
    let n = ys.len();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = ws[i] + suffix[i + 1];
    }
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut s = 1.0;
    let mut i = 0;
    while i < n {
        let t = ys[i];
        let mut j = i;
        while j < n && ys[j] == t {
            j += 1;
        }
        // Events come first within the group; sum them back to front so a
        // final all-event group gives exactly d == risk.
        let ev_end = (i..j).find(|&m| !ds[m]).unwrap_or(j);
        let d = (i..ev_end).rev().fold(0.0, |acc, m| ws[m] + acc);
        if d > 0.0 {
            let risk = if ev_end == j && j == n { d } else { suffix[i] };
            s *= 1.0 - d / risk;
            if s < 0.0 {
                s = 0.0;
            }
            jump_times.push(t);
            values.push(s);
        }
        i = j;
    }
    StepCurve { jump_times, values }
}

/// Margin data sorted once for repeated Beran fits at different anchors.
#[derive(Debug, Clone)]
pub struct SortedMargin {
    ys: Vec<f64>,
    ds: Vec<bool>,
    xs: Vec<f64>,
}

impl SortedMargin {
    pub fn new(data: &[(f64, bool, f64)]) -> Self {
        let mut rows = data.to_vec();
        rows.sort_by(|a, b| time_order((a.0, a.1), (b.0, b.1)));
        Self {
            ys: rows.iter().map(|r| r.0).collect(),
            ds: rows.iter().map(|r| r.1).collect(),
            xs: rows.iter().map(|r| r.2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Beran curve at `x0`.
    pub fn curve(&self, x0: f64, k: &KernelSpec) -> Result<BeranCurve> {
        if self.is_empty() {
            return Err(Error::EmptyInput("beran_fit"));
        }
        k.check()?;
        let mut ws: Vec<f64> = self.xs.iter().map(|&x| k.eval(x - x0)).collect();
        let wmax = ws.iter().copied().fold(0.0, f64::max);
        if wmax <= 0.0 {
            return Err(Error::EmptyNeighborhood {
                x0,
                bandwidth: k.bandwidth,
            });
        }
        // The estimator is scale-free in the weights; dividing by the maximum
        // makes identical weights exactly 1, matching Kaplan-Meier bitwise.
        for w in &mut ws {
            *w /= wmax;
        }
        Ok(BeranCurve {
            curve: product_limit(&self.ys, &self.ds, &ws),
            anchor_x: x0,
            bandwidth: k.bandwidth,
        })
    }
}

/// Beran's conditional Kaplan-Meier estimator at covariate value `x0`.
pub fn beran_fit(data: &[(f64, bool, f64)], x0: f64, k: &KernelSpec) -> Result<BeranCurve> {
    SortedMargin::new(data).curve(x0, k)
}

/// Kaplan-Meier estimator from `(time, event)` pairs.
pub fn km_fit(data: &[(f64, bool)]) -> Result<KmCurve> {
    if data.is_empty() {
        return Err(Error::EmptyInput("km_fit"));
    }
    let mut rows = data.to_vec();
    rows.sort_by(|a, b| time_order(*a, *b));
    let ys: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ds: Vec<bool> = rows.iter().map(|r| r.1).collect();
    let ws = vec![1.0; ys.len()];
    let curve = product_limit(&ys, &ds, &ws);
    let proper = curve.min_value() == 0.0;
    Ok(KmCurve { curve, proper })
}

/// Draws from the Kaplan-Meier distribution conditioned on exceeding `lower`.
///
/// Returns `f64::INFINITY` when the draw falls in the residual mass of an
/// improper curve, or when no mass remains above `lower`.
pub fn km_conditional_sample(curve: &KmCurve, lower: f64, rng: &mut RandomStream) -> f64 {
    let above = curve.curve.eval(lower);
    if above <= 0.0 {
        return f64::INFINITY;
    }
    let level = rng.uniform() * above;
    let times = &curve.curve.jump_times;
    let values = &curve.curve.values;
    let start = times.partition_point(|&t| t <= lower);
    let offset = values[start..].partition_point(|&v| v > level);
    match times.get(start + offset) {
        Some(&t) => t,
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_data(x: f64) -> Vec<(f64, bool, f64)> {
        vec![(1.0, true, x), (2.0, false, x), (3.0, true, x)]
    }

    #[test]
    fn epanechnikov_weights() {
        let w = kernel_weights(&[0.0, 0.5, 1.0], 0.5, &KernelSpec::epanechnikov(1.0)).unwrap();
        for (a, b) in w.iter().zip([0.3, 0.4, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = kernel_weights(&[0.0, 1.0], 0.0, &KernelSpec::epanechnikov(0.5)).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
        let w = kernel_weights(&[2.0; 4], 2.0, &KernelSpec::epanechnikov(0.3)).unwrap();
        assert!(w.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn empty_neighborhood_is_an_error() {
        let err = kernel_weights(&[0.0, 1.0], 5.0, &KernelSpec::epanechnikov(0.5)).unwrap_err();
        assert!(matches!(err, Error::EmptyNeighborhood { .. }));
        assert!(beran_fit(&hand_data(0.0), 5.0, &KernelSpec::epanechnikov(0.5)).is_err());
        assert!(kernel_weights(&[], 0.0, &KernelSpec::epanechnikov(0.5)).is_err());
        assert!(kernel_weights(&[0.0], 0.0, &KernelSpec::epanechnikov(0.0)).is_err());
    }

    #[test]
    fn beran_hand_example() {
        let c = beran_fit(&hand_data(1.0), 1.0, &KernelSpec::epanechnikov(1.0)).unwrap();
        assert!((beran_eval(&c, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((beran_eval(&c, 2.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(beran_eval(&c, 3.0), 0.0);
        assert_eq!(beran_eval(&c, 0.0), 1.0);
        assert_eq!(beran_eval(&c, 10.0), 0.0);
        assert_eq!(beran_inverse(&c, 0.5), 3.0);
        assert_eq!(beran_inverse(&c, 0.9), 1.0);
        assert_eq!(beran_inverse(&c, 0.99), 1.0);
    }

    #[test]
    fn no_events_gives_flat_curve() {
        let data = vec![(1.0, false, 0.0), (2.0, false, 0.0)];
        let c = beran_fit(&data, 0.0, &KernelSpec::epanechnikov(1.0)).unwrap();
        assert!(c.jump_times().is_empty());
        assert_eq!(beran_eval(&c, 5.0), 1.0);
        assert_eq!(c.curve.inverse_flagged(0.5), (f64::INFINITY, true));
    }

    #[test]
    fn inverse_below_minimum_returns_last_jump() {
        let data = vec![(1.0, true, 0.0), (2.0, true, 0.0), (3.0, false, 0.0)];
        let c = beran_fit(&data, 0.0, &KernelSpec::epanechnikov(1.0)).unwrap();
        assert!((c.curve.min_value() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.curve.inverse_flagged(0.1), (2.0, true));
    }

    #[test]
    fn km_matches_beran_with_common_covariate() {
        let b = beran_fit(&hand_data(0.7), 0.7, &KernelSpec::epanechnikov(0.2)).unwrap();
        let k = km_fit(&[(1.0, true), (2.0, false), (3.0, true)]).unwrap();
        assert_eq!(b.curve, k.curve);
        assert!(k.proper);
    }

    #[test]
    fn ties_put_events_first() {
        // Censoring at t = 2 stays in the risk set of the event at t = 2.
        let k = km_fit(&[(2.0, false), (2.0, true), (3.0, true)]).unwrap();
        assert_eq!(k.jump_times(), &[2.0, 3.0]);
        assert!((k.values()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn improper_curve_detected() {
        let k = km_fit(&[(1.0, true), (2.0, false)]).unwrap();
        assert!(!k.proper);
        assert_eq!(k.curve.min_value(), 0.5);
    }

    #[test]
    fn conditional_sample_edge_cases() {
        let mut rng = RandomStream::new(3);
        let point = km_fit(&[(5.0, true)]).unwrap();
        for _ in 0..100 {
            assert_eq!(km_conditional_sample(&point, 1.0, &mut rng), 5.0);
        }
        assert_eq!(km_conditional_sample(&point, 5.0, &mut rng), f64::INFINITY);
        assert_eq!(km_conditional_sample(&point, 7.0, &mut rng), f64::INFINITY);
        let improper = km_fit(&[(1.0, true), (4.0, false)]).unwrap();
        for _ in 0..50 {
            assert_eq!(km_conditional_sample(&improper, 2.0, &mut rng), f64::INFINITY);
        }
    }

    #[test]
    fn km_requires_data() {
        assert!(km_fit(&[]).is_err());
    }
}
