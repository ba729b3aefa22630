//! Archimedean copula families used for the event-time dependence.
//!
//! Each family exposes its distribution function, the two partial
//! derivatives (h-functions), the density (canonically in log space), the
//! inverse link from the unconstrained calibration scale, and Kendall's tau
//! conversions. Frank's tau needs the first Debye function, which is
//! integrated numerically.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{find_root, integrate};
use crate::rng::RandomStream;

/// Pseudo-observations are clamped to `[EPS_U, 1 - EPS_U]` before any log.
pub const EPS_U: f64 = 1e-10;

/// Frank parameter used when the calibration value is exactly zero.
pub const FRANK_ZERO_SURROGATE: f64 = 1e-8;

/// Below this `|theta|` Frank quantities use a second-order expansion in theta.
const FRANK_TAYLOR_CUTOFF: f64 = 1e-5;

const DEBYE_TOL: f64 = 1e-10;

/// Supported one-parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Clayton,
    Frank,
    Gumbel,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 3] = [Self::Clayton, Self::Frank, Self::Gumbel];

    pub fn name(self) -> &'static str {
        match self {
            Self::Clayton => "clayton",
            Self::Frank => "frank",
            Self::Gumbel => "gumbel",
        }
    }

    /// Whether `theta` lies in the family's parameter space.
    pub fn admits(self, theta: f64) -> bool {
        theta.is_finite()
            && match self {
                Self::Clayton => theta > 0.0,
                Self::Frank => theta != 0.0,
                Self::Gumbel => theta >= 1.0,
            }
    }

    /// Inverse link `g^-1`: calibration value to copula parameter.
    pub fn link_inv(self, eta: f64) -> CopulaParam {
        let theta = match self {
            Self::Clayton => eta.exp(),
            Self::Frank => {
                if eta == 0.0 {
                    FRANK_ZERO_SURROGATE
                } else {
                    eta
                }
            }
            Self::Gumbel => eta.exp() + 1.0,
        };
        CopulaParam {
            family: self,
            theta,
        }
    }

    /// Forward link `g`: copula parameter to calibration value.
    pub fn link(self, theta: f64) -> f64 {
        match self {
            Self::Clayton => theta.ln(),
            Self::Frank => theta,
            Self::Gumbel => (theta - 1.0).ln(),
        }
    }

    /// Box on the calibration scale searched by the optimizers.
    ///
    /// The bounds correspond to |tau| of roughly 0.99 for Clayton and Gumbel
    /// and 0.89 for Frank, where the closed forms remain representable.
    pub fn eta_bounds(self) -> (f64, f64) {
        match self {
            Self::Clayton => (-12.0, 5.5),
            Self::Frank => (-35.0, 35.0),
            Self::Gumbel => (-12.0, 5.5),
        }
    }

    /// Attainable Kendall's tau range (open unless noted).
    pub fn tau_range(self) -> (f64, f64) {
        match self {
            Self::Clayton | Self::Gumbel => (0.0, 1.0),
            Self::Frank => (-1.0, 1.0),
        }
    }

    /// Inverse of [`CopulaParam::tau`].
    pub fn theta_from_tau(self, tau: f64) -> Result<CopulaParam> {
        let bad = || Error::Domain {
            what: "kendall's tau",
            value: tau,
        };
        if !tau.is_finite() {
            return Err(bad());
        }
        let theta = match self {
            Self::Clayton => {
                if tau <= 0.0 || tau >= 1.0 {
                    return Err(bad());
                }
                2.0 * tau / (1.0 - tau)
            }
            Self::Gumbel => {
                // tau = 0 is independence, which Gumbel attains at theta = 1.
                if !(0.0..1.0).contains(&tau) {
                    return Err(bad());
                }
                1.0 / (1.0 - tau)
            }
            Self::Frank => {
                if tau <= -1.0 || tau >= 1.0 || tau == 0.0 {
                    return Err(bad());
                }
                frank_theta_from_tau(tau)?
            }
        };
        CopulaParam::new(self, theta)
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clayton" => Ok(Self::Clayton),
            "frank" => Ok(Self::Frank),
            "gumbel" => Ok(Self::Gumbel),
            other => Err(Error::InvalidArgument(format!("unknown copula family `{other}`"))),
        }
    }
}

/// A family together with a parameter inside its parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaParam {
    family: CopulaFamily,
    theta: f64,
}

impl CopulaParam {
    pub fn new(family: CopulaFamily, theta: f64) -> Result<Self> {
        if family.admits(theta) {
            Ok(Self { family, theta })
        } else {
            Err(Error::ParameterDomain {
                family: family.name(),
                theta,
            })
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Calibration-scale value `g(theta)`.
    pub fn eta(&self) -> f64 {
        self.family.link(self.theta)
    }

    /// Kendall's tau implied by the parameter.
    pub fn tau(&self) -> f64 {
        let t = self.theta;
        match self.family {
            CopulaFamily::Clayton => t / (t + 2.0),
            CopulaFamily::Gumbel => 1.0 - 1.0 / t,
            CopulaFamily::Frank => {
                if t.abs() < FRANK_TAYLOR_CUTOFF {
                    t / 9.0 - t * t * t / 900.0
                } else {
                    1.0 + 4.0 / t * (debye1(t) - 1.0)
                }
            }
        }
    }

    /// Copula distribution function.
    pub fn cdf(&self, u: &UnitPair) -> f64 {
        if u.u1 <= 0.0 || u.u2 <= 0.0 {
            return 0.0;
        }
        if u.u1 >= 1.0 {
            return u.u2;
        }
        if u.u2 >= 1.0 {
            return u.u1;
        }
        self.log_cdf(u).exp()
    }

    /// Partial derivative of the distribution function with respect to
    /// coordinate `wrt` (1 or 2), i.e. the conditional distribution of the
    /// other coordinate.
    pub fn hfunc(&self, u: &UnitPair, wrt: Coordinate) -> f64 {
        let other = match wrt {
            Coordinate::First => u.u2,
            Coordinate::Second => u.u1,
        };
        if other <= 0.0 {
            return 0.0;
        }
        if other >= 1.0 {
            return 1.0;
        }
        self.log_hfunc(u, wrt).exp().min(1.0)
    }

    pub fn pdf(&self, u: &UnitPair) -> f64 {
        self.log_pdf(u).exp()
    }

    /// `ln C(u1, u2)` on the clamped coordinates.
    pub fn log_cdf(&self, u: &UnitPair) -> f64 {
        let t = self.theta;
        match self.family {
            CopulaFamily::Clayton => -clayton_log_a(t, u) / t,
            CopulaFamily::Gumbel => -gumbel_parts(t, u).w,
            CopulaFamily::Frank => frank_log_cdf(t, u),
        }
    }

    /// `ln dC/du_k` on the clamped coordinates.
    pub fn log_hfunc(&self, u: &UnitPair, wrt: Coordinate) -> f64 {
        let t = self.theta;
        let (lu_self, lu_other, u_self, u_other) = match wrt {
            Coordinate::First => (u.l1, u.l2, u.c1, u.c2),
            Coordinate::Second => (u.l2, u.l1, u.c2, u.c1),
        };
        match self.family {
            CopulaFamily::Clayton => {
                let la = clayton_log_a(t, u);
                -(t + 1.0) * lu_self - (1.0 / t + 1.0) * la
            }
            CopulaFamily::Gumbel => {
                let g = gumbel_parts(t, u);
                let lx_self = (-lu_self).ln();
                -g.w + (1.0 - t) * g.log_s / t + (t - 1.0) * lx_self - lu_self
            }
            CopulaFamily::Frank => frank_log_h(t, u_self, u_other, lu_other),
        }
    }

    /// `ln c(u1, u2)`, the canonical density primitive.
    pub fn log_pdf(&self, u: &UnitPair) -> f64 {
        let t = self.theta;
        match self.family {
            CopulaFamily::Clayton => {
                let la = clayton_log_a(t, u);
                t.ln_1p() - (t + 1.0) * (u.l1 + u.l2) - (2.0 + 1.0 / t) * la
            }
            CopulaFamily::Gumbel => {
                let g = gumbel_parts(t, u);
                let lx1 = (-u.l1).ln();
                let lx2 = (-u.l2).ln();
                -g.w - u.l1 - u.l2 + (t - 1.0) * (lx1 + lx2) + (1.0 / t - 2.0) * g.log_s
                    + (g.w + t - 1.0).ln()
            }
            CopulaFamily::Frank => frank_log_pdf(t, u),
        }
    }

    /// Inverse of the h-function with respect to the first coordinate:
    /// returns `u2` with `h(u2 | u1) = w`.
    pub fn hfunc_inverse(&self, u1: f64, w: f64) -> f64 {
        let u1 = u1.clamp(EPS_U, 1.0 - EPS_U);
        let w = w.clamp(EPS_U, 1.0 - EPS_U);
        let t = self.theta;
        let u2 = match self.family {
            CopulaFamily::Clayton => {
                // u2 = [ (w^(-t/(1+t)) - 1) u1^(-t) + 1 ]^(-1/t)
                let le = (-t / (1.0 + t) * w.ln()).exp_m1().ln();
                let lf = -t * u1.ln();
                let s = le + lf;
                let log_inner = if s > 30.0 {
                    s + (-s).exp().ln_1p()
                } else {
                    s.exp().ln_1p()
                };
                (-log_inner / t).exp()
            }
            CopulaFamily::Frank => {
                if t.abs() < 1e-12 {
                    w
                } else {
                    let b = (-t).exp_m1();
                    let a2 = w * b / (w + (1.0 - w) * (-t * u1).exp());
                    -a2.ln_1p() / t
                }
            }
            CopulaFamily::Gumbel => {
                let (mut lo, mut hi) = (EPS_U, 1.0 - EPS_U);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let h = self.hfunc(&UnitPair::new(u1, mid), Coordinate::First);
                    if h < w {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-10 {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        u2.clamp(EPS_U, 1.0 - EPS_U)
    }

    /// Draws a pair from the copula by the conditional-distribution method.
    pub fn sample_pair(&self, rng: &mut RandomStream) -> UnitPair {
        let u1 = rng.uniform();
        let w = rng.uniform();
        UnitPair::new(u1, self.hfunc_inverse(u1, w))
    }
}

/// Which argument a partial derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    First,
    Second,
}

/// A point of the unit square.
///
/// The raw coordinates (restricted to `[0, 1]`) are kept for exact boundary
/// evaluations of the distribution function; everything evaluated in log
/// space uses the copies clamped to `[EPS_U, 1 - EPS_U]`, whose logs are
/// cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    u1: f64,
    u2: f64,
    c1: f64,
    c2: f64,
    l1: f64,
    l2: f64,
}

impl UnitPair {
    pub fn new(u1: f64, u2: f64) -> Self {
        let u1 = if u1.is_nan() { 0.5 } else { u1.clamp(0.0, 1.0) };
        let u2 = if u2.is_nan() { 0.5 } else { u2.clamp(0.0, 1.0) };
        let c1 = u1.clamp(EPS_U, 1.0 - EPS_U);
        let c2 = u2.clamp(EPS_U, 1.0 - EPS_U);
        Self {
            u1,
            u2,
            c1,
            c2,
            l1: c1.ln(),
            l2: c2.ln(),
        }
    }

    /// Clamped first coordinate.
    pub fn u1(&self) -> f64 {
        self.c1
    }

    /// Clamped second coordinate.
    pub fn u2(&self) -> f64 {
        self.c2
    }

    pub fn raw(&self) -> (f64, f64) {
        (self.u1, self.u2)
    }

    pub fn swapped(&self) -> Self {
        Self {
            u1: self.u2,
            u2: self.u1,
            c1: self.c2,
            c2: self.c1,
            l1: self.l2,
            l2: self.l1,
        }
    }
}

/// `ln(u1^-t + u2^-t - 1)`, evaluated without overflow.
fn clayton_log_a(t: f64, u: &UnitPair) -> f64 {
    let a1 = -t * u.l1;
    let a2 = -t * u.l2;
    let m = a1.max(a2);
    if m < 700.0 {
        (a1.exp_m1() + a2.exp_m1()).ln_1p()
    } else {
        m + ((a1 - m).exp() + (a2 - m).exp() - (-m).exp()).ln()
    }
}

struct GumbelParts {
    /// `ln((-ln u1)^t + (-ln u2)^t)`
    log_s: f64,
    /// `S^(1/t)`
    w: f64,
}

fn gumbel_parts(t: f64, u: &UnitPair) -> GumbelParts {
    let e1 = t * (-u.l1).ln();
    let e2 = t * (-u.l2).ln();
    let m = e1.max(e2);
    let log_s = m + ((e1 - m).exp() + (e2 - m).exp()).ln();
    GumbelParts {
        log_s,
        w: (log_s / t).exp(),
    }
}

fn frank_log_cdf(t: f64, u: &UnitPair) -> f64 {
    let (u1, u2) = (u.c1, u.c2);
    if t.abs() < FRANK_TAYLOR_CUTOFF {
        let c1 = u1 * u2 * (u1 - 1.0) * (u2 - 1.0) / 2.0;
        let c2 = u1 * u2 * (u1 - 1.0) * (2.0 * u1 - 1.0) * (u2 - 1.0) * (2.0 * u2 - 1.0) / 12.0;
        return (u1 * u2 + t * c1 + t * t * c2).ln();
    }
    let a1 = (-t * u1).exp_m1();
    let a2 = (-t * u2).exp_m1();
    let b = (-t).exp_m1();
    (-(a1 * a2 / b).ln_1p() / t).ln()
}

fn frank_log_h(t: f64, u_self: f64, u_other: f64, lu_other: f64) -> f64 {
    if t.abs() < FRANK_TAYLOR_CUTOFF {
        let (u, v) = (u_self, u_other);
        let h1 = v * (2.0 * u - 1.0) * (v - 1.0) / 2.0;
        let h2 = v * (v - 1.0) * (2.0 * v - 1.0) * (6.0 * u * u - 6.0 * u + 1.0) / 12.0;
        // v + t h1 + t^2 h2 = v (1 + t h1/v + t^2 h2/v)
        return lu_other + (t * h1 / v + t * t * h2 / v).ln_1p();
    }
    let a_self = (-t * u_self).exp_m1();
    let a_other = (-t * u_other).exp_m1();
    let b = (-t).exp_m1();
    // h = e^{-t u_self} a_other / (b + a_self a_other); both factors share a sign.
    -t * u_self + (a_other / (b + a_self * a_other)).ln()
}

fn frank_log_pdf(t: f64, u: &UnitPair) -> f64 {
    let (u1, u2) = (u.c1, u.c2);
    if t.abs() < FRANK_TAYLOR_CUTOFF {
        let c1 = (2.0 * u1 - 1.0) * (2.0 * u2 - 1.0) / 2.0;
        let c2 = (6.0 * u1 * u1 - 6.0 * u1 + 1.0) * (6.0 * u2 * u2 - 6.0 * u2 + 1.0) / 12.0;
        return (t * c1 + t * t * c2).ln_1p();
    }
    let a1 = (-t * u1).exp_m1();
    let a2 = (-t * u2).exp_m1();
    let b = (-t).exp_m1();
    (-t * b).ln() - t * (u1 + u2) - 2.0 * (b + a1 * a2).abs().ln()
}

/// First Debye function `D1(x) = (1/x) * integral_0^x t / (e^t - 1) dt`.
pub fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    integrate(integrand, 0.0, x, DEBYE_TOL) / x
}

fn frank_tau(theta: f64) -> f64 {
    CopulaParam {
        family: CopulaFamily::Frank,
        theta,
    }
    .tau()
}

fn frank_theta_from_tau(tau: f64) -> Result<f64> {
    let sign = tau.signum();
    let target = tau.abs();
    let mut hi = 1.0;
    while frank_tau(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain {
                what: "kendall's tau",
                value: tau,
            });
        }
    }
    let lo = FRANK_ZERO_SURROGATE;
    let theta = find_root(|t| frank_tau(t) - target, lo, hi, 1e-13, 500)?;
    Ok(sign * theta)
}

/// Sample Kendall's tau (tau-a) by pairwise comparison.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            if p > 0.0 {
                s += 1;
            } else if p < 0.0 {
                s -= 1;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clayton(t: f64) -> CopulaParam {
        CopulaParam::new(CopulaFamily::Clayton, t).unwrap()
    }

    fn gumbel(t: f64) -> CopulaParam {
        CopulaParam::new(CopulaFamily::Gumbel, t).unwrap()
    }

    #[test]
    fn clayton_reference_values() {
        let p = clayton(2.0);
        assert!((p.cdf(&UnitPair::new(0.5, 1.0)) - 0.5).abs() < 1e-15);
        let half = UnitPair::new(0.5, 0.5);
        assert!((p.cdf(&half) - 7f64.powf(-0.5)).abs() < 1e-14);
        assert!((p.hfunc(&half, Coordinate::First) - 8.0 * 7f64.powf(-1.5)).abs() < 1e-14);
        assert!((p.pdf(&half) - 192.0 * 7f64.powf(-2.5)).abs() < 1e-13);
    }

    #[test]
    fn gumbel_independence() {
        let p = gumbel(1.0);
        let u = UnitPair::new(0.3, 0.7);
        assert!((p.cdf(&u) - 0.21).abs() < 1e-14);
        assert!((p.hfunc(&u, Coordinate::First) - 0.7).abs() < 1e-14);
        assert!((p.pdf(&u) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(CopulaParam::new(CopulaFamily::Clayton, 0.0).is_err());
        assert!(CopulaParam::new(CopulaFamily::Clayton, -1.0).is_err());
        assert!(CopulaParam::new(CopulaFamily::Frank, 0.0).is_err());
        assert!(CopulaParam::new(CopulaFamily::Gumbel, 0.99).is_err());
        assert!(CopulaParam::new(CopulaFamily::Gumbel, f64::NAN).is_err());
    }

    #[test]
    fn links() {
        assert_eq!(CopulaFamily::Gumbel.link_inv(0.0).theta(), 2.0);
        assert_eq!(CopulaFamily::Clayton.link_inv(0.0).theta(), 1.0);
        assert_eq!(CopulaFamily::Frank.link_inv(3.5).theta(), 3.5);
        assert_eq!(CopulaFamily::Frank.link_inv(0.0).theta(), FRANK_ZERO_SURROGATE);
        for fam in CopulaFamily::ALL {
            for &eta in &[-3.0, -0.4, 0.7, 2.5] {
                let p = fam.link_inv(eta);
                assert!(fam.admits(p.theta()));
                assert!((p.eta() - eta).abs() < 1e-12, "{fam} {eta}");
            }
        }
    }

    #[test]
    fn tau_closed_forms() {
        assert_eq!(clayton(2.0).tau(), 0.5);
        assert_eq!(gumbel(1.0).tau(), 0.0);
        let t = CopulaFamily::Clayton.theta_from_tau(0.6).unwrap().theta();
        assert!((t - 3.0).abs() < 1e-12);
        let t = CopulaFamily::Gumbel.theta_from_tau(0.5).unwrap().theta();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tau_domain_errors() {
        assert!(CopulaFamily::Clayton.theta_from_tau(-0.1).is_err());
        assert!(CopulaFamily::Clayton.theta_from_tau(1.0).is_err());
        assert!(CopulaFamily::Gumbel.theta_from_tau(-0.2).is_err());
        assert!(CopulaFamily::Frank.theta_from_tau(0.0).is_err());
        assert!(CopulaFamily::Frank.theta_from_tau(-1.0).is_err());
    }

    #[test]
    fn frank_negative_tau_is_antisymmetric() {
        let pos = CopulaFamily::Frank.theta_from_tau(0.4).unwrap().theta();
        let neg = CopulaFamily::Frank.theta_from_tau(-0.4).unwrap().theta();
        assert!((pos + neg).abs() < 1e-9);
        let p = CopulaParam::new(CopulaFamily::Frank, -4.0).unwrap();
        assert!((p.tau() + CopulaParam::new(CopulaFamily::Frank, 4.0).unwrap().tau()).abs() < 1e-10);
    }

    #[test]
    fn frank_taylor_branch_is_continuous() {
        let u = UnitPair::new(0.27, 0.81);
        for &(a, b) in &[(0.99e-5, 1.01e-5), (-0.99e-5, -1.01e-5)] {
            let pa = CopulaParam::new(CopulaFamily::Frank, a).unwrap();
            let pb = CopulaParam::new(CopulaFamily::Frank, b).unwrap();
            assert!((pa.log_cdf(&u) - pb.log_cdf(&u)).abs() < 1e-7);
            assert!((pa.log_pdf(&u) - pb.log_pdf(&u)).abs() < 1e-7);
            for wrt in [Coordinate::First, Coordinate::Second] {
                assert!((pa.log_hfunc(&u, wrt) - pb.log_hfunc(&u, wrt)).abs() < 1e-7);
            }
        }
        let p = CopulaParam::new(CopulaFamily::Frank, FRANK_ZERO_SURROGATE).unwrap();
        assert!((p.cdf(&u) - 0.27 * 0.81).abs() < 1e-8);
        assert!((p.pdf(&u) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn h_inverse_round_trip() {
        for (fam, theta) in [
            (CopulaFamily::Clayton, 0.5),
            (CopulaFamily::Clayton, 8.0),
            (CopulaFamily::Frank, -6.0),
            (CopulaFamily::Frank, 6.0),
            (CopulaFamily::Gumbel, 1.3),
            (CopulaFamily::Gumbel, 4.0),
        ] {
            let p = CopulaParam::new(fam, theta).unwrap();
            for &u1 in &[0.05, 0.4, 0.93] {
                for &w in &[0.02, 0.5, 0.97] {
                    let u2 = p.hfunc_inverse(u1, w);
                    let back = p.hfunc(&UnitPair::new(u1, u2), Coordinate::First);
                    assert!((back - w).abs() < 1e-8, "{fam} {theta} {u1} {w}: {back}");
                }
            }
        }
    }

    #[test]
    fn clayton_extreme_parameter_stays_finite() {
        let p = clayton(200.0);
        let u = UnitPair::new(1e-10, 0.3);
        assert!(p.log_pdf(&u).is_finite());
        assert!(p.log_cdf(&u).is_finite());
        assert!(p.log_hfunc(&u, Coordinate::First).is_finite());
        assert!(p.log_hfunc(&u, Coordinate::Second).is_finite());
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = clayton(3.0);
        let a = p.sample_pair(&mut RandomStream::derived(11, 2));
        let b = p.sample_pair(&mut RandomStream::derived(11, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn kendall_tau_small() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    }
}
