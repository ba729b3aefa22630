//! Parametric conditional margins: the proportional-hazards Weibull model
//! `S(t | x) = exp(-lambda * t^rho * exp(beta * x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 200;
/// Determinant of the correlation-scaled information below which the fit is
/// reported as unidentified.
const SINGULAR_DET: f64 = 1e-10;

/// A Weibull margin, either fitted or specified directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub lambda: f64,
    pub rho: f64,
    pub beta: f64,
    /// Standard errors of `(lambda, rho, beta)`; infinite when unidentified.
    pub se: [f64; 3],
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the observed information is numerically singular.
    pub identifiable: bool,
}

impl WeibullFit {
    /// A margin with known parameters (no estimation uncertainty).
    pub fn with_params(lambda: f64, rho: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                what: "weibull lambda",
                value: lambda,
            });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain {
                what: "weibull rho",
                value: rho,
            });
        }
        Ok(Self {
            lambda,
            rho,
            beta,
            se: [0.0; 3],
            loglik: f64::NAN,
            iterations: 0,
            converged: true,
            identifiable: true,
        })
    }

    /// Cumulative hazard `lambda * t^rho * exp(beta x)`.
    pub fn cumulative_hazard(&self, t: f64, x: f64) -> f64 {
        self.lambda * t.powf(self.rho) * (self.beta * x).exp()
    }

    /// Conditional survival probability `S(t | x)`.
    pub fn survival(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain {
                what: "survival time",
                value: t,
            });
        }
        Ok((-self.cumulative_hazard(t, x)).exp())
    }

    /// Time `t` with `S(t | x) = u`.
    pub fn inverse_survival(&self, u: f64, x: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain {
                what: "survival probability",
                value: u,
            });
        }
        Ok((-u.ln() / (self.lambda * (self.beta * x).exp())).powf(1.0 / self.rho))
    }
}

/// Censored Weibull log-likelihood at `(ln lambda, ln rho, beta)`.
pub fn weibull_loglik(data: &[(f64, bool, f64)], params: [f64; 3]) -> f64 {
    let [a, r, beta] = params;
    let rho = r.exp();
    data.iter()
        .map(|&(y, d, x)| {
            let ly = y.ln();
            let h = (a + rho * ly + beta * x).exp();
            let ev = if d { a + r + (rho - 1.0) * ly + beta * x } else { 0.0 };
            ev - h
        })
        .sum()
}

/// Analytic gradient of [`weibull_loglik`].
pub fn weibull_gradient(data: &[(f64, bool, f64)], params: [f64; 3]) -> [f64; 3] {
    derivs(data, params, 0.0).grad
}

struct Derivs {
    value: f64,
    grad: [f64; 3],
    hess: [[f64; 3]; 3],
}

/// Log-likelihood, gradient and Hessian with the covariate shifted by `center`.
fn derivs(data: &[(f64, bool, f64)], params: [f64; 3], center: f64) -> Derivs {
    let [a, r, beta] = params;
    let rho = r.exp();
    let mut value = 0.0;
    let mut g = [0.0; 3];
    let mut hm = [[0.0; 3]; 3];
    for &(y, d, x) in data {
        let x = x - center;
        let ly = y.ln();
        let rl = rho * ly;
        let h = (a + rl + beta * x).exp();
        let dv = if d { 1.0 } else { 0.0 };
        value += dv * (a + r + (rho - 1.0) * ly + beta * x) - h;
        g[0] += dv - h;
        g[1] += dv * (1.0 + rl) - h * rl;
        g[2] += dv * x - h * x;
        hm[0][0] -= h;
        hm[0][1] -= h * rl;
        hm[0][2] -= h * x;
        hm[1][1] += dv * rl - h * (rl + rl * rl);
        hm[1][2] -= h * rl * x;
        hm[2][2] -= h * x * x;
    }
    hm[1][0] = hm[0][1];
    hm[2][0] = hm[0][2];
    hm[2][1] = hm[1][2];
    Derivs {
        value,
        grad: g,
        hess: hm,
    }
}

/// Solves `m s = b` for a symmetric 3x3 system by Gaussian elimination with
/// partial pivoting. Returns `None` when singular.
fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut s = [0.0; 3];
    for i in (0..3).rev() {
        let mut acc = a[i][3];
        for k in (i + 1)..3 {
            acc -= a[i][k] * s[k];
        }
        s[i] = acc / a[i][i];
    }
    s.iter().all(|v| v.is_finite()).then_some(s)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0; 3]; 3];
    for (j, e) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().enumerate() {
        let col = solve3(*m, *e)?;
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Censored maximum likelihood fit of the Weibull margin.
///
/// Optimizes `(ln lambda, ln rho, beta)` by damped Newton iterations on a
/// centered covariate; standard errors come from the inverse observed
/// information through the delta method.
pub fn fit_weibull(data: &[(f64, bool, f64)]) -> Result<WeibullFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput("fit_weibull"));
    }
    let events = data.iter().filter(|o| o.1).count();
    if events == 0 {
        return Err(Error::DegenerateData("no events in margin data".into()));
    }
    if let Some(&(y, _, _)) = data.iter().find(|o| !(o.0 > 0.0 && o.0.is_finite())) {
        return Err(Error::Domain {
            what: "survival time",
            value: y,
        });
    }
    let n = data.len() as f64;
    let center = data.iter().map(|o| o.2).sum::<f64>() / n;
    let exposure: f64 = data.iter().map(|o| o.0).sum();
    let mut p = [(events as f64 / exposure).ln(), 0.0, 0.0];
    let mut cur = derivs(data, p, center);
    let mut converged = false;
    let mut iterations = 0;
    let mut mu = 0.0f64;
    while iterations < MAX_ITER {
        let gmax = cur.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax <= GRAD_TOL * n.max(1.0) {
            converged = true;
            break;
        }
        iterations += 1;
        // Levenberg-damped Newton direction on -H.
        let mut accepted = false;
        for _ in 0..60 {
            let mut info = cur.hess.map(|row| row.map(|v| -v));
            for (i, row) in info.iter_mut().enumerate() {
                row[i] += mu * row[i].abs().max(1e-8);
            }
            let step = match solve3(info, cur.grad) {
                Some(s) => s,
                None => {
                    mu = if mu == 0.0 { 1e-6 } else { mu * 10.0 };
                    continue;
                }
            };
            // Keep ln rho moves moderate to avoid overflow of t^rho.
            let scale = (2.0 / step[1].abs().max(1e-300)).min(1.0);
            let cand = [
                p[0] + scale * step[0],
                p[1] + scale * step[1],
                p[2] + scale * step[2],
            ];
            let next = derivs(data, cand, center);
            if next.value.is_finite() && next.value >= cur.value - 1e-12 * cur.value.abs() {
                p = cand;
                cur = next;
                mu = (mu * 0.1).max(0.0);
                if mu < 1e-12 {
                    mu = 0.0;
                }
                accepted = true;
                break;
            }
            mu = if mu == 0.0 { 1e-6 } else { mu * 10.0 };
        }
        if !accepted {
            break;
        }
    }

    // Observed information on the centered scale, scaled to correlation form.
    let info = cur.hess.map(|row| row.map(|v| -v));
    let diag_ok = (0..3).all(|i| info[i][i] > 0.0 && info[i][i].is_finite());
    let identifiable = diag_ok && {
        let mut corr = info;
        for i in 0..3 {
            for j in 0..3 {
                corr[i][j] = info[i][j] / (info[i][i] * info[j][j]).sqrt();
            }
        }
        det3(&corr) > SINGULAR_DET
    };

    let [ac, r, beta] = p;
    let a = ac - beta * center;
    let lambda = a.exp();
    let rho = r.exp();
    let se = match (identifiable, inverse3(&info)) {
        (true, Some(cov)) => {
            // a = ac - center * beta
            let var_a = cov[0][0] + center * center * cov[2][2] - 2.0 * center * cov[0][2];
            [
                lambda * var_a.max(0.0).sqrt(),
                rho * cov[1][1].max(0.0).sqrt(),
                cov[2][2].max(0.0).sqrt(),
            ]
        }
        _ => [f64::INFINITY; 3],
    };
    Ok(WeibullFit {
        lambda,
        rho,
        beta,
        se,
        loglik: cur.value,
        iterations,
        converged,
        identifiable,
    })
}
