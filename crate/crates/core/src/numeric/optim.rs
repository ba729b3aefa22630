use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `f` on `[lo, hi]`, starting from `init`.
///
/// A maximum is first bracketed by stepping uphill from `init`, then located
/// with Brent's golden-section/parabolic search to `|dx| <= tol`.
/// On plateaus the leftmost bracket point wins.
pub fn maximize_scalar<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    init: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarOptimum> {
    let mut eval = |x: f64| finite_or_neg_inf(f(x));
    let init = init.clamp(lo, hi);
    let step0 = (0.25 * (hi - lo)).min(0.5).max(tol * 10.0);

    // Bracketing phase: find a < b < c with f(b) >= f(a) and f(b) >= f(c).
    let mut b = init;
    let mut fb = eval(b);
    let mut a = (b - step0).max(lo);
    let mut fa = eval(a);
    let mut c = (b + step0).min(hi);
    let mut fc = eval(c);
    if !fa.is_finite() && !fb.is_finite() && !fc.is_finite() {
        return Err(Error::Optimization(format!(
            "objective non-finite at all initial points near {init}"
        )));
    }
    let mut iterations = 0;
    let mut step = step0;
    while iterations < max_iter {
        if fa > fb && a > lo {
            // Move left.
            c = b;
            fc = fb;
            b = a;
            fb = fa;
            step *= 1.618;
            a = (b - step).max(lo);
            fa = eval(a);
        } else if fc > fb && fc > fa && c < hi {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            step *= 1.618;
            c = (b + step).min(hi);
            fc = eval(c);
        } else {
            break;
        }
        iterations += 1;
    }
    // Boundary maximum: the best point is an end of the box.
    if fa >= fb && a <= lo {
        return Ok(ScalarOptimum {
            x: a,
            value: fa,
            iterations,
            converged: true,
        });
    }
    if fc > fb && c >= hi {
        return Ok(ScalarOptimum {
            x: c,
            value: fc,
            iterations,
            converged: true,
        });
    }

    let (x, fx, it, converged) = brent_max(&mut eval, a, b, c, fb, tol, max_iter - iterations.min(max_iter));
    Ok(ScalarOptimum {
        x,
        value: fx,
        iterations: iterations + it,
        converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn brent_max<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    c: f64,
    fb: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, usize, bool) {
    // Minimize g = -f on [a, c] from the interior point b.
    let (mut lo, mut hi) = (a.min(c), a.max(c));
    let mut x = b;
    let mut w = b;
    let mut v = b;
    let mut gx = -fb;
    let mut gw = gx;
    let mut gv = gx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for iter in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let tol1 = tol * 0.5 + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (hi - lo) {
            return (x, -gx, iter, true);
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (gx - gv);
            let mut q = (x - v) * (gx - gw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(mid - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { lo - x } else { hi - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let gu = -finite_or_neg_inf(f(u));
        if gu <= gx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            gv = gw;
            w = x;
            gw = gx;
            x = u;
            gx = gu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if gu <= gw || w == x {
                v = w;
                gv = gw;
                w = u;
                gw = gu;
            } else if gu <= gv || v == x || v == w {
                v = u;
                gv = gu;
            }
        }
    }
    (x, -gx, max_iter, false)
}

/// Options for [`maximize_nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub ftol: f64,
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-7,
            xtol: 1e-7,
            max_evals: 1000,
        }
    }
}

/// Result of a two-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneOptimum {
    pub x: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Derivative-free Nelder-Mead maximization in the plane.
pub fn maximize_nelder_mead<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    scale: [f64; 2],
    opts: NelderMeadOptions,
) -> PlaneOptimum {
    let mut g = |p: [f64; 2]| -finite_or_neg_inf(f(p));
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    let mut vals = [g(simplex[0]), g(simplex[1]), g(simplex[2])];
    let mut evals = 3;
    let mut converged = false;
    while evals < opts.max_evals {
        // Order: best (lowest g) first.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];

        let spread_f = (vals[2] - vals[0]).abs();
        let spread_x = (0..2)
            .map(|k| {
                (simplex[1][k] - simplex[0][k])
                    .abs()
                    .max((simplex[2][k] - simplex[0][k]).abs())
            })
            .fold(0.0, f64::max);
        if vals[0].is_finite() && spread_f <= opts.ftol && spread_x <= opts.xtol {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = g(xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = g(xe);
            evals += 1;
            if fe < fr {
                simplex[2] = xe;
                vals[2] = fe;
            } else {
                simplex[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = xr;
            vals[2] = fr;
        } else {
            let (xc, fc) = if fr < vals[2] {
                let xc = along(-0.5);
                (xc, g(xc))
            } else {
                let xc = along(0.5);
                (xc, g(xc))
            };
            evals += 1;
            if fc < vals[2].min(fr) {
                simplex[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    vals[k] = g(simplex[k]);
                }
                evals += 2;
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    PlaneOptimum {
        x: simplex[best],
        value: -vals[best],
        evaluations: evals,
        converged,
    }
}

/// Brent's bracketed root finder. `f(lo)` and `f(hi)` must differ in sign.
pub fn find_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Optimization(format!(
            "root not bracketed on [{lo}, {hi}]"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::Optimization("root finder hit iteration cap".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_max_of_parabola() {
        let opt = maximize_scalar(|x| -(x - 1.3).powi(2), -10.0, 10.0, 0.0, 1e-9, 500).unwrap();
        assert!((opt.x - 1.3).abs() < 1e-7);
        assert!(opt.converged);
    }

    #[test]
    fn scalar_max_at_boundary() {
        let opt = maximize_scalar(|x| x, -2.0, 3.0, 0.0, 1e-9, 500).unwrap();
        assert_eq!(opt.x, 3.0);
        let opt = maximize_scalar(|x| -x, -2.0, 3.0, 0.0, 1e-9, 500).unwrap();
        assert_eq!(opt.x, -2.0);
    }

    #[test]
    fn scalar_max_far_from_init() {
        let opt = maximize_scalar(|x| -(x + 7.0).powi(4) - (x + 7.0).powi(2), -20.0, 20.0, 5.0, 1e-9, 500)
            .unwrap();
        assert!((opt.x + 7.0).abs() < 1e-6, "{:?}", opt);
    }

    #[test]
    fn scalar_max_all_nan_errors() {
        assert!(maximize_scalar(|_| f64::NAN, 0.0, 1.0, 0.5, 1e-9, 100).is_err());
    }

    #[test]
    fn nelder_mead_rosenbrock_like() {
        let opt = maximize_nelder_mead(
            |p| -((p[0] - 1.0).powi(2) + 10.0 * (p[1] - p[0] * p[0]).powi(2)),
            [-1.0, 1.0],
            [0.5, 0.5],
            NelderMeadOptions {
                ftol: 1e-14,
                xtol: 1e-9,
                max_evals: 5000,
            },
        );
        assert!(opt.converged);
        assert!((opt.x[0] - 1.0).abs() < 1e-4 && (opt.x[1] - 1.0).abs() < 1e-4, "{:?}", opt);
    }

    #[test]
    fn root_of_cubic() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }
}
