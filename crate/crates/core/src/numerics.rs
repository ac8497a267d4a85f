//! Shared numerical kernels: finite differences, Newton solvers, bracketing,
//! polynomial roots and small fitting helpers.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// First derivative by the 4th-order central stencil.
pub fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Second derivative by the 4th-order central stencil.
pub fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// k-th derivative by the central k-th difference with step h (error O(h^2)).
pub fn central_diff<F: Fn(f64) -> f64>(f: &F, x: f64, k: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom(k, j) * f(x + (k as f64 / 2.0 - j as f64) * h);
    }
    acc / h.powi(k as i32)
}

/// k-th derivative with two Richardson refinements of the central difference.
pub fn richardson_diff<F: Fn(f64) -> f64>(f: &F, x: f64, k: usize, h: f64) -> f64 {
    let a0 = central_diff(f, x, k, h);
    let a1 = central_diff(f, x, k, h / 2.0);
    let a2 = central_diff(f, x, k, h / 4.0);
    let b0 = (4.0 * a1 - a0) / 3.0;
    let b1 = (4.0 * a2 - a1) / 3.0;
    (16.0 * b1 - b0) / 15.0
}

/// Least-squares line `y = slope x + intercept`; returns `(slope, intercept, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - icpt).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

/// Log-log slope of `|y|` against `|x|`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let (s, _, r) = fit_line(&lx, &ly);
    (s, r)
}

/// Polynomial (Neville) extrapolation of samples `(t_i, v_i)` to `t = 0`.
pub fn extrapolate_to_zero(ts: &[f64], vs: &[f64]) -> f64 {
    let mut p = vs.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (ts[i + k] * p[i] - ts[i] * p[i + 1]) / (ts[i + k] - ts[i]);
        }
    }
    p[0]
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det_lu(m: DMatrix<f64>) -> f64 {
    m.lu().determinant()
}

/// Roots of `sum c_i t^i` (ascending coefficients) from the companion matrix.
/// Leading zeros are stripped; a constant polynomial has no roots.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| *v == 0.0) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub point: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
}

/// Forward/central FD Jacobian of a planar map.
pub fn jacobian2<F: Fn(f64, f64) -> [f64; 2]>(f: &F, u: f64, v: f64, h: f64) -> Matrix2<f64> {
    let fu = {
        let a = f(u + h, v);
        let b = f(u - h, v);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    let fv = {
        let a = f(u, v + h);
        let b = f(u, v - h);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    Matrix2::new(fu[0], fv[0], fu[1], fv[1])
}

/// Damped Newton for a planar map with a finite-difference Jacobian.
pub fn newton2<F: Fn(f64, f64) -> [f64; 2]>(
    f: &F,
    start: [f64; 2],
    tol: f64,
    max_iter: usize,
    h: f64,
) -> Option<NewtonResult> {
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let mut p = start;
    let mut fp = f(p[0], p[1]);
    let mut r = norm(fp);
    if !r.is_finite() {
        return None;
    }
    for it in 0..max_iter {
        if r < tol {
            return Some(NewtonResult {
                point: p,
                residual: r,
                iterations: it,
            });
        }
        let j = jacobian2(f, p[0], p[1], h);
        let step = j.lu().solve(&Vector2::new(-fp[0], -fp[1]))?;
        if !step.iter().all(|s| s.is_finite()) {
            return None;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let q = [p[0] + lambda * step[0], p[1] + lambda * step[1]];
            let fq = f(q[0], q[1]);
            let rq = norm(fq);
            if rq.is_finite() && rq < r * (1.0 - 1e-4 * lambda) {
                p = q;
                fp = fq;
                r = rq;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // full step as a last resort; converged points often stall at round-off
            let q = [p[0] + step[0], p[1] + step[1]];
            let fq = f(q[0], q[1]);
            if norm(fq).is_finite() && norm(fq) <= r * 1.5 && step.norm() < 1e-10 {
                p = q;
                fp = fq;
                r = norm(fq);
            } else {
                break;
            }
        }
    }
    (r < tol).then_some(NewtonResult {
        point: p,
        residual: r,
        iterations: max_iter,
    })
}

/// Newton in ℝⁿ with an FD Jacobian; returns the solution and final residual norm.
pub fn newton_nd<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: &F,
    start: DVector<f64>,
    tol: f64,
    max_iter: usize,
    h: f64,
) -> Result<(DVector<f64>, f64)> {
    let mut x = start;
    let mut fx = f(&x);
    for _ in 0..max_iter {
        let r = fx.norm();
        if r < tol {
            return Ok((x, r));
        }
        let n = x.len();
        let mut jac = DMatrix::<f64>::zeros(fx.len(), n);
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            jac.set_column(k, &((f(&xp) - f(&xm)) / (2.0 * h)));
        }
        let step = jac
            .svd(true, true)
            .solve(&(-&fx), 1e-14)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        let mut lambda = 1.0;
        loop {
            let xn = &x + &step * lambda;
            let fnew = f(&xn);
            if fnew.norm() < r || lambda < 1e-4 {
                x = xn;
                fx = fnew;
                break;
            }
            lambda *= 0.5;
        }
    }
    let r = fx.norm();
    if r < tol {
        Ok((x, r))
    } else {
        Err(Error::Numerical(format!(
            "Newton did not converge in {max_iter} iterations (residual {r:.3e})"
        )))
    }
}

/// Bisection on a bracket with `f(a) f(b) <= 0`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if (b - a).abs() < tol {
            return c;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fa < 0.0) == (fc < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimisation on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// A located zero of a scalar function on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarZero {
    pub x: f64,
    pub derivative: f64,
    /// True when found as a tangential zero (no sign change).
    pub touching: bool,
}

/// Zeros of `f` on `[lo, hi]`: sign changes bracketed and bisected, plus
/// tangential zeros found as local minima of `|f|` that reach `touch_tol`.
/// On a periodic domain the wrap-around cell is included and results lie in `[lo, hi)`.
pub fn scalar_zeros<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    lo: f64,
    hi: f64,
    n: usize,
    periodic: bool,
    touch_tol: f64,
) -> Vec<ScalarZero> {
    let h = (hi - lo) / n as f64;
    let npts = if periodic { n } else { n + 1 };
    let xs: Vec<f64> = (0..npts).map(|i| lo + i as f64 * h).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let cells = if periodic { n } else { n };
    let at = |i: usize| -> (f64, f64) {
        if periodic && i >= npts {
            (xs[i - npts] + (hi - lo), vs[i - npts])
        } else {
            (xs[i], vs[i])
        }
    };
    let dstep = (h * 1e-2).max(1e-7);
    let mut out: Vec<ScalarZero> = Vec::new();
    let wrap = |x: f64| {
        if periodic {
            let p = hi - lo;
            let mut r = (x - lo).rem_euclid(p) + lo;
            if r >= hi {
                r = lo;
            }
            r
        } else {
            x
        }
    };
    for i in 0..cells {
        if !periodic && i + 1 >= npts {
            break;
        }
        let (xa, va) = at(i);
        let (xb, vb) = at(i + 1);
        if va == 0.0 {
            let vp = if i > 0 {
                vs[i - 1]
            } else if periodic {
                vs[npts - 1]
            } else {
                f64::NAN
            };
            out.push(ScalarZero {
                x: wrap(xa),
                derivative: d1(f, xa, dstep),
                touching: vp != 0.0 && vb != 0.0 && (vp < 0.0) == (vb < 0.0),
            });
            continue;
        }
        if (va < 0.0) != (vb < 0.0) && vb != 0.0 {
            let z = bisect(f, xa, xb, 1e-14 * (1.0 + xa.abs()));
            out.push(ScalarZero {
                x: wrap(z),
                derivative: d1(f, z, dstep),
                touching: false,
            });
        }
    }
    if !periodic && vs[npts - 1] == 0.0 {
        out.push(ScalarZero {
            x: xs[npts - 1],
            derivative: d1(f, xs[npts - 1], dstep),
            touching: false,
        });
    }
    // tangential zeros: local minima of |f| without a sign change around them
    for i in 0..npts {
        let (prev, next) = if periodic {
            ((i + npts - 1) % npts, (i + 1) % npts)
        } else if i == 0 || i + 1 == npts {
            continue;
        } else {
            (i - 1, i + 1)
        };
        let (vp, v, vn) = (vs[prev], vs[i], vs[next]);
        if v == 0.0 || (vp < 0.0) != (v < 0.0) || (vn < 0.0) != (v < 0.0) {
            continue;
        }
        if v.abs() <= vp.abs() && v.abs() <= vn.abs() {
            let xm = golden_min(&|x: f64| f(x).abs(), xs[i] - h, xs[i] + h, 1e-12);
            if f(xm).abs() <= touch_tol {
                let xw = wrap(xm);
                let dup = out.iter().any(|z| {
                    let mut d = (z.x - xw).abs();
                    if periodic {
                        d = d.min((hi - lo) - d);
                    }
                    d < 2.0 * h
                });
                if !dup {
                    out.push(ScalarZero {
                        x: xw,
                        derivative: d1(f, xm, dstep),
                        touching: true,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(std::f64::consts::TAU);
    if r >= std::f64::consts::TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference `b - a` in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (b - a).rem_euclid(tau);
    if d > std::f64::consts::PI {
        d - tau
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn finite_differences() {
        assert_relative_eq!(d1(f64::sin, 0.3, 1e-3), 0.3f64.cos(), epsilon = 1e-11);
        assert_relative_eq!(d2(f64::sin, 0.3, 1e-3), -0.3f64.sin(), epsilon = 1e-7);
        let f = |x: f64| x.powi(4);
        assert_relative_eq!(richardson_diff(&f, 0.0, 4, 1e-1), 24.0, epsilon = 1e-8);
        assert_relative_eq!(richardson_diff(&f64::exp, 0.0, 3, 1e-2), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn companion_roots() {
        // (t-1)(t-2)(t+3) = t^3 - 7t + 6
        let mut r: Vec<f64> = poly_roots(&[6.0, -7.0, 0.0, 1.0]).iter().map(|c| c.re).collect();
        r.sort_by(f64::total_cmp);
        assert_relative_eq!(r[0], -3.0, epsilon = 1e-12);
        assert_relative_eq!(r[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r[2], 2.0, epsilon = 1e-12);
        let c = poly_roots(&[1.0, 0.0, 1.0]);
        assert!(c.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-12));
        assert!(poly_roots(&[3.0, 0.0]).is_empty());
    }

    #[test]
    fn newton_finds_circle_line_intersection() {
        let f = |u: f64, v: f64| [u * u + v * v - 1.0, u - v];
        let r = newton2(&f, [1.0, 0.2], 1e-13, 50, 1e-7).unwrap();
        assert_relative_eq!(r.point[0], 0.5f64.sqrt(), epsilon = 1e-12);
        let g = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0] - 2.0, x[1] - x[0]]);
        let (x, _) = newton_nd(&g, DVector::from_vec(vec![1.0, 0.0]), 1e-12, 50, 1e-7).unwrap();
        assert_relative_eq!(x[1], 2f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn zeros_including_tangential() {
        let z = scalar_zeros(&f64::sin, 0.0, TAU, 2048, true, 1e-12);
        assert_eq!(z.len(), 2);
        assert!(z[0].x.abs() < 1e-12 && (z[1].x - PI).abs() < 1e-12);
        let t = scalar_zeros(&|x: f64| 1.0 - x.cos(), 0.0, TAU, 2048, true, 1e-12);
        assert_eq!(t.len(), 1);
        assert!(t[0].touching);
        assert!(t[0].x.min(TAU - t[0].x) < 1e-5);
        let none = scalar_zeros(&|x: f64| 2.0 + x.cos(), 0.0, TAU, 256, true, 1e-12);
        assert!(none.is_empty());
    }

    #[test]
    fn extrapolation_and_fit() {
        let ts = [0.1, 0.05, 0.025, 0.0125];
        let vs: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 * t - t * t).collect();
        assert_relative_eq!(extrapolate_to_zero(&ts, &vs), 2.0, epsilon = 1e-12);
        let (s, r) = loglog_slope(&ts, &ts.iter().map(|t| 5.0 * t.powf(1.5)).collect::<Vec<_>>());
        assert_relative_eq!(s, 1.5, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn angles() {
        assert_relative_eq!(angle_diff(6.2, 0.1), 0.1 + TAU - 6.2, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-0.5), TAU - 0.5, epsilon = 1e-12);
    }
}
