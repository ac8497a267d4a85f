//! Zero curves, fold points and the `m = 3` variational curves on the torus of
//! pairs `(θ, x)`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{angle_diff, bisect, newton2, wrap_angle};

/// The `(θ, x)` domain: `θ` is always periodic, `x` ranges over a circle or an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusDomain {
    pub x_range: [f64; 2],
    pub x_periodic: bool,
}

impl TorusDomain {
    pub fn periodic(x_range: [f64; 2]) -> Self {
        Self { x_range, x_periodic: true }
    }

    pub fn interval(x_range: [f64; 2]) -> Self {
        Self { x_range, x_periodic: false }
    }

    pub fn circle() -> Self {
        Self::periodic([0.0, TAU])
    }

    fn x_len(&self) -> f64 {
        self.x_range[1] - self.x_range[0]
    }

    fn wrap_x(&self, x: f64) -> f64 {
        if self.x_periodic {
            let [lo, hi] = self.x_range;
            let r = (x - lo).rem_euclid(hi - lo) + lo;
            if r >= hi {
                lo
            } else {
                r
            }
        } else {
            x
        }
    }

    fn contains_x(&self, x: f64) -> bool {
        self.x_periodic || (self.x_range[0]..=self.x_range[1]).contains(&x)
    }

    /// Representative of a point with `θ ∈ [0, 2π)` and `x` wrapped when periodic.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        [wrap_angle(p[0]), self.wrap_x(p[1])]
    }

    /// Signed difference `b - a` using the shortest representative on periodic axes.
    pub fn delta(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let dx = if self.x_periodic {
            let l = self.x_len();
            let d = (b[1] - a[1]).rem_euclid(l);
            if d > 0.5 * l {
                d - l
            } else {
                d
            }
        } else {
            b[1] - a[1]
        };
        [angle_diff(a[0], b[0]), dx]
    }

    pub fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.delta(a, b);
        d[0].hypot(d[1])
    }
}

/// A traced piece of a zero curve. Points are stored wrapped into the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    /// The march stopped at a point where the gradient vanished or the step collapsed.
    pub hit_singularity: bool,
}

fn grad<F: Fn(f64, f64) -> f64>(f: &F, p: [f64; 2]) -> [f64; 2] {
    let h = 1e-6;
    [
        (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h),
        (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2.0 * h),
    ]
}

enum MarchEnd {
    Closed,
    Singular,
    Boundary,
    Exhausted,
}

struct Tracer<'a, F> {
    f: &'a F,
    domain: TorusDomain,
    ftol: f64,
    gtol: f64,
    h0: f64,
    h_max: f64,
    max_steps: usize,
}

impl<F: Fn(f64, f64) -> f64> Tracer<'_, F> {
    fn eval(&self, p: [f64; 2]) -> f64 {
        let w = self.domain.wrap(p);
        (self.f)(w[0], w[1])
    }

    fn tangent(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let g = grad(&|a, b| self.eval([a, b]), p);
        let n = g[0].hypot(g[1]);
        (n > self.gtol).then(|| [-g[1] / n, g[0] / n])
    }

    /// Newton projection along the gradient.
    fn correct(&self, mut q: [f64; 2]) -> Option<[f64; 2]> {
        for _ in 0..12 {
            let v = self.eval(q);
            if !v.is_finite() {
                return None;
            }
            if v.abs() < self.ftol {
                return Some(q);
            }
            let g = grad(&|a, b| self.eval([a, b]), q);
            let n2 = g[0] * g[0] + g[1] * g[1];
            if n2 < self.gtol * self.gtol {
                return None;
            }
            q = [q[0] - v * g[0] / n2, q[1] - v * g[1] / n2];
        }
        (self.eval(q).abs() < self.ftol).then_some(q)
    }

    fn march(&self, seed: [f64; 2], dir: f64) -> (Vec<[f64; 2]>, MarchEnd) {
        let mut pts = Vec::new();
        let Some(t0) = self.tangent(seed) else {
            return (pts, MarchEnd::Singular);
        };
        let mut t = [dir * t0[0], dir * t0[1]];
        let mut p = seed;
        let mut h = self.h0;
        let mut streak = 0;
        let mut travelled = 0.0;
        for _ in 0..self.max_steps {
            let pred = [p[0] + h * t[0], p[1] + h * t[1]];
            if !self.domain.contains_x(pred[1]) {
                return (pts, MarchEnd::Boundary);
            }
            let accepted = self.correct(pred).and_then(|q| {
                let off = (q[0] - pred[0]).hypot(q[1] - pred[1]);
                let tn = self.tangent(q)?;
                let dot = tn[0] * t[0] + tn[1] * t[1];
                (off < 0.5 * h && dot.abs() > 0.8 && self.domain.contains_x(q[1]))
                    .then(|| (q, if dot < 0.0 { [-tn[0], -tn[1]] } else { tn }))
            });
            match accepted {
                Some((q, tn)) => {
                    travelled += (q[0] - p[0]).hypot(q[1] - p[1]);
                    pts.push(q);
                    p = q;
                    t = tn;
                    streak += 1;
                    if streak >= 3 {
                        h = (2.0 * h).min(self.h_max);
                        streak = 0;
                    }
                    if travelled > 4.0 * self.h0 && self.domain.dist(q, seed) < 1.5 * h {
                        return (pts, MarchEnd::Closed);
                    }
                }
                None => {
                    h *= 0.5;
                    streak = 0;
                    if h < 1e-7 {
                        return (pts, MarchEnd::Singular);
                    }
                }
            }
        }
        (pts, MarchEnd::Exhausted)
    }
}

/// Sample `f` on a `grid × grid` lattice over the domain. Returns the lattice
/// coordinates and values (row-major in `θ`).
fn lattice<F: Fn(f64, f64) -> f64>(f: &F, domain: &TorusDomain, grid: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let ths: Vec<f64> = (0..grid).map(|i| TAU * i as f64 / grid as f64).collect();
    let nx = if domain.x_periodic { grid } else { grid + 1 };
    let xs: Vec<f64> = (0..nx)
        .map(|j| domain.x_range[0] + domain.x_len() * j as f64 / grid as f64)
        .collect();
    let mut vals = Vec::with_capacity(grid * nx);
    for &th in &ths {
        for &x in &xs {
            vals.push(f(th, x));
        }
    }
    (ths, xs, vals)
}

/// Trace all components of `{f = 0}` on the torus, seeded from sign changes on a
/// `grid × grid` lattice. Components smaller than a lattice cell may be missed.
pub fn trace_zero_curve<F: Fn(f64, f64) -> f64>(
    f: &F,
    domain: &TorusDomain,
    grid: usize,
) -> Vec<Polyline> {
    let grid = grid.max(8);
    let (ths, xs, vals) = lattice(f, domain, grid);
    let nx = xs.len();
    let scale = vals.iter().fold(0.0f64, |a, v| if v.is_finite() { a.max(v.abs()) } else { a });
    let cell = (TAU / grid as f64).min(domain.x_len() / grid as f64);
    let tracer = Tracer {
        f,
        domain: *domain,
        ftol: 1e-11 * (1.0 + scale),
        gtol: 1e-9 * (1.0 + scale),
        h0: 0.5 * cell,
        h_max: 0.5 * cell,
        max_steps: 400 * grid,
    };

    // seeds from sign changes along lattice edges
    let mut seeds = Vec::new();
    let v = |i: usize, j: usize| vals[i * nx + j];
    for i in 0..grid {
        for j in 0..nx {
            let a = v(i, j);
            if !a.is_finite() {
                continue;
            }
            let (th, x) = (ths[i], xs[j]);
            if a == 0.0 {
                seeds.push([th, x]);
                continue;
            }
            let b = v((i + 1) % grid, j);
            if b.is_finite() && (a < 0.0) != (b < 0.0) {
                let t = bisect(&|u: f64| f(wrap_angle(u), x), th, th + TAU / grid as f64, 1e-13);
                seeds.push([t, x]);
            }
            let jn = if j + 1 < nx {
                Some(j + 1)
            } else if domain.x_periodic {
                Some(0)
            } else {
                None
            };
            if let Some(jn) = jn {
                let b = v(i, jn);
                if b.is_finite() && (a < 0.0) != (b < 0.0) {
                    let x1 = x + domain.x_len() / grid as f64;
                    let s = bisect(&|u: f64| f(th, domain.wrap_x(u)), x, x1, 1e-13);
                    seeds.push([th, s]);
                }
            }
        }
    }

    let mut curves: Vec<Polyline> = Vec::new();
    let mut used = vec![false; seeds.len()];
    for k in 0..seeds.len() {
        if used[k] {
            continue;
        }
        let Some(seed) = tracer.correct(seeds[k]) else {
            used[k] = true;
            continue;
        };
        let (fwd, end_f) = tracer.march(seed, 1.0);
        let (points, closed, singular) = if matches!(end_f, MarchEnd::Closed) {
            let mut p = vec![seed];
            p.extend(fwd);
            (p, true, false)
        } else {
            let (bwd, end_b) = tracer.march(seed, -1.0);
            let mut p: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
            p.push(seed);
            p.extend(fwd);
            let sing = matches!(end_f, MarchEnd::Singular) || matches!(end_b, MarchEnd::Singular);
            (p, false, sing)
        };
        let points: Vec<[f64; 2]> = points.into_iter().map(|p| domain.wrap(p)).collect();
        for (u, s) in seeds.iter().enumerate() {
            if !used[u] && points.iter().any(|p| domain.dist(*p, *s) < 0.5 * cell) {
                used[u] = true;
            }
        }
        used[k] = true;
        curves.push(Polyline {
            points,
            closed,
            hit_singularity: singular,
        });
    }
    curves
}

/// Isolated solutions of a planar map on the torus, seeded from local minima
/// of `|f|` on a `grid × grid` lattice and polished by Newton to `tol`.
pub fn solve_on_torus<F: Fn(f64, f64) -> [f64; 2]>(
    f: &F,
    domain: &TorusDomain,
    grid: usize,
    tol: f64,
) -> Vec<(f64, f64)> {
    let grid = grid.max(8);
    let norm = |th: f64, x: f64| {
        let v = f(th, x);
        let n = v[0].hypot(v[1]);
        if n.is_finite() {
            n
        } else {
            f64::INFINITY
        }
    };
    let (ths, xs, vals) = lattice(&norm, domain, grid);
    let nx = xs.len();
    let wrapped = |th: f64, x: f64| {
        let p = domain.wrap([th, x]);
        f(p[0], p[1])
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid {
        for j in 0..nx {
            let c = vals[i * nx + j];
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = (i as i64 + di).rem_euclid(grid as i64) as usize;
                    let jj = j as i64 + dj;
                    let jj = if domain.x_periodic {
                        jj.rem_euclid(nx as i64) as usize
                    } else if jj < 0 || jj >= nx as i64 {
                        continue;
                    } else {
                        jj as usize
                    };
                    if vals[ii * nx + jj] < c {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if !is_min {
                continue;
            }
            if let Some(r) = newton2(&wrapped, [ths[i], xs[j]], tol, 80, 1e-7) {
                if !domain.contains_x(r.point[1]) {
                    continue;
                }
                let p = domain.wrap(r.point);
                if !out.iter().any(|q| domain.dist([q.0, q.1], p) < 1e-6) {
                    out.push((p[0], p[1]));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

/// A point of a zero curve `{f = 0}` where `∂x f = 0`, i.e. a fold of the
/// projection of the curve onto the `θ` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub theta: f64,
    pub x: f64,
    pub fxx: f64,
    /// `∂²x f` vanishes to tolerance: a higher-order contact that is reported but not resolved.
    pub degenerate: bool,
}

/// Fold points along traced curves of `{f = 0}`, located by sign changes of `∂x f`.
pub fn find_fold_points<F: Fn(f64, f64) -> f64>(
    f: &F,
    curves: &[Polyline],
    domain: &TorusDomain,
    tol: f64,
) -> Vec<FoldPoint> {
    let h = 1e-5;
    let fx = |th: f64, x: f64| (f(th, x + h) - f(th, x - h)) / (2.0 * h);
    let sys = |th: f64, x: f64| {
        let p = domain.wrap([th, x]);
        [f(p[0], p[1]), fx(p[0], p[1])]
    };
    let mut out: Vec<FoldPoint> = Vec::new();
    for c in curves {
        let n = c.points.len();
        if n < 2 {
            continue;
        }
        let pairs = if c.closed { n } else { n - 1 };
        for k in 0..pairs {
            let a = c.points[k];
            let b = c.points[(k + 1) % n];
            let (ga, gb) = (fx(a[0], a[1]), fx(b[0], b[1]));
            if (ga < 0.0) == (gb < 0.0) && ga != 0.0 {
                continue;
            }
            let d = domain.delta(a, b);
            let mid = [a[0] + 0.5 * d[0], a[1] + 0.5 * d[1]];
            let Some(r) = newton2(&sys, mid, tol.max(1e-12), 60, 1e-6) else {
                continue;
            };
            let p = domain.wrap(r.point);
            if out.iter().any(|q| domain.dist([q.theta, q.x], p) < 1e-6) {
                continue;
            }
            let hh = 1e-4;
            let fxx = (f(p[0], p[1] + hh) - 2.0 * f(p[0], p[1]) + f(p[0], p[1] - hh)) / (hh * hh);
            out.push(FoldPoint {
                theta: p[0],
                x: p[1],
                fxx,
                degenerate: fxx.abs() < 1e-6,
            });
        }
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

/// A point on the variational curves with its transversality data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarPoint {
    pub theta: f64,
    pub x: f64,
    /// `det[∇(∂x b0), ∇b1]` at the point.
    pub det: f64,
    pub b1: f64,
    /// The two curves cross transversally (end points) or `b1|B0'` has a
    /// nondegenerate critical point (intersection points).
    pub transversal: bool,
}

/// The curves `B0' = {∂x b0 = 0}` and `B1 = {b1 = 0}` of the `m = 3` variational
/// problem, with end points `B0' ∩ B1` and intersection points, the critical
/// points of `b1` restricted to `B0'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalCurves {
    pub b0_prime: Vec<Polyline>,
    pub b1: Vec<Polyline>,
    pub end_points: Vec<VarPoint>,
    pub intersection_points: Vec<VarPoint>,
    /// Self-crossings of `B0'` (vanishing gradient), excluded from the intersection points.
    pub singular_points: Vec<(f64, f64)>,
}

pub fn variational_discriminant_m3<F0, F1>(
    b0: &F0,
    b1: &F1,
    domain: &TorusDomain,
    grid: usize,
    tol: f64,
) -> Result<VariationalCurves>
where
    F0: Fn(f64, f64) -> f64,
    F1: Fn(f64, f64) -> f64,
{
    let hx = 1e-5;
    let b0x = |th: f64, x: f64| {
        (-b0(th, x + 2.0 * hx) + 8.0 * b0(th, x + hx) - 8.0 * b0(th, x - hx) + b0(th, x - 2.0 * hx))
            / (12.0 * hx)
    };
    let (_, _, probe) = lattice(&b0x, domain, grid.max(8));
    let peak = probe.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak <= tol {
        return Err(Error::DegeneracyCheck(
            "b0 does not depend on x; the curve B0' is the whole torus".into(),
        ));
    }
    let b0_prime = trace_zero_curve(&b0x, domain, grid);
    let b1_curves = trace_zero_curve(b1, domain, grid);

    let g = 1e-5;
    let grad_of = |f: &dyn Fn(f64, f64) -> f64, th: f64, x: f64| {
        [
            (f(th + g, x) - f(th - g, x)) / (2.0 * g),
            (f(th, x + g) - f(th, x - g)) / (2.0 * g),
        ]
    };
    let det_at = |th: f64, x: f64| {
        let a = grad_of(&b0x, th, x);
        let b = grad_of(b1, th, x);
        a[0] * b[1] - a[1] * b[0]
    };
    let grad_h_norm = |th: f64, x: f64| {
        let a = grad_of(&b0x, th, x);
        a[0].hypot(a[1])
    };

    let ends = solve_on_torus(&|th, x| [b0x(th, x), b1(th, x)], domain, grid, 1e-10);
    let end_points = ends
        .into_iter()
        .map(|(th, x)| {
            let det = det_at(th, x);
            VarPoint {
                theta: th,
                x,
                det,
                b1: b1(th, x),
                transversal: det.abs() > tol.max(1e-6),
            }
        })
        .collect();

    let crit = solve_on_torus(&|th, x| [b0x(th, x), det_at(th, x)], domain, grid, 1e-8);
    let mut intersection_points = Vec::new();
    let mut singular_points = Vec::new();
    for (th, x) in crit {
        if grad_h_norm(th, x) < 1e-4 {
            singular_points.push((th, x));
            continue;
        }
        // second derivative of det along the curve decides nondegeneracy
        let gh = grad_of(&b0x, th, x);
        let n = gh[0].hypot(gh[1]);
        let t = [-gh[1] / n, gh[0] / n];
        let s = 1e-4;
        let dd = (det_at(th + s * t[0], x + s * t[1]) - det_at(th - s * t[0], x - s * t[1])) / (2.0 * s);
        intersection_points.push(VarPoint {
            theta: th,
            x,
            det: det_at(th, x),
            b1: b1(th, x),
            transversal: dd.abs() > tol.max(1e-6),
        });
    }
    Ok(VariationalCurves {
        b0_prime,
        b1: b1_curves,
        end_points,
        intersection_points,
        singular_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn traces_a_closed_circle() {
        let d = TorusDomain::circle();
        let f = |th: f64, x: f64| (th - PI).powi(2) + (x - PI).powi(2) - 1.0;
        let curves = trace_zero_curve(&f, &d, 64);
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        for p in &c.points {
            assert!(f(p[0], p[1]).abs() < 1e-9);
        }
        let folds = find_fold_points(&f, &curves, &d, 1e-12);
        // ∂x f = 0 at x = π, θ = π ± 1
        assert_eq!(folds.len(), 2);
        for fp in &folds {
            assert!((fp.x - PI).abs() < 1e-7);
            assert!(((fp.theta - PI).abs() - 1.0).abs() < 1e-7);
            assert!(!fp.degenerate);
        }
    }

    #[test]
    fn wraps_around_the_torus() {
        let d = TorusDomain::circle();
        // θ = 0.5 + 0.2 sin x is a closed loop in x around the torus
        let f = |th: f64, x: f64| (th - 0.5 - 0.2 * x.sin()).sin();
        let curves = trace_zero_curve(&f, &d, 48);
        // two loops: θ ≈ 0.5 and θ ≈ 0.5 + π
        assert_eq!(curves.len(), 2);
        assert!(curves.iter().all(|c| c.closed));
    }

    #[test]
    fn interval_domain_stops_at_boundary() {
        let d = TorusDomain::interval([-1.0, 1.0]);
        let f = |th: f64, _x: f64| th.cos();
        let curves = trace_zero_curve(&f, &d, 32);
        assert_eq!(curves.len(), 2);
        assert!(curves.iter().all(|c| !c.closed));
    }

    #[test]
    fn variational_example() {
        let d = TorusDomain::circle();
        let b0 = |th: f64, x: f64| th.cos() * x.sin();
        let b1 = |th: f64, x: f64| th.sin() - x.cos();
        let v = variational_discriminant_m3(&b0, &b1, &d, 96, 1e-8).unwrap();
        // ∂x b0 = cosθ cos x vanishes on θ = ±π/2 and x = ±π/2; with sinθ = cos x
        // this gives six points, two of them where ∇b1 = 0
        assert_eq!(v.end_points.len(), 6);
        let transversal = v.end_points.iter().filter(|p| p.transversal).count();
        assert_eq!(transversal, 4);
        for p in &v.end_points {
            assert!((p.theta.sin() - p.x.cos()).abs() < 1e-8);
            assert!((p.theta.cos() * p.x.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn flat_b0_is_degenerate() {
        let d = TorusDomain::circle();
        let r = variational_discriminant_m3(&|th: f64, _x: f64| th.cos(), &|_t, x: f64| x.cos(), &d, 32, 1e-8);
        assert!(matches!(r, Err(Error::DegeneracyCheck(_))));
    }
}
