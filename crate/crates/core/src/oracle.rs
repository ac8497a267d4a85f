//! Brute-force ground truth: zeros of the reduced problem on a window, solution
//! counts around circles in parameter space, and continuation of solution branches.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{Field2, ManifoldChart};
use crate::error::{Error, Result};
use crate::numerics::{fit_line, jacobian2, newton2};

/// Search window in `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub x_periodic: bool,
}

impl Window {
    /// The whole chart in `x` and `|y| ≤ y_half`.
    pub fn for_chart(chart: &ManifoldChart, y_half: f64) -> Self {
        Self {
            x: chart.range,
            y: [-y_half, y_half],
            x_periodic: chart.periodic(),
        }
    }

    /// A non-periodic box `x0 ± x_half`, `|y| ≤ y_half`.
    pub fn around(x0: f64, x_half: f64, y_half: f64) -> Self {
        Self {
            x: [x0 - x_half, x0 + x_half],
            y: [-y_half, y_half],
            x_periodic: false,
        }
    }

    pub fn size(&self) -> f64 {
        (self.x[1] - self.x[0]).hypot(self.y[1] - self.y[0])
    }

    fn wrap_x(&self, x: f64) -> f64 {
        if self.x_periodic {
            let l = self.x[1] - self.x[0];
            let r = (x - self.x[0]).rem_euclid(l) + self.x[0];
            if r >= self.x[1] {
                self.x[0]
            } else {
                r
            }
        } else {
            x
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_periodic || (self.x[0]..=self.x[1]).contains(&x)) && (self.y[0]..=self.y[1]).contains(&y)
    }

    fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        if self.x_periodic {
            let l = self.x[1] - self.x[0];
            dx = dx.rem_euclid(l);
            dx = dx.min(l - dx);
        }
        dx.hypot(a[1] - b[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountOptions {
    pub nx: usize,
    pub ny: usize,
    /// Dedup radius; defaults to `1e-6 ·` window size.
    pub dedup: Option<f64>,
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            nx: 200,
            ny: 200,
            dedup: None,
            newton_tol: 1e-12,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
    /// Re-polishing from a perturbed start returns to the same point.
    pub basin_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub eps: Vec<f64>,
    pub zeros: Vec<Zero>,
    pub dedup_radius: f64,
    pub warnings: Vec<String>,
}

impl SolutionSet {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }
}

const RESIDUAL_CAP: f64 = 1e-10;
const MANY_ZEROS: usize = 32;

/// All zeros of `field(eps, ·, ·)` in the window.
///
/// Newton is seeded from every lattice node where `|F|` is a local minimum.
/// Two zeros closer than a lattice cell share one basin minimum, so each zero
/// is followed by a deflated search for a nearby twin.
pub fn count_solutions<F: Field2 + ?Sized>(
    field: &F,
    eps: &[f64],
    window: &Window,
    opts: &CountOptions,
) -> Result<SolutionSet> {
    if opts.nx < 50 || opts.ny < 50 {
        return Err(Error::InvalidParams(format!(
            "lattice {}×{} is below the 50×50 minimum",
            opts.nx, opts.ny
        )));
    }
    if eps.len() != field.q() {
        return Err(Error::InvalidParams(format!(
            "parameter has {} components, field expects q = {}",
            eps.len(),
            field.q()
        )));
    }
    let (nx, ny) = (opts.nx, opts.ny);
    let npx = if window.x_periodic { nx } else { nx + 1 };
    let dx = (window.x[1] - window.x[0]) / nx as f64;
    let dy = (window.y[1] - window.y[0]) / ny as f64;
    let cell = dx.hypot(dy);
    let dedup = opts.dedup.unwrap_or(1e-6 * window.size());
    let f = |x: f64, y: f64| field.eval(eps, window.wrap_x(x), y);
    let norm = |v: [f64; 2]| {
        let n = v[0].hypot(v[1]);
        if n.is_finite() {
            n
        } else {
            f64::INFINITY
        }
    };

    let vals: Vec<f64> = (0..npx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = window.x[0] + i as f64 * dx;
            (0..=ny).map(move |j| norm(f(x, window.y[0] + j as f64 * dy)))
        })
        .collect();
    let at = |i: usize, j: usize| vals[i * (ny + 1) + j];

    let mut seeds = Vec::new();
    for i in 0..npx {
        for j in 0..=ny {
            let c = at(i, j);
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = j as i64 + dj;
                    if jj < 0 || jj > ny as i64 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    let ii = if window.x_periodic {
                        ii.rem_euclid(npx as i64)
                    } else if ii < 0 || ii >= npx as i64 {
                        continue;
                    } else {
                        ii
                    };
                    if at(ii as usize, jj as usize) < c {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push([window.x[0] + i as f64 * dx, window.y[0] + j as f64 * dy]);
            }
        }
    }

    let h = 1e-7 * window.size().max(1.0);
    let polish = |start: [f64; 2]| -> Option<[f64; 2]> {
        let r = newton2(&f, start, opts.newton_tol, opts.max_iter, h)?;
        let p = [window.wrap_x(r.point[0]), r.point[1]];
        (window.contains(p[0], p[1]) && norm(f(p[0], p[1])) < RESIDUAL_CAP).then_some(p)
    };
    // a seed sitting on a fold line has a singular Jacobian, so nudge it
    let nudges = [[0.0, 0.0], [0.0, 0.25 * dy], [0.0, -0.25 * dy], [0.25 * dx, 0.0], [-0.25 * dx, 0.0]];
    let found: Vec<Option<[f64; 2]>> = seeds
        .par_iter()
        .map(|s| nudges.iter().find_map(|n| polish([s[0] + n[0], s[1] + n[1]])))
        .collect();

    let mut zeros: Vec<[f64; 2]> = Vec::new();
    let push = |zeros: &mut Vec<[f64; 2]>, p: [f64; 2]| {
        if zeros.iter().any(|z| window.dist(*z, p) < dedup) {
            false
        } else {
            zeros.push(p);
            true
        }
    };
    let mut queue: Vec<[f64; 2]> = Vec::new();
    for p in found.into_iter().flatten() {
        if push(&mut zeros, p) {
            queue.push(p);
        }
    }
    // deflation: look for a second zero in the same basin
    while let Some(z) = queue.pop() {
        let deflated = |x: f64, y: f64| {
            let v = f(x, y);
            let d = window.dist([window.wrap_x(x), y], z).max(1e-300);
            [v[0] / d, v[1] / d]
        };
        for off in [[0.0, dy], [0.0, -dy], [dx, 0.0], [-dx, 0.0]] {
            let start = [z[0] + off[0], z[1] + off[1]];
            let Some(r) = newton2(&deflated, start, 1e-14, opts.max_iter, h) else {
                continue;
            };
            if let Some(p) = polish(r.point) {
                if window.dist(p, z) > dedup && push(&mut zeros, p) {
                    queue.push(p);
                }
            }
        }
    }

    let perturb = 1e-3 * cell;
    let mut out: Vec<Zero> = zeros
        .iter()
        .map(|&p| {
            let residual = norm(f(p[0], p[1]));
            let back = newton2(&f, [p[0] + perturb, p[1] - perturb], opts.newton_tol, opts.max_iter, h);
            let basin_ok = back.is_some_and(|r| window.dist([window.wrap_x(r.point[0]), r.point[1]], p) < dedup.max(1e-9));
            Zero {
                x: p[0],
                y: p[1],
                residual,
                basin_ok,
            }
        })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut warnings = Vec::new();
    if out.len() > MANY_ZEROS {
        warnings.push(format!("{} zeros found; the window may be too large", out.len()));
    }
    if let Some(z) = out.iter().find(|z| !z.basin_ok) {
        warnings.push(format!("zero at ({:.6}, {:.6}) failed the basin test", z.x, z.y));
    }
    Ok(SolutionSet {
        eps: eps.to_vec(),
        zeros: out,
        dedup_radius: dedup,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub theta: f64,
    pub from: usize,
    pub to: usize,
}

impl Jump {
    pub fn size(&self) -> i64 {
        self.to as i64 - self.from as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountMap {
    pub rho: f64,
    pub angles: Vec<f64>,
    pub counts: Vec<usize>,
    /// Jumps in increasing `θ`, each localised to `refine_tol`.
    pub jumps: Vec<Jump>,
    /// Odd jumps signal a dedup or window problem rather than a fold.
    pub inconsistencies: Vec<String>,
}

impl CountMap {
    /// Count at the sampled angle nearest to `theta`.
    pub fn count_at(&self, theta: f64) -> usize {
        let i = self
            .angles
            .iter()
            .enumerate()
            .min_by(|a, b| {
                crate::numerics::angle_diff(*a.1, theta)
                    .abs()
                    .total_cmp(&crate::numerics::angle_diff(*b.1, theta).abs())
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.counts[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountMapOptions {
    pub n_angles: usize,
    /// Restrict to `[θa, θb]`; the full circle when `None`.
    pub theta_range: Option<[f64; 2]>,
    pub refine_tol: f64,
    pub count: CountOptions,
}

impl Default for CountMapOptions {
    fn default() -> Self {
        Self {
            n_angles: 720,
            theta_range: None,
            refine_tol: 1e-4,
            count: CountOptions::default(),
        }
    }
}

/// Solution counts on the circle `|ε| = ρ` (`q = 2`).
pub fn region_count_map<F: Field2 + ?Sized>(
    field: &F,
    rho: f64,
    window: &Window,
    opts: &CountMapOptions,
) -> Result<CountMap> {
    if field.q() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "count maps need q = 2, got q = {}",
            field.q()
        )));
    }
    let n = opts.n_angles.max(4);
    let (angles, periodic): (Vec<f64>, bool) = match opts.theta_range {
        None => ((0..n).map(|j| TAU * j as f64 / n as f64).collect(), true),
        Some([a, b]) => ((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect(), false),
    };
    let count_at = |th: f64| -> Result<usize> {
        Ok(count_solutions(field, &[rho * th.cos(), rho * th.sin()], window, &opts.count)?.count())
    };
    let counts: Vec<usize> = angles.par_iter().map(|&th| count_at(th)).collect::<Result<_>>()?;

    let pairs: Vec<(f64, usize, f64, usize)> = (0..n)
        .filter_map(|j| {
            if j + 1 < n {
                Some((angles[j], counts[j], angles[j + 1], counts[j + 1]))
            } else if periodic {
                Some((angles[j], counts[j], angles[0] + TAU, counts[0]))
            } else {
                None
            }
        })
        .filter(|p| p.1 != p.3)
        .collect();
    let refined: Vec<Vec<Jump>> = pairs
        .par_iter()
        .map(|&(a, ca, b, cb)| refine_jumps(&count_at, a, ca, b, cb, opts.refine_tol))
        .collect::<Result<_>>()?;
    let mut jumps: Vec<Jump> = refined.into_iter().flatten().collect();
    for j in &mut jumps {
        j.theta = j.theta.rem_euclid(TAU);
    }
    jumps.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let inconsistencies = jumps
        .iter()
        .filter(|j| j.size() % 2 != 0)
        .map(|j| format!("odd jump {} -> {} at θ = {:.5}", j.from, j.to, j.theta))
        .collect();
    Ok(CountMap {
        rho,
        angles,
        counts,
        jumps,
        inconsistencies,
    })
}

fn refine_jumps<C: Fn(f64) -> Result<usize>>(
    count_at: &C,
    a: f64,
    ca: usize,
    b: f64,
    cb: usize,
    tol: f64,
) -> Result<Vec<Jump>> {
    if b - a <= tol {
        return Ok(vec![Jump {
            theta: 0.5 * (a + b),
            from: ca,
            to: cb,
        }]);
    }
    let mid = 0.5 * (a + b);
    let cm = count_at(mid)?;
    let mut out = Vec::new();
    if cm != ca {
        out.extend(refine_jumps(count_at, a, ca, mid, cm, tol)?);
    }
    if cm != cb {
        out.extend(refine_jumps(count_at, mid, cm, b, cb, tol)?);
    }
    Ok(out)
}

/// Smallest `|y|` among the zeros found along a path in parameter space.
pub fn min_abs_y_on_path<F: Field2 + ?Sized>(
    field: &F,
    path: &[Vec<f64>],
    window: &Window,
    opts: &CountOptions,
) -> Result<f64> {
    let mins: Vec<f64> = path
        .par_iter()
        .map(|eps| {
            let s = count_solutions(field, eps, window, opts)?;
            Ok(s.zeros.iter().map(|z| z.y.abs()).fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub t: f64,
    pub eps_norm: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchTrace {
    pub x0: f64,
    pub direction: Vec<f64>,
    pub y_sign: f64,
    /// `ε = eps_norm · direction`, `t = |y|`.
    pub samples: Vec<BranchSample>,
    pub alpha_eps: f64,
    /// `None` when `x` does not move off `x0` to round-off.
    pub alpha_x: Option<f64>,
    pub alpha_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub t_min: f64,
    pub t_max: f64,
    /// Sign of `y` along the branch; both are tried when `None`.
    pub y_sign: Option<f64>,
    /// The first zero must lie within this distance of `x0`.
    pub x_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            t_min: 1e-5,
            t_max: 1e-2,
            y_sign: None,
            x_tol: 1e-2,
            max_steps: 4000,
        }
    }
}

/// Follow a solution branch `(ε, x, y)` with `ε` along `direction` out of
/// `(0, x0, 0)`, parametrised by `t = |y|`.
///
/// Unknowns are `w = (ln|ε|, x, ln|y|)`; the equations are divided by `|ε|` so
/// that they stay O(1) along the branch. Continuation is pseudo-arclength with a
/// secant predictor.
pub fn trace_branch<F: Field2 + ?Sized>(
    field: &F,
    x0: f64,
    direction: &[f64],
    opts: &TraceOptions,
) -> Result<BranchTrace> {
    if direction.len() != field.q() {
        return Err(Error::InvalidParams(format!(
            "direction has {} components, field expects q = {}",
            direction.len(),
            field.q()
        )));
    }
    let dn = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dn == 0.0 {
        return Err(Error::InvalidParams("zero direction".into()));
    }
    let dir: Vec<f64> = direction.iter().map(|v| v / dn).collect();
    let signs: Vec<f64> = match opts.y_sign {
        Some(s) => vec![s.signum()],
        None => vec![1.0, -1.0],
    };
    for s in signs {
        if let Some(t) = trace_with_sign(field, x0, &dir, s, opts) {
            return Ok(t);
        }
    }
    Err(Error::NoBranch { x0 })
}

fn trace_with_sign<F: Field2 + ?Sized>(
    field: &F,
    x0: f64,
    dir: &[f64],
    sign: f64,
    opts: &TraceOptions,
) -> Option<BranchTrace> {
    let chart = field.chart();
    let g = |w: [f64; 3]| -> [f64; 2] {
        let r = w[0].exp();
        let eps: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let x = if chart.periodic() {
            chart.normalize(w[1]).unwrap_or(w[1])
        } else {
            w[1]
        };
        let v = field.eval(&eps, x, sign * w[2].exp());
        [v[0] / r, v[1] / r]
    };
    let y_start = opts.t_min.ln();
    let y_end = opts.t_max.ln();

    // first zero at |y| = t_min: lattice over (ln|ε|, x) then Newton
    let (nl, nx) = (240, 61);
    let l_lo = 8.0 * y_start;
    let x_half = 5.0 * opts.x_tol;
    let g2 = |l: f64, x: f64| g([l, x, y_start]);
    let lat: Vec<f64> = (0..nl)
        .flat_map(|i| {
            let l = l_lo + (0.0 - l_lo) * i as f64 / (nl - 1) as f64;
            (0..nx).map(move |j| (l, x0 - x_half + 2.0 * x_half * j as f64 / (nx - 1) as f64))
        })
        .map(|(l, x)| {
            let v = g2(l, x);
            let n = v[0].hypot(v[1]);
            if n.is_finite() {
                n
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut best: Option<[f64; 2]> = None;
    for i in 0..nl {
        for j in 0..nx {
            let c = lat[i * nx + j];
            let local_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    ii < 0 || jj < 0 || ii >= nl as i64 || jj >= nx as i64 || lat[ii as usize * nx + jj as usize] >= c
                })
            });
            if !local_min || !c.is_finite() {
                continue;
            }
            let l = l_lo + (0.0 - l_lo) * i as f64 / (nl - 1) as f64;
            let x = x0 - x_half + 2.0 * x_half * j as f64 / (nx - 1) as f64;
            if let Some(r) = newton2(&g2, [l, x], 1e-11, 60, 1e-7) {
                let off = chart.delta(x0, r.point[1]).abs();
                if off < opts.x_tol && best.is_none_or(|b| off < chart.delta(x0, b[1]).abs()) {
                    best = Some(r.point);
                }
            }
        }
    }
    let start = best?;

    let mut w = [start[0], start[1], y_start];
    let mut path = vec![w];
    let jac3 = |w: [f64; 3]| {
        let h = 1e-7;
        let mut j = [[0.0; 3]; 2];
        for k in 0..3 {
            let mut a = w;
            let mut b = w;
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = (g(a), g(b));
            j[0][k] = (fa[0] - fb[0]) / (2.0 * h);
            j[1][k] = (fa[1] - fb[1]) / (2.0 * h);
        }
        j
    };
    // initial tangent: kernel of the 2x3 Jacobian, oriented towards growing |y|
    let j0 = jac3(w);
    let mut tan = [
        j0[0][1] * j0[1][2] - j0[0][2] * j0[1][1],
        j0[0][2] * j0[1][0] - j0[0][0] * j0[1][2],
        j0[0][0] * j0[1][1] - j0[0][1] * j0[1][0],
    ];
    let tn = (tan[0] * tan[0] + tan[1] * tan[1] + tan[2] * tan[2]).sqrt();
    if !(tn > 0.0) {
        return None;
    }
    let sgn = if tan[2] < 0.0 { -1.0 } else { 1.0 };
    for t in &mut tan {
        *t *= sgn / tn;
    }
    let mut h = 0.05;
    let mut streak = 0;
    for _ in 0..opts.max_steps {
        if w[2] >= y_end {
            break;
        }
        let pred = [w[0] + h * tan[0], w[1] + h * tan[1], w[2] + h * tan[2]];
        let mut q = pred;
        let mut ok = false;
        for _ in 0..12 {
            let v = g(q);
            let c = tan[0] * (q[0] - pred[0]) + tan[1] * (q[1] - pred[1]) + tan[2] * (q[2] - pred[2]);
            if v[0].hypot(v[1]) < 1e-10 && c.abs() < 1e-12 {
                ok = true;
                break;
            }
            let j = jac3(q);
            let m = Matrix3::new(j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2], tan[0], tan[1], tan[2]);
            let Some(step) = m.lu().solve(&Vector3::new(-v[0], -v[1], -c)) else {
                break;
            };
            if !step.iter().all(|s| s.is_finite()) {
                break;
            }
            q = [q[0] + step[0], q[1] + step[1], q[2] + step[2]];
        }
        let jump = ((q[0] - pred[0]).powi(2) + (q[1] - pred[1]).powi(2) + (q[2] - pred[2]).powi(2)).sqrt();
        if ok && jump < h {
            let d = [q[0] - w[0], q[1] - w[1], q[2] - w[2]];
            let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if dn > 0.0 {
                tan = [d[0] / dn, d[1] / dn, d[2] / dn];
            }
            w = q;
            path.push(w);
            streak += 1;
            if streak >= 3 {
                h = (2.0 * h).min(0.5);
                streak = 0;
            }
        } else {
            h *= 0.5;
            streak = 0;
            if h < 1e-8 {
                break;
            }
        }
    }
    if path.len() < 4 {
        return None;
    }
    let samples: Vec<BranchSample> = path
        .iter()
        .filter(|w| w[2] <= y_end + 1e-9)
        .map(|w| BranchSample {
            t: w[2].exp(),
            eps_norm: w[0].exp(),
            x: if chart.periodic() { chart.normalize(w[1]).unwrap_or(w[1]) } else { w[1] },
            y: sign * w[2].exp(),
        })
        .collect();
    let lt: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let le: Vec<f64> = samples.iter().map(|s| s.eps_norm.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.y.abs().ln()).collect();
    let alpha_eps = fit_line(&lt, &le).0;
    let alpha_y = fit_line(&lt, &ly).0;
    let dxs: Vec<f64> = samples.iter().map(|s| chart.delta(x0, s.x).abs()).collect();
    let alpha_x = if dxs.iter().all(|d| *d > 1e-13) {
        let lx: Vec<f64> = dxs.iter().map(|d| d.ln()).collect();
        Some(fit_line(&lt, &lx).0)
    } else {
        None
    };
    Some(BranchTrace {
        x0,
        direction: dir.to_vec(),
        y_sign: sign,
        samples,
        alpha_eps,
        alpha_x,
        alpha_y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairingStatus {
    /// Fewer than four zeros: nothing to pair.
    Empty,
    Paired,
    NotFound,
    /// A count other than 0, 2 or 4.
    UnexpectedCount(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub status: PairingStatus,
    /// The two saddle-node pairs, as indices into the zero list.
    pub pairs: Vec<[usize; 2]>,
    /// Matching of each zero in the first pair to its reflected partner.
    pub reflections: Vec<[usize; 2]>,
    pub x_mismatch: f64,
    pub y_reflection_error: f64,
    pub tolerance: f64,
}

/// Check that four zeros split into two pairs, the second close to the
/// reflection `(x, y) ↦ (x, −y)` of the first.
pub fn kappa_pairing(set: &SolutionSet, rho: f64, tol_factor: f64, chart: &ManifoldChart) -> PairingReport {
    let tolerance = 10.0 * rho.sqrt() * tol_factor;
    let empty = |status| PairingReport {
        status,
        pairs: Vec::new(),
        reflections: Vec::new(),
        x_mismatch: 0.0,
        y_reflection_error: 0.0,
        tolerance,
    };
    let z = &set.zeros;
    match z.len() {
        0 | 2 => return empty(PairingStatus::Empty),
        4 => {}
        n => return empty(PairingStatus::UnexpectedCount(n)),
    }
    let splits = [([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])];
    let mut best: Option<(f64, f64, [usize; 2], [usize; 2], [[usize; 2]; 2])> = None;
    for (p, q) in splits {
        for bij in [[q[0], q[1]], [q[1], q[0]]] {
            let mut xm: f64 = 0.0;
            let mut ym: f64 = 0.0;
            for k in 0..2 {
                let (a, b) = (z[p[k]], z[bij[k]]);
                xm = xm.max(chart.delta(a.x, b.x).abs());
                ym = ym.max((a.y + b.y).abs());
            }
            let score = xm.max(ym);
            if best.is_none_or(|b| score < b.0.max(b.1)) {
                best = Some((xm, ym, p, q, [[p[0], bij[0]], [p[1], bij[1]]]));
            }
        }
    }
    let (xm, ym, p, q, refl) = best.expect("six candidates were scored");
    PairingReport {
        status: if xm.max(ym) <= tolerance {
            PairingStatus::Paired
        } else {
            PairingStatus::NotFound
        },
        pairs: vec![p, q],
        reflections: refl.to_vec(),
        x_mismatch: xm,
        y_reflection_error: ym,
        tolerance,
    }
}

/// Local Jacobian determinant of the field in `(x, y)` at a zero; a small value
/// marks a fold (two zeros about to merge).
pub fn zero_jacobian<F: Field2 + ?Sized>(field: &F, eps: &[f64], x: f64, y: f64) -> f64 {
    let f = |u: f64, v: f64| field.eval(eps, u, v);
    jacobian2(&f, x, y, 1e-7).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::FnField;

    #[test]
    fn inconsistent_system_has_no_zeros() {
        let f = FnField::new(1, ManifoldChart::circle(), |e: &[f64], _x: f64, y: f64| [y * y, y.powi(3) - e[0]]);
        let w = Window::for_chart(&ManifoldChart::circle(), 0.1);
        let s = count_solutions(&f, &[1e-6], &w, &CountOptions { nx: 60, ny: 60, ..Default::default() }).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn small_lattice_rejected() {
        let f = FnField::new(1, ManifoldChart::circle(), |_e: &[f64], _x: f64, y: f64| [y, y]);
        let w = Window::for_chart(&ManifoldChart::circle(), 0.1);
        let r = count_solutions(&f, &[0.0], &w, &CountOptions { nx: 10, ny: 10, ..Default::default() });
        assert!(r.is_err());
    }

    #[test]
    fn twin_zeros_inside_one_cell_are_both_found() {
        // zeros at y = ±1e-4 (closer than a lattice cell), x = 1
        let f = FnField::new(1, ManifoldChart::circle(), |_e: &[f64], x: f64, y: f64| [x - 1.0, y * y - 1e-8]);
        let w = Window::for_chart(&ManifoldChart::circle(), 0.3);
        let s = count_solutions(&f, &[0.0], &w, &CountOptions::default()).unwrap();
        assert_eq!(s.count(), 2, "{:?}", s.zeros);
        assert!(s.zeros.iter().all(|z| z.residual < 1e-10));
    }

    #[test]
    fn pairing_of_reflected_zeros() {
        let mk = |x: f64, y: f64| Zero { x, y, residual: 0.0, basin_ok: true };
        let set = SolutionSet {
            eps: vec![0.0, 0.0],
            zeros: vec![mk(0.10, 0.05), mk(0.11, -0.049), mk(0.30, 0.02), mk(0.301, -0.021)],
            dedup_radius: 1e-9,
            warnings: vec![],
        };
        let r = kappa_pairing(&set, 1e-2, 0.1, &ManifoldChart::circle());
        assert_eq!(r.status, PairingStatus::Paired);
        let two = SolutionSet { zeros: set.zeros[..2].to_vec(), ..set };
        assert_eq!(kappa_pairing(&two, 1e-2, 0.1, &ManifoldChart::circle()).status, PairingStatus::Empty);
    }
}
