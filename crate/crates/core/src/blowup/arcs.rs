//! Bifurcation arcs: the folds of the blown-up discriminant near each source point,
//! sampled along a radius schedule.
//!
//! At radius `ρ` a direction `θ` lies on the discriminant when the blown-up
//! resultant `R̄(ρ, θ, x) = R_m(a(ρ s, x)) / ρ^m` vanishes for some `x`. The
//! boundary of that set in `θ` is where `R̄ = ∂x R̄ = 0`; these points, followed
//! as `ρ → 0`, are the arcs. Intersection arcs (`m = 2`) are instead the
//! double points `ā1 = ā2 = 0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::curves::{find_fold_points, solve_on_torus, trace_zero_curve, TorusDomain};
use super::{direction, ExpansionData};
use crate::deformation::DeformationParams;
use crate::error::{Error, Result};
use crate::numerics::{angle_diff, d1, loglog_slope, newton2, wrap_angle};
use crate::resultant::resultant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcKind {
    /// Two branches tangent to the same direction at a fold of `B1` (`m = 2`).
    FoldPairCusp,
    EndArc,
    IntersectionArc,
    HysteresisArc,
    /// One branch of the pair attached to a fold of `B0` (`m ≥ 3`).
    FoldArc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceKind {
    Fold,
    /// `b0 = b̄0 = 0` (the `m = 2` end points are the same condition on `(b1, b3)`).
    EndPoint,
    Intersection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcSource {
    pub kind: SourceKind,
    pub theta: f64,
    pub x: f64,
    /// Rows of `b(x) s` at the source.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcSample {
    pub rho: f64,
    pub theta: f64,
    pub x: f64,
    pub eps: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationArc {
    pub kind: ArcKind,
    /// Arcs born from the same antipodal pair of sources share a group.
    pub group: usize,
    pub origin_direction: [f64; 2],
    pub source: ArcSource,
    /// Predicted contact order `(m+1)/m` with the origin direction. `None` for
    /// the `m = 2` end and intersection arcs, which are smooth arcs with no such prediction.
    pub contact_order: Option<f64>,
    /// Log-log fit of `|ε⊥|` against `|ε∥|` per branch; `None` for straight rays.
    pub fitted_orders: Vec<Option<f64>>,
    /// Sample polylines, ordered by decreasing `ρ`. One branch except for `FoldPairCusp`.
    pub branches: Vec<Vec<ArcSample>>,
    /// Side of the origin direction the arc bends to (sign of `θ - θ0`), per branch.
    pub sides: Vec<f64>,
    pub annotations: Vec<String>,
}

impl BifurcationArc {
    pub fn origin_angle(&self) -> f64 {
        wrap_angle(self.origin_direction[1].atan2(self.origin_direction[0]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcOptions {
    pub rho_schedule: Vec<f64>,
    /// Lattice size for curve tracing and source location on the torus.
    pub grid: usize,
    pub domain: TorusDomain,
    /// Lattice size of the local search box around each source.
    pub box_grid: usize,
}

impl ArcOptions {
    /// `ρ = 1e-2 · 2^-k`, `k = 0..=10`.
    pub fn default_schedule() -> Vec<f64> {
        (0..=10).map(|k| 1e-2 * 0.5f64.powi(k)).collect()
    }
}

impl Default for ArcOptions {
    fn default() -> Self {
        Self {
            rho_schedule: Self::default_schedule(),
            grid: 200,
            domain: TorusDomain::circle(),
            box_grid: 41,
        }
    }
}

/// `R̄(ρ, θ, x)`, evaluated on the weighted rescaling `a_i ↦ λ^i ā_i`,
/// `ā_j ↦ λ^j ā_j` with `λ = ρ^{1/m}`. This keeps the Sylvester matrix O(1)
/// and equals `R_m(a(ρs, x)) / ρ^m` exactly.
pub fn blown_up_resultant(m: usize, data: &ExpansionData, rho: f64, theta: f64, x: f64) -> f64 {
    let ab = data.abar(rho, &direction(theta), x);
    let lam = rho.powf(1.0 / m as f64);
    let a = (0..m).map(|i| ab[i] * lam.powi(i as i32)).collect();
    let abar = (0..m - 1).map(|j| ab[m + j] * lam.powi(j as i32)).collect();
    resultant(&DeformationParams { m, a, abar })
}

/// Isolated zeros of a planar map in the box `center ± half`, each component
/// normalised by its maximum on the box lattice.
fn solve_in_box<F: Fn(f64, f64) -> [f64; 2]>(f: &F, center: [f64; 2], half: f64, n: usize) -> Vec<[f64; 2]> {
    let n = n.max(5) | 1;
    let coord = |k: usize| -half + 2.0 * half * k as f64 / (n - 1) as f64;
    let mut vals = vec![[0.0; 2]; n * n];
    let mut sc = [0.0f64; 2];
    for i in 0..n {
        for j in 0..n {
            let v = f(center[0] + coord(i), center[1] + coord(j));
            vals[i * n + j] = v;
            for c in 0..2 {
                if v[c].is_finite() {
                    sc[c] = sc[c].max(v[c].abs());
                }
            }
        }
    }
    if sc[0] == 0.0 || sc[1] == 0.0 {
        return Vec::new();
    }
    let g = |u: f64, v: f64| {
        let r = f(u, v);
        [r[0] / sc[0], r[1] / sc[1]]
    };
    let norm = |v: [f64; 2]| (v[0] / sc[0]).hypot(v[1] / sc[1]);
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = norm(vals[i * n + j]);
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if norm(vals[ii as usize * n + jj as usize]) < c {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let seed = [center[0] + coord(i), center[1] + coord(j)];
            if let Some(r) = newton2(&g, seed, 1e-9, 60, 1e-6 * half) {
                let p = r.point;
                let inside = (p[0] - center[0]).abs() <= half * 1.0001 && (p[1] - center[1]).abs() <= half * 1.0001;
                if inside && !out.iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-4 * half) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Follow the solutions near a source across the schedule, from the smallest
/// radius upward. Points are matched by nearest neighbour in coordinates scaled
/// by `ρ^{1/m}`; a track ends when it finds no partner and an unmatched point
/// starts a new track.
fn link_tracks(
    source: [f64; 2],
    m: usize,
    per_rho: &[(f64, Vec<[f64; 2]>)],
) -> Vec<Vec<(f64, [f64; 2])>> {
    let mut order: Vec<usize> = (0..per_rho.len()).collect();
    order.sort_by(|&a, &b| per_rho[a].0.total_cmp(&per_rho[b].0));
    let scaled = |rho: f64, p: [f64; 2]| {
        let s = rho.powf(1.0 / m as f64);
        [(p[0] - source[0]) / s, (p[1] - source[1]) / s]
    };
    let mut tracks: Vec<Vec<(f64, [f64; 2])>> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    for &k in &order {
        let (rho, pts) = (per_rho[k].0, &per_rho[k].1);
        let mut taken = vec![false; pts.len()];
        for (t, track) in tracks.iter_mut().enumerate() {
            if !alive[t] {
                continue;
            }
            let (r0, p0) = *track.last().expect("tracks are never empty");
            let a = scaled(r0, p0);
            let best = pts
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, p)| {
                    let b = scaled(rho, *p);
                    (i, (a[0] - b[0]).hypot(a[1] - b[1]))
                })
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((i, d)) if d < 1.0 + a[0].hypot(a[1]) => {
                    taken[i] = true;
                    track.push((rho, pts[i]));
                }
                _ => alive[t] = false,
            }
        }
        for (i, p) in pts.iter().enumerate() {
            if !taken[i] {
                tracks.push(vec![(rho, *p)]);
                alive.push(true);
            }
        }
    }
    for t in &mut tracks {
        t.reverse();
    }
    tracks
}

fn to_samples(track: &[(f64, [f64; 2])]) -> Vec<ArcSample> {
    track
        .iter()
        .map(|&(rho, p)| {
            let s = direction(p[0]);
            ArcSample {
                rho,
                theta: wrap_angle(p[0]),
                x: p[1],
                eps: [rho * s[0], rho * s[1]],
            }
        })
        .collect()
}

/// Exponent of `|ε⊥|` against `|ε∥|` relative to `s0`, dropping the two largest radii.
pub fn fit_contact_order(samples: &[ArcSample], theta0: f64) -> Option<f64> {
    let mut pts: Vec<&ArcSample> = samples.iter().collect();
    pts.sort_by(|a, b| b.rho.total_cmp(&a.rho));
    let pts = if pts.len() >= 6 { &pts[2..] } else { &pts[..] };
    let s0 = direction(theta0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in pts {
        let par = p.eps[0] * s0[0] + p.eps[1] * s0[1];
        let perp = -p.eps[0] * s0[1] + p.eps[1] * s0[0];
        if par.abs() > 0.0 && perp.abs() > 1e-15 * p.rho {
            xs.push(par.abs());
            ys.push(perp.abs());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    Some(loglog_slope(&xs, &ys).0)
}

fn side(samples: &[ArcSample], theta0: f64) -> f64 {
    let s: f64 = samples.iter().map(|p| angle_diff(theta0, p.theta)).sum();
    if s.abs() < 1e-14 {
        0.0
    } else {
        s.signum()
    }
}

struct Source {
    kind: SourceKind,
    theta: f64,
    x: f64,
    group: usize,
    annotations: Vec<String>,
}

fn group_antipodes(points: Vec<(f64, f64)>, kind: SourceKind, next_group: &mut usize, domain: &TorusDomain) -> Vec<Source> {
    let mut out: Vec<Source> = Vec::new();
    for (th, x) in points {
        let partner = out
            .iter()
            .find(|s| domain.dist([wrap_angle(s.theta + PI), s.x], [th, x]) < 1e-5)
            .map(|s| s.group);
        let group = partner.unwrap_or_else(|| {
            *next_group += 1;
            *next_group - 1
        });
        out.push(Source {
            kind,
            theta: th,
            x,
            group,
            annotations: Vec::new(),
        });
    }
    out
}

fn arc_kind(m: usize, src: SourceKind) -> ArcKind {
    match (src, m) {
        (SourceKind::Fold, 2) => ArcKind::FoldPairCusp,
        (SourceKind::Fold, _) => ArcKind::FoldArc,
        (SourceKind::EndPoint, m) if m % 2 == 1 => ArcKind::HysteresisArc,
        (SourceKind::EndPoint, _) => ArcKind::EndArc,
        (SourceKind::Intersection, _) => ArcKind::IntersectionArc,
    }
}

fn arcs_general(m: usize, data: &ExpansionData, opts: &ArcOptions) -> Result<Vec<BifurcationArc>> {
    if data.q != 2 {
        return Err(Error::UnsupportedDimension(format!("arcs need q = 2, got q = {}", data.q)));
    }
    if data.r_dim != 2 * m - 1 {
        return Err(Error::InvalidParams(format!(
            "expansion has {} rows, expected {} for m = {m}",
            data.r_dim,
            2 * m - 1
        )));
    }
    if opts.rho_schedule.is_empty() || opts.rho_schedule.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParams("radius schedule must be non-empty and positive".into()));
    }
    let domain = opts.domain;
    let row = |k: usize| move |th: f64, x: f64| data.bs(&direction(th), x)[k];
    let scale_at = |x: f64| (data.b)(x).norm().max(1.0);

    // sources: folds of B = {row 0 = 0}, end points (rows 0 and m), and for m = 2 intersections (rows 0 and 1)
    let b_first = row(0);
    let curves = trace_zero_curve(&b_first, &domain, opts.grid);
    let folds = find_fold_points(&b_first, &curves, &domain, 1e-12);
    let mut next_group = 0;
    let mut sources = group_antipodes(
        folds.iter().map(|f| (f.theta, f.x)).collect(),
        SourceKind::Fold,
        &mut next_group,
        &domain,
    );
    for (s, f) in sources.iter_mut().zip(&folds) {
        if f.degenerate {
            s.annotations.push(format!("UnresolvedSingularity: second x-derivative {:.2e} at the fold", f.fxx));
        }
    }
    let ends = solve_on_torus(&|th, x| { let v = data.bs(&direction(th), x); [v[0], v[m]] }, &domain, opts.grid.min(160), 1e-12);
    let ends: Vec<(f64, f64)> = ends
        .into_iter()
        .filter(|&(th, x)| data.bs(&direction(th), x)[1].abs() > 1e-6 * scale_at(x))
        .collect();
    let mut end_sources = group_antipodes(ends, SourceKind::EndPoint, &mut next_group, &domain);
    if m == 2 {
        for s in &mut end_sources {
            // the quantity 2 b1 c1 + b2² b3 must vary transversally along x
            let dir = direction(s.theta);
            let phi = |x: f64| {
                let b = data.bs(&dir, x);
                let c = data.css(&dir, x);
                2.0 * b[0] * c[0] + b[1] * b[1] * b[2]
            };
            let dphi = d1(phi, s.x, 1e-4);
            if dphi.abs() < 1e-6 * scale_at(s.x) {
                s.annotations.push(format!("transversality at the end point fails: derivative {dphi:.2e}"));
            }
        }
    }
    sources.extend(end_sources);
    if m == 2 {
        let inter = solve_on_torus(&|th, x| { let v = data.bs(&direction(th), x); [v[0], v[1]] }, &domain, opts.grid.min(160), 1e-12);
        let inter: Vec<(f64, f64)> = inter
            .into_iter()
            .filter(|&(th, x)| data.bs(&direction(th), x)[2] < -1e-6 * scale_at(x))
            .collect();
        sources.extend(group_antipodes(inter, SourceKind::Intersection, &mut next_group, &domain));
    }

    let hx = 2e-2;
    let arcs: Vec<Vec<BifurcationArc>> = sources
        .par_iter()
        .map(|src| {
            let center = [src.theta, src.x];
            let per_rho: Vec<(f64, Vec<[f64; 2]>)> = opts
                .rho_schedule
                .iter()
                .map(|&rho| {
                    let half = (4.0 * rho.powf(1.0 / m as f64)).min(0.4);
                    let pts = if src.kind == SourceKind::Intersection {
                        let f = |th: f64, x: f64| {
                            let a = data.abar(rho, &direction(th), x);
                            [a[0], a[1]]
                        };
                        solve_in_box(&f, center, half, opts.box_grid)
                    } else {
                        let h = hx * half;
                        let r = |th: f64, x: f64| blown_up_resultant(m, data, rho, th, x);
                        let f = |th: f64, x: f64| [r(th, x), d1(|u| r(th, u), x, h)];
                        solve_in_box(&f, center, half, opts.box_grid)
                    };
                    let pts = pts.into_iter().filter(|p| domain.x_periodic || (domain.x_range[0]..=domain.x_range[1]).contains(&p[1])).collect();
                    (rho, pts)
                })
                .collect();
            let tracks = link_tracks(center, m, &per_rho);
            let residuals = data.bs(&direction(src.theta), src.x);
            let source = ArcSource {
                kind: src.kind,
                theta: src.theta,
                x: src.x,
                residuals,
            };
            let kind = arc_kind(m, src.kind);
            let make = |branches: Vec<Vec<ArcSample>>| {
                let fitted_orders = branches.iter().map(|b| fit_contact_order(b, src.theta)).collect();
                let sides = branches.iter().map(|b| side(b, src.theta)).collect();
                BifurcationArc {
                    kind,
                    group: src.group,
                    origin_direction: direction(src.theta),
                    source: source.clone(),
                    contact_order: (m > 2 || kind == ArcKind::FoldPairCusp).then(|| (m as f64 + 1.0) / m as f64),
                    fitted_orders,
                    branches,
                    sides,
                    annotations: src.annotations.clone(),
                }
            };
            let tracks: Vec<Vec<ArcSample>> = tracks.iter().filter(|t| t.len() >= 3).map(|t| to_samples(t)).collect();
            match kind {
                ArcKind::FoldPairCusp if !tracks.is_empty() => {
                    let mut a = make(tracks);
                    if a.branches.len() != 2 {
                        a.annotations.push(format!("expected two cusp branches, found {}", a.branches.len()));
                    }
                    vec![a]
                }
                ArcKind::FoldPairCusp => Vec::new(),
                _ => tracks.into_iter().map(|t| make(vec![t])).collect(),
            }
        })
        .collect();
    let mut arcs: Vec<BifurcationArc> = arcs.into_iter().flatten().collect();
    arcs.sort_by(|a, b| a.group.cmp(&b.group).then(a.source.theta.total_cmp(&b.source.theta)));
    Ok(arcs)
}

/// Arcs for `m = 2`: fold-pair cusps at folds of `B1`, end arcs at end points and
/// intersection arcs at intersection points.
pub fn bifurcation_arcs_m2(data: &ExpansionData, opts: &ArcOptions) -> Result<Vec<BifurcationArc>> {
    arcs_general(2, data, opts)
}

/// Arcs for `m ≥ 3`: fold arcs at folds of `B0` and end or hysteresis arcs at
/// points with `b0 = b̄0 = 0`, `b1 ≠ 0`.
pub fn bifurcation_arcs_m(m: usize, data: &ExpansionData, opts: &ArcOptions) -> Result<Vec<BifurcationArc>> {
    if m < 3 {
        return Err(Error::InvalidParams(format!("bifurcation_arcs_m needs m >= 3, got {m}")));
    }
    arcs_general(m, data, opts)
}
