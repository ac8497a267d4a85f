//! Numerical Lyapunov-Schmidt reduction along a curve of equilibria.
//!
//! At each point `z(x)` of the equilibrium curve the linearisation `DF_0`
//! is split by an SVD. With `T` the unit tangent:
//!
//! * `K` spans the part of `ker DF_0` orthogonal to `T`,
//! * `L` is an orthonormal basis of `{T, K}^⊥`,
//! * `R` spans the range of `DF_0` (left singular vectors of the `N-2`
//!   largest singular values),
//! * `P` is the unit vector in `R^⊥ ∩ T^⊥`.
//!
//! The ambient field at `z(x) + yK + Lσ` is written in the basis
//! `[T, P, R]`. The slave equation sets the `R` coordinates to zero, and the
//! `(T, P)` coordinates form the two-component reduced field.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{Field2, ManifoldChart};
use crate::error::{Error, Result};
use crate::numerics::richardson_diff;

pub type AmbientFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A vector field `F(eps, z)` on `ℝᴺ` with a known curve of equilibria `z(x)` at `eps = 0`.
#[derive(Clone)]
pub struct AmbientSystem {
    pub n: usize,
    pub q: usize,
    pub f: AmbientFn,
    pub s: CurveFn,
    pub chart: ManifoldChart,
}

impl fmt::Debug for AmbientSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbientSystem")
            .field("n", &self.n)
            .field("q", &self.q)
            .field("chart", &self.chart)
            .finish_non_exhaustive()
    }
}

const FD_H: f64 = 1e-3;

impl AmbientSystem {
    pub fn new(n: usize, q: usize, f: AmbientFn, s: CurveFn, chart: ManifoldChart) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("ambient dimension {n} < 2")));
        }
        let sys = Self { n, q, f, s, chart };
        let zero = vec![0.0; q];
        let [lo, hi] = chart.range;
        for k in 0..16 {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / 16.0;
            let z = (sys.s)(x);
            if z.len() != n {
                return Err(Error::InvalidParams(format!(
                    "curve map returns {} coordinates, expected {n}",
                    z.len()
                )));
            }
            let r = norm(&(sys.f)(&zero, &z));
            if r > 1e-10 {
                return Err(Error::ModelInconsistency(format!(
                    "z({x:.4}) is not an equilibrium at eps = 0 (|F| = {r:.3e})"
                )));
            }
        }
        Ok(sys)
    }

    pub fn eval(&self, eps: &[f64], z: &[f64]) -> Vec<f64> {
        (self.f)(eps, z)
    }

    /// `DF_eps(z)` by 4th-order central differences.
    pub fn jacobian(&self, eps: &[f64], z: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut j = DMatrix::<f64>::zeros(n, n);
        let mut w = z.to_vec();
        for c in 0..n {
            let mut col = vec![0.0; n];
            for (coef, off) in [(-1.0, 2.0), (8.0, 1.0), (-8.0, -1.0), (1.0, -2.0)] {
                w[c] = z[c] + off * FD_H;
                let v = (self.f)(eps, &w);
                for r in 0..n {
                    col[r] += coef * v[r];
                }
            }
            w[c] = z[c];
            for r in 0..n {
                j[(r, c)] = col[r] / (12.0 * FD_H);
            }
        }
        j
    }

    /// Unit tangent of the equilibrium curve.
    pub fn tangent(&self, x: f64) -> Vec<f64> {
        let t: Vec<f64> = (0..self.n)
            .map(|i| crate::numerics::d1(|u| (self.s)(u)[i], x, FD_H))
            .collect();
        let nt = norm(&t);
        t.iter().map(|v| v / nt).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Splitting of `ℝᴺ` at one point of the curve.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub x: f64,
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    pub k: Vec<f64>,
    /// Columns span `L`.
    #[serde(skip)]
    pub l: DMatrix<f64>,
    pub p: Vec<f64>,
    /// Columns span `R`.
    #[serde(skip)]
    pub r: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub condition: f64,
    /// `[T, P, R]`, inverted once.
    #[serde(skip)]
    basis_inv: DMatrix<f64>,
}

impl Frame {
    /// Coordinates of `v` in the basis `[T, P, R]`.
    pub fn coordinates(&self, v: &[f64]) -> DVector<f64> {
        &self.basis_inv * DVector::from_column_slice(v)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn orthogonality_residual(&self) -> f64 {
        let n = self.z.len();
        let mut cols: Vec<Vec<f64>> = vec![self.t.clone(), self.k.clone()];
        for c in 0..self.l.ncols() {
            cols.push(self.l.column(c).iter().copied().collect());
        }
        let mut worst: f64 = 0.0;
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((Self::dot(&cols[i], &cols[j]) - target).abs());
            }
        }
        let _ = n;
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityBox {
    pub y_max: f64,
    pub eps_max: f64,
}

impl Default for ValidityBox {
    fn default() -> Self {
        Self {
            y_max: 0.2,
            eps_max: 0.05,
        }
    }
}

/// Result of [`build_reduction`]: frames on a sample grid plus a frame cache
/// for off-grid queries.
pub struct LSReduction {
    pub system: AmbientSystem,
    pub samples: Vec<Frame>,
    pub validity: ValidityBox,
    pub tol: f64,
    pub warnings: Vec<String>,
    cache: Mutex<HashMap<u64, Arc<Frame>>>,
}

impl fmt::Debug for LSReduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LSReduction")
            .field("system", &self.system)
            .field("samples", &self.samples.len())
            .field("validity", &self.validity)
            .field("warnings", &self.warnings)
            .finish_non_exhaustive()
    }
}

struct RawFrame {
    frame: Frame,
    warning: Option<String>,
}

/// Relative singular-value threshold for kernel detection.
const KERNEL_REL: f64 = 1e-8;

fn raw_frame(sys: &AmbientSystem, x: f64) -> Result<RawFrame> {
    let n = sys.n;
    let z = (sys.s)(x);
    let zero = vec![0.0; sys.q];
    let j = sys.jacobian(&zero, &z);
    let jn = j.norm().max(1e-300);
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    // nalgebra does not promise an ordering; sort descending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let thresh = KERNEL_REL * jn;
    let found = sv.iter().filter(|&&s| s < thresh).count();
    let gap_ok = n < 3 || sv[n - 3] > 10.0 * thresh;
    if found != 2 || !gap_ok {
        return Err(Error::ConstantCorankViolation {
            x,
            found,
            singular_values: sv,
        });
    }
    let mut warning = None;
    if n >= 3 && sv[n - 3] < 1e3 * thresh {
        warning = Some(format!(
            "x = {x:.6}: weak spectral gap (smallest nonzero singular value {:.3e})",
            sv[n - 3]
        ));
    }
    let t = sys.tangent(x);
    let kern: Vec<Vec<f64>> = order[n - 2..]
        .iter()
        .map(|&i| vt.row(i).iter().copied().collect())
        .collect();
    // kernel vector orthogonal to T: the better conditioned of the two projections
    let proj = |v: &Vec<f64>| {
        let d = Frame::dot(v, &t);
        v.iter().zip(&t).map(|(a, b)| a - d * b).collect::<Vec<f64>>()
    };
    let c0 = proj(&kern[0]);
    let c1 = proj(&kern[1]);
    let kv = if norm(&c0) >= norm(&c1) { c0 } else { c1 };
    let nk = norm(&kv);
    let k: Vec<f64> = kv.iter().map(|v| v / nk).collect();

    // L: orthonormal complement of {T, K}
    let l = complement(n, &[t.clone(), k.clone()]);

    let rng: Vec<Vec<f64>> = order[..n - 2]
        .iter()
        .map(|&i| u.column(i).iter().copied().collect())
        .collect();
    let coker: Vec<Vec<f64>> = order[n - 2..]
        .iter()
        .map(|&i| u.column(i).iter().copied().collect())
        .collect();
    // P in span(coker) orthogonal to T
    let a0 = Frame::dot(&coker[0], &t);
    let a1 = Frame::dot(&coker[1], &t);
    let pv: Vec<f64> = coker[0]
        .iter()
        .zip(&coker[1])
        .map(|(c0, c1)| a1 * c0 - a0 * c1)
        .collect();
    let pv = if norm(&pv) < 1e-12 { coker[0].clone() } else { pv };
    let np = norm(&pv);
    let p: Vec<f64> = pv.iter().map(|v| v / np).collect();

    let mut r = DMatrix::<f64>::zeros(n, n - 2);
    for (c, col) in rng.iter().enumerate() {
        r.set_column(c, &DVector::from_column_slice(col));
    }
    let frame = assemble(x, z, t, k, l, p, r, sv)?;
    Ok(RawFrame { frame, warning })
}

fn complement(n: usize, basis: &[Vec<f64>]) -> DMatrix<f64> {
    let mut vecs: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    for e in 0..n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        for b in &vecs {
            let d = Frame::dot(&v, b);
            for i in 0..n {
                v[i] -= d * b[i];
            }
        }
        // re-orthogonalise once for stability
        for b in &vecs {
            let d = Frame::dot(&v, b);
            for i in 0..n {
                v[i] -= d * b[i];
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            let u: Vec<f64> = v.iter().map(|a| a / nv).collect();
            vecs.push(u.clone());
            out.push(u);
        }
        if out.len() + basis.len() == n {
            break;
        }
    }
    let mut m = DMatrix::<f64>::zeros(n, out.len());
    for (c, col) in out.iter().enumerate() {
        m.set_column(c, &DVector::from_column_slice(col));
    }
    m
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    x: f64,
    z: Vec<f64>,
    t: Vec<f64>,
    k: Vec<f64>,
    l: DMatrix<f64>,
    p: Vec<f64>,
    r: DMatrix<f64>,
    sv: Vec<f64>,
) -> Result<Frame> {
    let n = z.len();
    let mut basis = DMatrix::<f64>::zeros(n, n);
    basis.set_column(0, &DVector::from_column_slice(&t));
    basis.set_column(1, &DVector::from_column_slice(&p));
    for c in 0..r.ncols() {
        basis.set_column(2 + c, &r.column(c));
    }
    let bsv = basis.clone().svd(false, false).singular_values;
    let smax = bsv.iter().cloned().fold(0.0, f64::max);
    let smin = bsv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = smax / smin.max(1e-300);
    if condition > 1e6 {
        return Err(Error::ModelInconsistency(format!(
            "x = {x:.6}: tangent, cokernel and range do not form a direct sum (condition {condition:.3e})"
        )));
    }
    let basis_inv = basis
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular [T, P, R] basis".into()))?;
    Ok(Frame {
        x,
        z,
        t,
        k,
        l,
        p,
        r,
        singular_values: sv,
        condition,
        basis_inv,
    })
}

fn align_to(frame: &mut Frame, reference: &Frame) {
    if Frame::dot(&frame.k, &reference.k) < 0.0 {
        frame.k.iter_mut().for_each(|v| *v = -*v);
    }
    if Frame::dot(&frame.p, &reference.p) < 0.0 {
        frame.p.iter_mut().for_each(|v| *v = -*v);
        frame.basis_inv.row_mut(1).neg_mut();
    }
}

/// Sample the frames along the chart, align orientations and check that the
/// kernel and cokernel line bundles are trivial around a circle.
pub fn build_reduction(sys: &AmbientSystem, n_samples: usize, tol: f64) -> Result<LSReduction> {
    if n_samples < 4 {
        return Err(Error::InvalidParams("need at least 4 samples".into()));
    }
    let [lo, hi] = sys.chart.range;
    let periodic = sys.chart.periodic();
    let xs: Vec<f64> = (0..n_samples)
        .map(|i| {
            if periodic {
                lo + (hi - lo) * i as f64 / n_samples as f64
            } else {
                lo + (hi - lo) * i as f64 / (n_samples - 1) as f64
            }
        })
        .collect();
    let raws: Vec<RawFrame> = xs
        .par_iter()
        .map(|&x| raw_frame(sys, x))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let mut samples: Vec<Frame> = Vec::with_capacity(n_samples);
    for raw in raws {
        if let Some(w) = raw.warning {
            warnings.push(w);
        }
        let mut f = raw.frame;
        if let Some(prev) = samples.last() {
            align_to(&mut f, prev);
        }
        samples.push(f);
    }
    if periodic {
        let first = &samples[0];
        let last = samples.last().expect("nonempty");
        if Frame::dot(&first.k, &last.k) < 0.0 || Frame::dot(&first.p, &last.p) < 0.0 {
            return Err(Error::NontrivialBundle);
        }
    }
    for f in &samples {
        let res = f.orthogonality_residual();
        if res > 1e-10 {
            warnings.push(format!("x = {:.6}: basis orthogonality residual {res:.3e}", f.x));
        }
    }
    Ok(LSReduction {
        system: sys.clone(),
        samples,
        validity: ValidityBox::default(),
        tol,
        warnings,
        cache: Mutex::new(HashMap::new()),
    })
}

const CACHE_LIMIT: usize = 1 << 16;

impl LSReduction {
    pub fn with_validity(mut self, validity: ValidityBox) -> Self {
        self.validity = validity;
        self
    }

    fn nearest_sample(&self, x: f64) -> &Frame {
        let chart = self.system.chart;
        self.samples
            .iter()
            .min_by(|a, b| {
                chart
                    .delta(a.x, x)
                    .abs()
                    .total_cmp(&chart.delta(b.x, x).abs())
            })
            .expect("nonempty samples")
    }

    /// Frame at an arbitrary chart point, oriented consistently with the samples.
    pub fn frame_at(&self, x: f64) -> Result<Arc<Frame>> {
        let x = self.system.chart.normalize(x)?;
        let key = x.to_bits();
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let mut f = raw_frame(&self.system, x)?.frame;
        let near = self.nearest_sample(x);
        align_to(&mut f, near);
        // keep L close to the neighbouring sample's basis
        let proj = &f.l * (f.l.transpose() * &near.l);
        let qr = proj.qr();
        let mut lq = qr.q();
        let rdiag = qr.r();
        for c in 0..lq.ncols() {
            if rdiag[(c, c)] < 0.0 {
                lq.column_mut(c).neg_mut();
            }
        }
        f.l = lq;
        let f = Arc::new(f);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, f.clone());
        Ok(f)
    }

    fn point(frame: &Frame, y: f64, sigma: &DVector<f64>) -> Vec<f64> {
        let mut z = frame.z.clone();
        for i in 0..z.len() {
            z[i] += y * frame.k[i];
        }
        let ls = &frame.l * sigma;
        for i in 0..z.len() {
            z[i] += ls[i];
        }
        z
    }

    fn check_box(&self, eps: &[f64], x: f64, y: f64) -> Result<()> {
        let en = norm(eps);
        if y.abs() > self.validity.y_max || en > self.validity.eps_max {
            return Err(Error::OutsideValidity {
                eps: eps.to_vec(),
                x,
                y,
                reason: format!(
                    "outside validity box |y| <= {}, |eps| <= {}",
                    self.validity.y_max, self.validity.eps_max
                ),
            });
        }
        Ok(())
    }

    fn slave_with_frame(&self, frame: &Frame, eps: &[f64], y: f64, tol: f64) -> Result<DVector<f64>> {
        let n = self.system.n;
        let nr = n - 2;
        let resid = |s: &DVector<f64>| -> DVector<f64> {
            let z = Self::point(frame, y, s);
            let c = frame.coordinates(&self.system.eval(eps, &z));
            c.rows(2, nr).into_owned()
        };
        let mut s = DVector::<f64>::zeros(nr);
        let mut r = resid(&s);
        let h = 1e-7;
        for _ in 0..50 {
            if r.norm() <= tol {
                return Ok(s);
            }
            let mut jac = DMatrix::<f64>::zeros(nr, nr);
            for c in 0..nr {
                let mut sp = s.clone();
                let mut sm = s.clone();
                sp[c] += h;
                sm[c] -= h;
                jac.set_column(c, &((resid(&sp) - resid(&sm)) / (2.0 * h)));
            }
            let Some(step) = jac.lu().solve(&(-&r)) else {
                break;
            };
            let sn = &s + &step;
            let rn = resid(&sn);
            if !rn.norm().is_finite() {
                break;
            }
            let stalled = step.norm() <= 1e-15 * (1.0 + s.norm());
            s = sn;
            r = rn;
            if stalled {
                break;
            }
        }
        // accept round-off-limited convergence
        let scale = 1.0 + frame.z.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if r.norm() <= tol.max(1e-13 * scale) {
            Ok(s)
        } else {
            Err(Error::OutsideValidity {
                eps: eps.to_vec(),
                x: frame.x,
                y,
                reason: format!("Newton residual {:.3e} after 50 iterations", r.norm()),
            })
        }
    }

    /// `σ^eps(x, y)` in `L` coordinates.
    pub fn solve_slave(&self, eps: &[f64], x: f64, y: f64, tol: f64) -> Result<DVector<f64>> {
        self.check_box(eps, x, y)?;
        let frame = self.frame_at(x)?;
        self.slave_with_frame(&frame, eps, y, tol)
    }

    /// Ambient point `z(x) + yK + Lσ` for the converged slave solution.
    pub fn reconstruct(&self, eps: &[f64], x: f64, y: f64) -> Result<Vec<f64>> {
        self.check_box(eps, x, y)?;
        let frame = self.frame_at(x)?;
        let s = self.slave_with_frame(&frame, eps, y, 1e-12)?;
        Ok(Self::point(&frame, y, &s))
    }

    /// `(T, P)` coordinates of the ambient field on the slave graph.
    pub fn reduced_field(&self, eps: &[f64], x: f64, y: f64) -> Result<[f64; 2]> {
        self.check_box(eps, x, y)?;
        let frame = self.frame_at(x)?;
        let s = self.slave_with_frame(&frame, eps, y, 1e-12)?;
        let z = Self::point(&frame, y, &s);
        let c = frame.coordinates(&self.system.eval(eps, &z));
        Ok([c[0], c[1]])
    }
}

/// `LSReduction` viewed as a reduced field; failures evaluate to NaN so
/// root finders can discard the point.
impl Field2 for LSReduction {
    fn eval(&self, eps: &[f64], x: f64, y: f64) -> [f64; 2] {
        self.reduced_field(eps, x, y).unwrap_or([f64::NAN; 2])
    }
    fn q(&self) -> usize {
        self.system.q
    }
    fn chart(&self) -> ManifoldChart {
        self.system.chart
    }
}

/// Taylor data of the reduced field at one point of the curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedBranchData {
    pub x: f64,
    pub m: [usize; 2],
    /// `r_i(x, 0)`.
    pub r: [f64; 2],
    /// `∂F_i/∂eps_j` at `(0, x, 0)`, indexed `[component][j]`.
    pub g: [Vec<f64>; 2],
}

const MAX_ORDER: usize = 6;

/// Exponents `m_i` and coefficients `r_i`, `g_i` read off by differencing.
pub fn extract_branch_data(
    red: &LSReduction,
    x: f64,
    y_box: f64,
    eps_probe: f64,
) -> Result<ExtractedBranchData> {
    let q = red.system.q;
    let zero = vec![0.0; q];
    let h = 0.25 * y_box;
    let mut err: Option<Error> = None;
    let comp = |i: usize, y: f64| -> f64 {
        red.reduced_field(&zero, x, y).map(|v| v[i]).unwrap_or(f64::NAN)
    };
    let scale = (0..=8)
        .map(|k| -y_box + 2.0 * y_box * k as f64 / 8.0)
        .flat_map(|y| (0..2).map(move |i| (i, y)))
        .map(|(i, y)| comp(i, y).abs())
        .fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::OutsideValidity {
            eps: zero.clone(),
            x,
            y: y_box,
            reason: "reduced field undefined on the probe box".into(),
        });
    }
    let mut m = [0usize; 2];
    let mut r = [0.0; 2];
    for i in 0..2 {
        let f = |y: f64| comp(i, y);
        let mut found = None;
        let mut fact = 1.0;
        for k in 1..=MAX_ORDER {
            fact *= k as f64;
            let dk = richardson_diff(&f, 0.0, k, h);
            if (dk / fact).abs() * y_box.powi(k as i32) > 1e-6 * scale {
                found = Some((k, dk / fact));
                break;
            }
        }
        match found {
            Some((k, c)) => {
                m[i] = k;
                r[i] = c;
            }
            None => {
                err.get_or_insert(Error::FlatComponent { component: i + 1, x });
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let mut g = [vec![0.0; q], vec![0.0; q]];
    for j in 0..q {
        let mut ep = zero.clone();
        let mut em = zero.clone();
        ep[j] = eps_probe;
        em[j] = -eps_probe;
        let fp = red.reduced_field(&ep, x, 0.0)?;
        let fm = red.reduced_field(&em, x, 0.0)?;
        let mut e2p = zero.clone();
        let mut e2m = zero.clone();
        e2p[j] = 2.0 * eps_probe;
        e2m[j] = -2.0 * eps_probe;
        let f2p = red.reduced_field(&e2p, x, 0.0)?;
        let f2m = red.reduced_field(&e2m, x, 0.0)?;
        for i in 0..2 {
            g[i][j] = (-f2p[i] + 8.0 * fp[i] - 8.0 * fm[i] + f2m[i]) / (12.0 * eps_probe);
        }
    }
    Ok(ExtractedBranchData { x, m, r, g })
}
