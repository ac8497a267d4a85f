//! Polar blow-up of the parameter space and the geometry of bifurcation arcs.
//!
//! Writing `eps = ρ s` with `|s| = 1`, the versal parameters expand as
//! `a(ρs, x) = ρ b(x)s + ρ² c(x)(s, s) + O(ρ³)`. Everything in this module
//! works with the coefficients `b` and `c` on the torus of pairs `(s, x)`,
//! with `s = (cos θ, sin θ)` when `q = 2`.

pub mod arcs;
pub mod classify;
pub mod curves;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use arcs::{bifurcation_arcs_m, bifurcation_arcs_m2, ArcKind, ArcOptions, BifurcationArc};
pub use classify::{
    classify_point_m, classify_point_m2, find_special_points_m2, tangent_cone_stratum, ClassifiedPoint, PointKind,
    TangentConeStratum,
};
pub use curves::{
    find_fold_points, trace_zero_curve, variational_discriminant_m3, FoldPoint, Polyline,
    TorusDomain, VariationalCurves,
};

/// The pinching map `(ρ, s) ↦ ρ s`. A non-unit `s` is normalised and the
/// returned flag is set.
pub fn pinch(rho: f64, s: &[f64]) -> (Vec<f64>, bool) {
    let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let renorm = (n - 1.0).abs() > 1e-12;
    let scale = if renorm && n > 0.0 { rho / n } else { rho };
    (s.iter().map(|v| v * scale).collect(), renorm)
}

/// Unit direction for an angle.
pub fn direction(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

pub type BFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;
pub type CFn = Arc<dyn Fn(f64) -> Vec<DMatrix<f64>> + Send + Sync>;

/// First- and second-order coefficients of the versal parameters in `eps`.
#[derive(Clone)]
pub struct ExpansionData {
    pub r_dim: usize,
    pub q: usize,
    /// `x ↦ b(x)`, an `r_dim × q` matrix.
    pub b: BFn,
    /// `x ↦ [c_i(x)]`, symmetric `q × q` matrices with `a_i ≈ b_i ε + εᵀ c_i ε`.
    pub c: CFn,
}

impl fmt::Debug for ExpansionData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpansionData")
            .field("r_dim", &self.r_dim)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl ExpansionData {
    pub fn new(r_dim: usize, q: usize, b: BFn, c: CFn) -> Self {
        Self { r_dim, q, b, c }
    }

    /// Expansion with `c ≡ 0` built from the rows of `b(x) s`.
    pub fn linear(r_dim: usize, q: usize, b: BFn) -> Self {
        let c: CFn = Arc::new(move |_x| vec![DMatrix::zeros(q, q); r_dim]);
        Self { r_dim, q, b, c }
    }

    /// `b(x) s`.
    pub fn bs(&self, s: &[f64], x: f64) -> Vec<f64> {
        let b = (self.b)(x);
        (0..self.r_dim)
            .map(|i| (0..self.q).map(|j| b[(i, j)] * s[j]).sum())
            .collect()
    }

    /// `c(x)(s, s)`.
    pub fn css(&self, s: &[f64], x: f64) -> Vec<f64> {
        (self.c)(x)
            .iter()
            .map(|ci| {
                let mut acc = 0.0;
                for j in 0..self.q {
                    for k in 0..self.q {
                        acc += ci[(j, k)] * s[j] * s[k];
                    }
                }
                acc
            })
            .collect()
    }

    /// Blown-up parameters `ā = b s + ρ c(s, s)`, so that `a(ρ s, x) ≈ ρ ā`.
    pub fn abar(&self, rho: f64, s: &[f64], x: f64) -> Vec<f64> {
        let b = self.bs(s, x);
        if rho == 0.0 {
            return b;
        }
        let c = self.css(s, x);
        b.iter().zip(&c).map(|(bi, ci)| bi + rho * ci).collect()
    }

    /// Second-order reconstruction `b ε + c(ε, ε)`.
    pub fn reconstruct(&self, eps: &[f64], x: f64) -> Vec<f64> {
        let b = self.bs(eps, x);
        let c = self.css(eps, x);
        b.iter().zip(&c).map(|(u, v)| u + v).collect()
    }
}

/// Coefficients `b`, `c` of `a(eps, x)` by central differences with step `h`.
///
/// `b` uses the 4th-order first-derivative stencil; `c` is half the symmetrised
/// second-difference Hessian.
pub fn extract_expansion(
    a: Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>,
    q: usize,
    r_dim: usize,
    h: f64,
    x_samples: &[f64],
) -> Result<ExpansionData> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::InvalidParams(format!("difference step {h} outside [1e-6, 1e-2]")));
    }
    let zero = vec![0.0; q];
    for &x in x_samples {
        let v = a(&zero, x);
        if v.len() != r_dim {
            return Err(Error::InvalidParams(format!(
                "parameter map returns {} values, expected {r_dim}",
                v.len()
            )));
        }
        if let Some(bad) = v.iter().find(|c| c.abs() > 1e-10) {
            return Err(Error::ModelInconsistency(format!(
                "a(0, {x:.4}) has a component {bad:.3e}; expected 0"
            )));
        }
    }
    let ab = a.clone();
    let b: BFn = Arc::new(move |x| {
        let mut m = DMatrix::zeros(r_dim, q);
        for j in 0..q {
            let at = |t: f64| {
                let mut e = vec![0.0; q];
                e[j] = t;
                ab(&e, x)
            };
            let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            for i in 0..r_dim {
                m[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
            }
        }
        m
    });
    let ac = a;
    let c: CFn = Arc::new(move |x| {
        let mut out = vec![DMatrix::zeros(q, q); r_dim];
        let eval = |dj: f64, dk: f64, j: usize, k: usize| {
            let mut e = vec![0.0; q];
            e[j] += dj;
            e[k] += dk;
            ac(&e, x)
        };
        let f0 = ac(&vec![0.0; q], x);
        for j in 0..q {
            for k in j..q {
                if j == k {
                    let (p2, p1, m1, m2) =
                        (eval(2.0 * h, 0.0, j, j), eval(h, 0.0, j, j), eval(-h, 0.0, j, j), eval(-2.0 * h, 0.0, j, j));
                    for i in 0..r_dim {
                        let d2 = (-p2[i] + 16.0 * p1[i] - 30.0 * f0[i] + 16.0 * m1[i] - m2[i]) / (12.0 * h * h);
                        out[i][(j, j)] = 0.5 * d2;
                    }
                } else {
                    let pp = eval(h, h, j, k);
                    let pm = eval(h, -h, j, k);
                    let mp = eval(-h, h, j, k);
                    let mm = eval(-h, -h, j, k);
                    for i in 0..r_dim {
                        let mixed = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
                        out[i][(j, k)] = 0.5 * mixed;
                        out[i][(k, j)] = 0.5 * mixed;
                    }
                }
            }
        }
        out
    });
    Ok(ExpansionData { r_dim, q, b, c })
}
