//! Three-species network `X1 + X2 ⇄ X3`, `∅ → X2` at rate `v(x1)`:
//! `ẋ = B ν(x) + ε φ(x)` with `ν = (x1 x2, v(x1), x3)`.
//!
//! Steady states form the line `S = {x1 = x1*, x3 = x1* x2}` where `v(x1*) = 0`.
//! When `v'(x1*) = 0` the line is normally degenerate with corank one.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::branching::{find_branch_points, BranchOptions, BranchPoint, ExtractedSource, Variant};
use crate::deformation::ManifoldChart;
use crate::error::{Error, Result};
use crate::lyapunov_schmidt::{build_reduction, extract_branch_data, AmbientSystem, LSReduction};
use crate::numerics::{d1, d2, scalar_zeros};

pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PerturbationFn = Arc<dyn Fn(&[f64]) -> [f64; 3] + Send + Sync>;

pub fn stoichiometry() -> Matrix3<f64> {
    Matrix3::new(-1.0, 0.0, 1.0, -1.0, 1.0, 1.0, 1.0, 0.0, -1.0)
}

const W: [f64; 3] = [1.0, 1.0, -1.0];
const E: [f64; 3] = [0.0, 1.0, 0.0];
const DIFF_STEP: f64 = 1e-4;
/// `x1` range searched for the zero of `v`.
const X1_RANGE: [f64; 2] = [1e-3, 20.0];

#[derive(Clone)]
pub struct ChemNetworkModel {
    pub v: RateFn,
    pub x1_star: f64,
    /// Perturbation directions `φ_j`, one per parameter.
    pub phi: Vec<PerturbationFn>,
    /// Range of `λ = x3` parametrising the positive steady states.
    pub lambda_range: [f64; 2],
}

impl std::fmt::Debug for ChemNetworkModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChemNetworkModel")
            .field("x1_star", &self.x1_star)
            .field("q", &self.phi.len())
            .field("lambda_range", &self.lambda_range)
            .finish_non_exhaustive()
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl ChemNetworkModel {
    /// Locates the unique zero of `v` and checks the kernel and range of `B`.
    pub fn new(v: RateFn, phi: Vec<PerturbationFn>) -> Result<Self> {
        let b = stoichiometry();
        let svd = b.svd(true, true);
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-12).count();
        let null = Vector3::new(1.0, 0.0, 1.0);
        if rank != 2 || (b * null).norm() > 1e-14 {
            return Err(Error::ModelInconsistency("stoichiometric matrix has the wrong kernel".into()));
        }
        for r in [Vector3::new(0.0, 1.0, 0.0), Vector3::new(1.0, 1.0, -1.0)] {
            // r in range B  <=>  r ⟂ ker Bᵀ
            let left_null = svd.u.as_ref().expect("u requested").column(2).into_owned();
            if r.dot(&left_null).abs() > 1e-12 {
                return Err(Error::ModelInconsistency("stoichiometric matrix has the wrong range".into()));
            }
        }
        let span = (X1_RANGE[1] - X1_RANGE[0]) * 1e-9;
        let zeros = scalar_zeros(&|x: f64| v(x), X1_RANGE[0], X1_RANGE[1], 8192, false, 1e-12);
        let mut xs: Vec<f64> = zeros.iter().map(|z| z.x).collect();
        xs.dedup_by(|a, b| (*a - *b).abs() < span);
        let x1_star = match xs.as_slice() {
            [x] => *x,
            [] => return Err(Error::ModelInconsistency("v has no zero in (0, 20]".into())),
            _ => {
                return Err(Error::ModelInconsistency(format!(
                    "v must have a unique positive zero, found {} ({:?})",
                    xs.len(),
                    xs
                )))
            }
        };
        Ok(Self {
            v,
            x1_star,
            phi,
            lambda_range: [0.1, 10.0],
        })
    }

    pub fn dv(&self, x1: f64) -> f64 {
        d1(&*self.v, x1, DIFF_STEP)
    }

    pub fn d2v(&self, x1: f64) -> f64 {
        d2(&*self.v, x1, DIFF_STEP)
    }

    pub fn nu(&self, x: &[f64]) -> [f64; 3] {
        [x[0] * x[1], (self.v)(x[0]), x[2]]
    }

    /// Steady state with `x3 = λ`.
    pub fn steady_state(&self, lambda: f64) -> [f64; 3] {
        [self.x1_star, lambda / self.x1_star, lambda]
    }

    /// Tangent `(0, 1, x1*)` of the steady-state line.
    pub fn tangent(&self) -> [f64; 3] {
        [0.0, 1.0, self.x1_star]
    }

    pub fn field(&self, eps: &[f64], x: &[f64]) -> [f64; 3] {
        let nu = self.nu(x);
        let b = stoichiometry();
        let mut f = [0.0; 3];
        for i in 0..3 {
            f[i] = (0..3).map(|j| b[(i, j)] * nu[j]).sum();
        }
        for (e, phi) in eps.iter().zip(&self.phi) {
            if *e != 0.0 {
                let p = phi(x);
                for i in 0..3 {
                    f[i] += e * p[i];
                }
            }
        }
        f
    }

    /// `B Dν(x)`.
    pub fn linearisation(&self, x: &[f64]) -> Matrix3<f64> {
        let dnu = Matrix3::new(x[1], x[0], 0.0, self.dv(x[0]), 0.0, 0.0, 0.0, 0.0, 1.0);
        stoichiometry() * dnu
    }

    /// The ambient system on `ℝ³` with the steady-state line parametrised by `λ`.
    pub fn ambient_system(&self) -> Result<AmbientSystem> {
        let me = self.clone();
        let curve = self.clone();
        AmbientSystem::new(
            3,
            self.phi.len(),
            Arc::new(move |eps: &[f64], z: &[f64]| me.field(eps, z).to_vec()),
            Arc::new(move |l: f64| curve.steady_state(l).to_vec()),
            ManifoldChart::interval(self.lambda_range[0], self.lambda_range[1]),
        )
    }

    fn lambda_samples(&self, n: usize) -> Vec<f64> {
        let [a, b] = self.lambda_range;
        (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// `B Dν` has the rank of `B` along the steady states.
    pub regular: bool,
    /// `dim ker − dim S`.
    pub corank: usize,
    pub v_prime: f64,
    /// The rank test agrees with `v'(x1*) ≠ 0`.
    pub consistent: bool,
    pub min_rank: usize,
}

/// Numerical rank of `B Dν` on log-uniform samples of the steady states,
/// cross-checked against `v'(x1*) ≠ 0`.
pub fn chem_regularity(model: &ChemNetworkModel) -> RegularityReport {
    let min_rank = model
        .lambda_samples(33)
        .iter()
        .map(|&l| {
            let sv = model.linearisation(&model.steady_state(l)).singular_values();
            let top = sv.max();
            sv.iter().filter(|s| **s > 1e-8 * top).count()
        })
        .min()
        .unwrap_or(0);
    let v_prime = model.dv(model.x1_star);
    let regular = min_rank == 2;
    RegularityReport {
        regular,
        corank: 3 - min_rank - 1,
        v_prime,
        consistent: regular == (v_prime.abs() > 1e-8),
        min_rank,
    }
}

/// `a(s) = ⟨s, e⟩ − ⟨s, w⟩/3`.
pub fn a_coef(s: &[f64; 3]) -> f64 {
    dot(s, &E) - dot(s, &W) / 3.0
}

/// `b(s) = s − ⟨s, w⟩ w / 3`.
pub fn b_vec(s: &[f64; 3]) -> [f64; 3] {
    let k = dot(s, &W) / 3.0;
    [s[0] - k * W[0], s[1] - k * W[1], s[2] - k * W[2]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChemBranchFunction {
    /// Sampled `(λ, g(λ))`.
    pub samples: Vec<(f64, f64)>,
    /// Simple zeros in `λ`.
    pub zeros: Vec<f64>,
    /// Zeros rejected as non-simple.
    pub degenerate: Vec<f64>,
}

/// The scalar `g(λ) = a(t)⟨b(p), φ⟩ − a(p)⟨b(t), φ⟩` on the steady states,
/// with `t` the tangent, `p = e` and `φ = Σ direction_j φ_j`.
///
/// The reduced pair is `(a(t) c y² + ε⟨b(t), φ⟩, a(p) c y² + ε⟨b(p), φ⟩)`, so
/// `g` is its cross term `d12 / c` and its simple zeros are the branch points.
pub fn chem_branch_function(model: &ChemNetworkModel, direction: &[f64], grid: usize) -> Result<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, ChemBranchFunction)> {
    if direction.len() != model.phi.len() {
        return Err(Error::InvalidParams(format!(
            "direction has {} components, model has {} perturbations",
            direction.len(),
            model.phi.len()
        )));
    }
    let c = 0.5 * model.d2v(model.x1_star);
    if c.abs() < 1e-8 {
        return Err(Error::DegeneracyCheck(format!(
            "v''(x1*) = {:.3e}: the degeneracy is not quadratic",
            2.0 * c
        )));
    }
    let t = model.tangent();
    let (at, bt) = (a_coef(&t), b_vec(&t));
    let (ap, bp) = (a_coef(&E), b_vec(&E));
    let m = model.clone();
    let dir = direction.to_vec();
    let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |l: f64| {
        let x = m.steady_state(l);
        let mut phi = [0.0; 3];
        for (s, f) in dir.iter().zip(&m.phi) {
            let v = f(&x);
            for i in 0..3 {
                phi[i] += s * v[i];
            }
        }
        at * dot(&bp, &phi) - ap * dot(&bt, &phi)
    });
    let [lo, hi] = model.lambda_range;
    let samples: Vec<(f64, f64)> = model.lambda_samples(grid.max(2)).into_iter().map(|l| (l, g(l))).collect();
    let sup = samples.iter().fold(0.0f64, |a, s| a.max(s.1.abs()));
    if sup < 1e-14 {
        return Err(Error::DegeneracyCheck("g vanishes identically (φ = 0 or b(t), b(p) ⟂ φ)".into()));
    }
    let thr = 1e-6 * (1.0 + sup);
    let mut zeros = Vec::new();
    let mut degenerate = Vec::new();
    for z in scalar_zeros(&|x: f64| g(x), lo, hi, grid, false, thr) {
        if !z.touching && z.derivative.abs() > thr {
            zeros.push(z.x);
        } else {
            degenerate.push(z.x);
        }
    }
    Ok((g, ChemBranchFunction { samples, zeros, degenerate }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    /// Exponents `(m_T, m_P)` read off the reduction at the middle of the range.
    pub exponents: [usize; 2],
    pub branch_points: Vec<BranchPoint>,
    pub reduction_warnings: Vec<String>,
}

/// Branch points from the generic route: numerical reduction of the ambient
/// network, coefficient extraction, and the equal-exponent condition.
pub fn chem_pipeline_branch_points(model: &ChemNetworkModel, direction: &[f64], grid: usize) -> Result<PipelineResult> {
    let sys = model.ambient_system()?;
    let red: LSReduction = build_reduction(&sys, 64, 1e-8)?;
    let mid = (model.lambda_range[0] * model.lambda_range[1]).sqrt();
    let e = extract_branch_data(&red, mid, 0.05, 1e-3)?;
    let source = ExtractedSource {
        reduction: &red,
        direction: direction.to_vec(),
        y_box: 0.05,
        eps_probe: 1e-3,
    };
    let branch_points = find_branch_points(&source, Variant::General, &BranchOptions { grid, tol: 1e-6 })?;
    Ok(PipelineResult {
        exponents: e.m,
        branch_points,
        reduction_warnings: red.warnings.clone(),
    })
}

/// `v_μ(x1) = (x1 − 1)(μ + (x1 − 1)²)`: unique zero at `x1 = 1` for `μ ≥ 0`
/// with `v'(1) = μ`.
pub fn rate_family(mu: f64) -> RateFn {
    Arc::new(move |x: f64| (x - 1.0) * (mu + (x - 1.0).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_phi() -> PerturbationFn {
        Arc::new(|z: &[f64]| [z[2].cos(), 0.0, 0.0])
    }

    #[test]
    fn steady_states_are_equilibria() {
        let m = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![cos_phi()]).unwrap();
        assert!((m.x1_star - 1.0).abs() < 1e-6);
        for l in [0.1, 1.0, 7.0] {
            let f = m.field(&[0.0], &m.steady_state(l));
            assert!(f.iter().all(|v| v.abs() < 1e-10), "{f:?}");
        }
    }

    #[test]
    fn regularity_flags() {
        let deg = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![]).unwrap();
        let r = chem_regularity(&deg);
        assert!(!r.regular && r.corank == 1 && r.consistent);
        let lin = ChemNetworkModel::new(Arc::new(|x: f64| x - 1.0), vec![]).unwrap();
        let r = chem_regularity(&lin);
        assert!(r.regular && r.corank == 0 && r.consistent);
    }

    #[test]
    fn multiple_zeros_rejected() {
        let r = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0) * (x - 2.0)), vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn branch_function_cos() {
        let m = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![cos_phi()]).unwrap();
        let (_, bf) = chem_branch_function(&m, &[1.0], 4096).unwrap();
        let want = [0.5, 1.5, 2.5].map(|k| k * std::f64::consts::PI);
        assert_eq!(bf.zeros.len(), 3, "{:?}", bf.zeros);
        for (z, w) in bf.zeros.iter().zip(want) {
            assert!((z - w).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_rate_is_not_quadratic() {
        let m = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(3)), vec![cos_phi()]).unwrap();
        assert!(!chem_regularity(&m).regular);
        assert!(matches!(chem_branch_function(&m, &[1.0], 512), Err(Error::DegeneracyCheck(_))));
    }

    #[test]
    fn zero_perturbation_flagged() {
        let m = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![Arc::new(|_z: &[f64]| [0.0; 3])]).unwrap();
        assert!(matches!(chem_branch_function(&m, &[1.0], 512), Err(Error::DegeneracyCheck(_))));
    }
}
