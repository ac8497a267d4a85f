//! Circular periodic orbits of a planar Hamiltonian `|p|²/2 + V(|q|)` seen as
//! critical circles of the Jacobi functional
//! `J[q] = ∫₀¹ (E − V(q)) |q̇|²/2 dt`.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::bisect;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial potential with its first two derivatives in `r`.
#[derive(Clone)]
pub struct RadialPotential {
    pub v: RadialFn,
    pub dv: RadialFn,
    pub d2v: RadialFn,
    /// `λ` when this is the Mexican hat `−λ²r²/2 + r⁴/4`.
    pub mexican_hat: Option<f64>,
}

impl std::fmt::Debug for RadialPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialPotential").field("mexican_hat", &self.mexican_hat).finish_non_exhaustive()
    }
}

impl RadialPotential {
    pub fn mexican_hat(lambda: f64) -> Self {
        let l2 = lambda * lambda;
        Self {
            v: Arc::new(move |r| -0.5 * l2 * r * r + 0.25 * r.powi(4)),
            dv: Arc::new(move |r| -l2 * r + r.powi(3)),
            d2v: Arc::new(move |r| -l2 + 3.0 * r * r),
            mexican_hat: Some(lambda),
        }
    }

    /// Energy band of the annular Hill region, when known.
    pub fn hill_band(&self) -> Option<[f64; 2]> {
        self.mexican_hat.map(|l| [-0.25 * l.powi(4), 0.0])
    }
}

/// A circular orbit of radius `r0`, one revolution per unit time.
#[derive(Debug, Clone)]
pub struct RadialPotentialModel {
    pub potential: RadialPotential,
    pub r0: f64,
}

impl RadialPotentialModel {
    pub fn new(potential: RadialPotential, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidParams(format!("radius {r0} must be positive")));
        }
        Ok(Self { potential, r0 })
    }

    pub fn omega(&self) -> f64 {
        TAU
    }

    /// Energy for which the circle of radius `r0` is an orbit:
    /// `E − V(r0) = r0 V'(r0) / 2`.
    pub fn energy(&self) -> f64 {
        (self.potential.v)(self.r0) + 0.5 * self.r0 * (self.potential.dv)(self.r0)
    }

    /// `Ω = r0² V'' / (2 (E − V)) + 1`.
    pub fn big_omega(&self) -> f64 {
        let p = &self.potential;
        let gap = self.energy() - (p.v)(self.r0);
        self.r0 * self.r0 * (p.d2v)(self.r0) / (2.0 * gap) + 1.0
    }
}

/// `r0 V''(r0) − (2n² − 9) V'(r0)`; zero exactly at the degenerate radius for `n`.
pub fn hamiltonian_omega_condition(model: &RadialPotentialModel, n: i32) -> f64 {
    let p = &model.potential;
    let r = model.r0;
    r * (p.d2v)(r) - (2.0 * (n * n) as f64 - 9.0) * (p.dv)(r)
}

/// Radius solving the degeneracy condition for mode `n`: closed form for the
/// Mexican hat, bisection on `(0, r_max]` otherwise.
pub fn degenerate_radius(potential: &RadialPotential, n: i32, r_max: f64) -> Result<f64> {
    let k = (n * n) as f64;
    if let Some(l) = potential.mexican_hat {
        let r2 = l * l * (k - 5.0) / (k - 6.0);
        if !(r2 > 0.0) || !r2.is_finite() {
            return Err(Error::NoBranch { x0: n as f64 });
        }
        return Ok(r2.sqrt());
    }
    let res = |r: f64| r * (potential.d2v)(r) - (2.0 * k - 9.0) * (potential.dv)(r);
    let grid = 4096;
    let mut prev = (1e-6, res(1e-6));
    for i in 1..=grid {
        let r = r_max * i as f64 / grid as f64;
        let v = res(r);
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if (v < 0.0) != (prev.1 < 0.0) {
            return Ok(bisect(&res, prev.0, r, 1e-15));
        }
        prev = (r, v);
    }
    Err(Error::NoBranch { x0: n as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub n: i32,
    pub r0: Option<f64>,
    pub energy: Option<f64>,
    pub in_hill_region: bool,
    /// Why the level was skipped, if it was.
    pub omitted: Option<String>,
}

/// `E_n = V(r0) + r0² V''(r0) / (2 (2n² − 9))` at the degenerate radius of each `n`.
pub fn degenerate_energies(potential: &RadialPotential, ns: impl IntoIterator<Item = i32>) -> Vec<EnergyLevel> {
    ns.into_iter()
        .map(|n| {
            let skip = |reason: String| EnergyLevel {
                n,
                r0: None,
                energy: None,
                in_hill_region: false,
                omitted: Some(reason),
            };
            let r0 = match degenerate_radius(potential, n, 10.0) {
                Ok(r) => r,
                Err(_) => return skip("no positive degenerate radius".into()),
            };
            if (potential.dv)(r0) <= 0.0 {
                return skip(format!("V'(r0) = {:.4} ≤ 0, so E ≤ V(r0)", (potential.dv)(r0)));
            }
            let k = 2.0 * (n * n) as f64 - 9.0;
            let e = (potential.v)(r0) + r0 * r0 * (potential.d2v)(r0) / (2.0 * k);
            // the band is open; a level on its edge to round-off does not count
            let edge = 1e-12;
            let in_hill_region = potential.hill_band().is_some_and(|[lo, hi]| e > lo + edge && e < hi - edge);
            EnergyLevel {
                n,
                r0: Some(r0),
                energy: Some(e),
                in_hill_region,
                omitted: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub dimension: usize,
    /// `4 + Ω/2`, the squared frequency of the radial mode in units of `ω`.
    pub frequency_sq: f64,
    pub matched_n: Option<u32>,
    pub borderline: bool,
}

/// Dimension of the Hessian kernel from the radial mode equation
/// `ä + (4 + Ω/2) ω² a = 0`, `b̈ = 0`: the constant `b` always contributes,
/// the `a`-equation adds one when `4 + Ω/2 = n²` for some `n ≤ n_modes`.
pub fn kernel_dimension(model: &RadialPotentialModel, n_modes: u32) -> KernelReport {
    let f = 4.0 + 0.5 * model.big_omega();
    let nearest = f.max(0.0).sqrt().round();
    let miss = (f - nearest * nearest).abs();
    let in_range = nearest <= n_modes as f64;
    let matched = in_range && miss < 1e-8;
    KernelReport {
        dimension: if matched { 2 } else { 1 },
        frequency_sq: f,
        matched_n: matched.then_some(nearest as u32),
        borderline: in_range && !matched && miss < 1e-4,
    }
}

/// Composite Simpson quadrature of the Jacobi functional over one period.
/// `path(t)` returns `(q, q̇)`.
pub fn jacobi_functional(
    potential: &RadialPotential,
    energy: f64,
    path: &dyn Fn(f64) -> ([f64; 2], [f64; 2]),
    panels: usize,
) -> f64 {
    let n = panels + panels % 2;
    let h = 1.0 / n as f64;
    let integrand = |t: f64| {
        let (q, dq) = path(t);
        let r = q[0].hypot(q[1]);
        (energy - (potential.v)(r)) * 0.5 * (dq[0] * dq[0] + dq[1] * dq[1])
    };
    let mut acc = integrand(0.0) + integrand(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * h);
    }
    acc * h / 3.0
}

/// Difference `J[q0 + y u] − J[q0]` with the integrand differenced pointwise.
fn jacobi_increment(model: &RadialPotentialModel, mode: &dyn Fn(f64) -> ([f64; 2], [f64; 2]), y: f64, panels: usize) -> f64 {
    let p = &model.potential;
    let e = model.energy();
    let (r0, w) = (model.r0, model.omega());
    let n = panels + panels % 2;
    let h = 1.0 / n as f64;
    let integrand = |t: f64| {
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let q0 = [r0 * c, r0 * s];
        let dq0 = [-r0 * w * s, r0 * w * c];
        let (u, du) = mode(t);
        let q = [q0[0] + y * u[0], q0[1] + y * u[1]];
        let dq = [dq0[0] + y * du[0], dq0[1] + y * du[1]];
        let k0 = 0.5 * (dq0[0] * dq0[0] + dq0[1] * dq0[1]);
        let k = 0.5 * (dq[0] * dq[0] + dq[1] * dq[1]);
        let v0 = (p.v)(r0);
        let v = (p.v)(q[0].hypot(q[1]));
        // (E − V)K − (E − V0)K0 = (E − V0)(K − K0) − (V − V0) K
        (e - v0) * (k - k0) - (v - v0) * k
    };
    let mut acc = integrand(0.0) + integrand(1.0);
    for i in 1..n {
        let wgt = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * integrand(i as f64 * h);
    }
    acc * h / 3.0
}

/// Radial mode `u = cos(2π n t) e(t)` and its derivative.
pub fn radial_mode(n: u32) -> impl Fn(f64) -> ([f64; 2], [f64; 2]) {
    move |t: f64| {
        let w = TAU;
        let k = TAU * n as f64;
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let (a, da) = ((k * t).cos(), -k * (k * t).sin());
        // e = (c, s), ė = w (−s, c)
        ([a * c, a * s], [da * c - a * w * s, da * s + a * w * c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiExpansion {
    /// Coefficients of `y¹ … y⁶` in `J[q0 + y u] − J[q0]`.
    pub coeffs: [f64; 6],
    pub fit_residual: f64,
    pub panels: usize,
}

impl JacobiExpansion {
    pub fn quartic(&self) -> f64 {
        self.coeffs[3]
    }
    /// `|c_k| / |c_4|` for `k = 2, 3`.
    pub fn relative_low_order(&self) -> (f64, f64) {
        let c4 = self.coeffs[3].abs();
        (self.coeffs[1].abs() / c4, self.coeffs[2].abs() / c4)
    }
}

/// Least-squares fit of `J[q0 + y u] − J[q0]` on `±y_samples` against
/// `y, …, y⁶`. The functional is a polynomial of degree 6 in `y` for a quartic
/// potential, so the fit is exact up to quadrature and round-off.
pub fn jacobi_expansion(
    model: &RadialPotentialModel,
    mode: &dyn Fn(f64) -> ([f64; 2], [f64; 2]),
    y_samples: &[f64],
    panels: usize,
) -> Result<JacobiExpansion> {
    if y_samples.len() < 4 {
        return Err(Error::InvalidParams("need at least 4 y samples".into()));
    }
    let ymax = y_samples.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    let ys: Vec<f64> = y_samples.iter().flat_map(|&y| [y, -y]).collect();
    let rows = ys.len();
    let a = DMatrix::from_fn(rows, 6, |i, k| (ys[i] / ymax).powi(k as i32 + 1));
    let b = DVector::from_iterator(rows, ys.iter().map(|&y| jacobi_increment(model, mode, y, panels)));
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let resid = (&a * &sol - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let mut coeffs = [0.0; 6];
    for k in 0..6 {
        coeffs[k] = sol[k] / ymax.powi(k as i32 + 1);
    }
    Ok(JacobiExpansion {
        coeffs,
        fit_residual: resid,
        panels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticReport {
    pub j0: f64,
    pub rel_y2: f64,
    pub rel_y3: f64,
    pub fit_residual: f64,
    /// `J0` at twice the quadrature resolution.
    pub j0_refined: f64,
}

/// Quartic coefficient `J0` of the reduced Jacobi functional along the
/// kernel mode at a degenerate level; rejects levels where the `y²` or `y³`
/// coefficient survives.
pub fn jacobi_reduced_quartic(
    model: &RadialPotentialModel,
    n: u32,
    y_samples: &[f64],
    panels: usize,
) -> Result<QuarticReport> {
    let mode = radial_mode(n);
    let fit = jacobi_expansion(model, &mode, y_samples, panels)?;
    let fine = jacobi_expansion(model, &mode, y_samples, 2 * panels)?;
    let (rel_y2, rel_y3) = fit.relative_low_order();
    if rel_y2 > 1e-6 || rel_y3 > 1e-6 {
        return Err(Error::DegeneracyCheck(format!(
            "y² and y³ coefficients are {:.3e} and {:.3e} relative to the quartic {:.6e}",
            rel_y2,
            rel_y3,
            fit.quartic()
        )));
    }
    Ok(QuarticReport {
        j0: fit.quartic(),
        rel_y2,
        rel_y3,
        fit_residual: fit.fit_residual,
        j0_refined: fine.quartic(),
    })
}

/// Kernel dimension of the Hessian of `J` at the circular orbit, computed
/// directly on a truncated Fourier basis of perturbations (both Cartesian
/// components, modes `0..=n_fourier`) by finite differences of `J`.
///
/// Independent of the mode equation used by [`kernel_dimension`].
pub fn hessian_kernel_dimension(model: &RadialPotentialModel, n_fourier: u32, panels: usize, rel_tol: f64) -> (usize, Vec<f64>) {
    // basis: (component, k, cos|sin)
    let mut basis: Vec<(usize, u32, bool)> = Vec::new();
    for c in 0..2 {
        basis.push((c, 0, true));
        for k in 1..=n_fourier {
            basis.push((c, k, true));
            basis.push((c, k, false));
        }
    }
    let dim = basis.len();
    let phi = |b: (usize, u32, bool), t: f64| -> ([f64; 2], [f64; 2]) {
        let k = TAU * b.1 as f64;
        let (f, df) = if b.2 {
            ((k * t).cos(), -k * (k * t).sin())
        } else {
            ((k * t).sin(), k * (k * t).cos())
        };
        let mut u = [0.0; 2];
        let mut du = [0.0; 2];
        u[b.0] = f;
        du[b.0] = df;
        (u, du)
    };
    let j = |coef: &[(usize, f64)]| {
        let path = |t: f64| {
            let mut u = [0.0; 2];
            let mut du = [0.0; 2];
            for &(i, c) in coef {
                let (a, da) = phi(basis[i], t);
                u[0] += c * a[0];
                u[1] += c * a[1];
                du[0] += c * da[0];
                du[1] += c * da[1];
            }
            (u, du)
        };
        jacobi_increment(model, &path, 1.0, panels)
    };
    let second = |a: usize, b: usize, h: f64| {
        if a == b {
            (j(&[(a, h)]) + j(&[(a, -h)])) / (h * h)
        } else {
            (j(&[(a, h), (b, h)]) - j(&[(a, h), (b, -h)]) - j(&[(a, -h), (b, h)]) + j(&[(a, -h), (b, -h)])) / (4.0 * h * h)
        }
    };
    // J is polynomial in the coefficients, so one Richardson step leaves an O(h⁴) error
    let h = 1e-3;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let v = (4.0 * second(a, b, h) - second(a, b, 2.0 * h)) / 3.0;
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let count = ev.iter().filter(|v| v.abs() < rel_tol * scale).count();
    (count, ev)
}
