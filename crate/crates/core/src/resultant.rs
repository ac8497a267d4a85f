//! Sylvester-type resultant of the versal normal form and discriminant tests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deformation::DeformationParams;
use crate::error::{Error, Result};
use crate::numerics::{det_lu, extrapolate_to_zero, loglog_slope, poly_roots};

/// `(2m-1) x (2m-1)` matrix whose determinant is `R_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterMatrix {
    pub m: usize,
    pub entries: DMatrix<f64>,
}

/// Rows `0..m` carry `a_0..a_{m-1}` shifted right by the row index; rows
/// `m..2m-1` carry `abar_0..abar_{m-2}, 0, 1` shifted by `row - m`.
pub fn sylvester_matrix(p: &DeformationParams) -> SylvesterMatrix {
    let m = p.m;
    let n = 2 * m - 1;
    let mut e = DMatrix::<f64>::zeros(n, n);
    for i in 0..m {
        for (k, &a) in p.a.iter().enumerate() {
            e[(i, i + k)] = a;
        }
    }
    let mut row: Vec<f64> = p.abar.clone();
    row.push(0.0);
    row.push(1.0);
    for j in 0..m - 1 {
        for (k, &v) in row.iter().enumerate() {
            e[(m + j, j + k)] = v;
        }
    }
    SylvesterMatrix { m, entries: e }
}

pub fn resultant(p: &DeformationParams) -> f64 {
    det_lu(sylvester_matrix(p).entries)
}

/// Tolerance scaled by parameter magnitude: `tol * (1 + |a|^{2m-1})`.
pub fn scaled_tol(p: &DeformationParams, tol: f64) -> f64 {
    tol * (1.0 + p.norm().powi(2 * p.m as i32 - 1))
}

pub fn is_on_discriminant(p: &DeformationParams, tol: f64) -> bool {
    resultant(p).abs() <= scaled_tol(p, tol)
}

/// Independent check: do the two components share a (possibly complex) root?
/// Decided by companion-matrix eigenvalues and minimal pairwise distance.
pub fn shares_root(p: &DeformationParams, dist_tol: f64) -> bool {
    let r1 = poly_roots(&p.a);
    let mut second = p.abar.clone();
    second.push(0.0);
    second.push(1.0);
    let r2 = poly_roots(&second);
    r1.iter()
        .any(|z| r2.iter().any(|w| (z - w).norm() < dist_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCheck {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub residual: f64,
    /// Whether `residual` is a coefficient-fit error (as opposed to a slope or degree).
    pub fit: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub m: usize,
    pub checks: Vec<StructureCheck>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Largest residual among the coefficient fits.
    pub fn max_fit_residual(&self) -> f64 {
        self.checks.iter().filter(|c| c.fit).map(|c| c.residual).fold(0.0, f64::max)
    }
}

const FIT_TOL: f64 = 1e-6;

fn signed_unit(rng: &mut ChaCha8Rng) -> f64 {
    let v: f64 = rng.gen_range(0.5..1.5);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Leading coefficient of `t -> R(t d) / t^deg` at `t = 0`. `R(t d)` is a
/// polynomial of degree at most `2m-1`, so Neville extrapolation over enough
/// nodes is exact up to round-off.
fn leading_coefficient(m: usize, dir: &[f64], deg: usize) -> f64 {
    let ts: Vec<f64> = (1..=2 * m + 1).map(|k| 0.05 * k as f64).collect();
    let vs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let v: Vec<f64> = dir.iter().map(|d| d * t).collect();
            resultant(&DeformationParams::from_flat(m, &v).expect("flat length")) / t.powi(deg as i32)
        })
        .collect();
    extrapolate_to_zero(&ts, &vs)
}

fn slope_of(m: usize, dir: &[f64]) -> f64 {
    let ts = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
    let vs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let v: Vec<f64> = dir.iter().map(|d| d * t).collect();
            resultant(&DeformationParams::from_flat(m, &v).expect("flat length"))
        })
        .collect();
    loglog_slope(&ts, &vs).0
}

/// Coefficients (ascending) of `t -> R(base + t e_var)`, fitted exactly on
/// `2m` nodes; the polynomial has degree at most `2m - 1`.
pub fn single_variable_polynomial(m: usize, base: &[f64], var: usize) -> Vec<f64> {
    let n = 2 * m;
    let ts: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    let mut vand = DMatrix::<f64>::zeros(n, n);
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for (i, &t) in ts.iter().enumerate() {
        for j in 0..n {
            vand[(i, j)] = t.powi(j as i32);
        }
        let mut v = base.to_vec();
        v[var] += t;
        rhs[i] = resultant(&DeformationParams::from_flat(m, &v).expect("flat length"));
    }
    vand.lu().solve(&rhs).map(|c| c.iter().copied().collect()).unwrap_or_default()
}

fn effective_degree(coeffs: &[f64]) -> usize {
    let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-300);
    coeffs
        .iter()
        .rposition(|c| c.abs() > 1e-8 * scale)
        .unwrap_or(0)
}

/// Numerical confirmation of the leading-order structure of `R_m`:
/// (i) `R_m(a_0, 0..; 0..) = a_0^m`, (ii) on `a_0 = 0` the lowest part is
/// `(-1)^m abar_0 a_1^m` (joint degree `m+1`), (iii) on `a_0 = a_1 = 0` the
/// resultant is divisible by `abar_0^2` with lowest quotient term `a_2^m`.
/// Also checks the single-variable degrees in `a_0` and `abar_0`.
pub fn verify_structure(m: usize, trials: usize, seed: u64) -> Result<StructureReport> {
    if !(2..=6).contains(&m) {
        return Err(Error::UnsupportedDimension(format!(
            "structure verification supports 2 <= m <= 6, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * m - 1;
    let mut checks = Vec::new();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };

    for t in 0..trials {
        // (i)
        let a0 = signed_unit(&mut rng);
        let mut v = vec![0.0; n];
        v[0] = a0;
        let obs = resultant(&DeformationParams::from_flat(m, &v)?);
        let exp = a0.powi(m as i32);
        let r = rel(obs, exp);
        checks.push(StructureCheck {
            name: format!("lowest term a0^m, trial {t}"),
            expected: exp,
            observed: obs,
            residual: r,
            fit: true,
            pass: r < 1e-12,
        });

        // (ii)
        let mut dir: Vec<f64> = (0..n).map(|_| signed_unit(&mut rng)).collect();
        dir[0] = 0.0;
        let exp = sign * dir[m] * dir[1].powi(m as i32);
        let obs = leading_coefficient(m, &dir, m + 1);
        let r = rel(obs, exp);
        checks.push(StructureCheck {
            name: format!("a0=0: leading (-1)^m abar0 a1^m, trial {t}"),
            expected: exp,
            observed: obs,
            residual: r,
            fit: true,
            pass: r < FIT_TOL,
        });
        let s = slope_of(m, &dir);
        let r = (s - (m + 1) as f64).abs() / (m + 1) as f64;
        checks.push(StructureCheck {
            name: format!("a0=0: joint scaling slope m+1, trial {t}"),
            expected: (m + 1) as f64,
            observed: s,
            residual: r,
            fit: false,
            pass: r < 1e-2,
        });

        // (iii)
        if m >= 3 {
            let mut dir: Vec<f64> = (0..n).map(|_| signed_unit(&mut rng)).collect();
            dir[0] = 0.0;
            dir[1] = 0.0;
            let poly = single_variable_polynomial(m, &dir, m).into_iter().collect::<Vec<_>>();
            // divisibility: expand around abar0 = 0
            let mut at_zero = dir.clone();
            at_zero[m] = 0.0;
            let p0 = single_variable_polynomial(m, &at_zero, m);
            let scale = p0.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-300);
            let low = p0[0].abs().max(p0[1].abs()) / scale;
            checks.push(StructureCheck {
                name: format!("a0=a1=0: divisible by abar0^2, trial {t}"),
                expected: 0.0,
                observed: low,
                residual: low,
                fit: true,
            pass: low < FIT_TOL && !poly.is_empty(),
            });
            let exp = dir[m].powi(2) * dir[2].powi(m as i32);
            let obs = leading_coefficient(m, &dir, m + 2);
            let r = rel(obs, exp);
            checks.push(StructureCheck {
                name: format!("a0=a1=0: quotient leading a2^m, trial {t}"),
                expected: exp,
                observed: obs,
                residual: r,
                fit: true,
            pass: r < FIT_TOL,
            });
        }

        // single-variable degrees
        let base: Vec<f64> = (0..n).map(|_| signed_unit(&mut rng)).collect();
        let da0 = effective_degree(&single_variable_polynomial(m, &base, 0));
        checks.push(StructureCheck {
            name: format!("degree in a0, trial {t}"),
            expected: m as f64,
            observed: da0 as f64,
            residual: (da0 as f64 - m as f64).abs(),
            fit: false,
            pass: da0 == m,
        });
        let dab = effective_degree(&single_variable_polynomial(m, &base, m));
        checks.push(StructureCheck {
            name: format!("degree in abar0, trial {t}"),
            expected: (m - 1) as f64,
            observed: dab as f64,
            residual: (dab as f64 - (m - 1) as f64).abs(),
            fit: false,
            pass: dab == m - 1,
        });
    }
    Ok(StructureReport { m, checks })
}

/// Parameters whose two components share the root `y0` by construction.
pub fn params_with_common_root(m: usize, y0: f64, rng: &mut impl Rng) -> DeformationParams {
    let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut abar: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    a[0] = -(1..m).map(|i| a[i] * y0.powi(i as i32)).sum::<f64>();
    abar[0] = -y0.powi(m as i32) - (1..m - 1).map(|j| abar[j] * y0.powi(j as i32)).sum::<f64>();
    DeformationParams::new(a, abar).expect("consistent lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn m2_layout() {
        let p = DeformationParams::from_m2(1.0, 2.0, 3.0);
        let s = sylvester_matrix(&p).entries;
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 1.0]);
        assert_eq!(s, expect);
    }

    #[test]
    fn m4_layout() {
        let p = DeformationParams::new(vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0]).unwrap();
        let s = sylvester_matrix(&p).entries;
        #[rustfmt::skip]
        let expect = DMatrix::from_row_slice(7, 7, &[
            1., 2., 3., 4., 0., 0., 0.,
            0., 1., 2., 3., 4., 0., 0.,
            0., 0., 1., 2., 3., 4., 0.,
            0., 0., 0., 1., 2., 3., 4.,
            5., 6., 7., 0., 1., 0., 0.,
            0., 5., 6., 7., 0., 1., 0.,
            0., 0., 5., 6., 7., 0., 1.,
        ]);
        assert_eq!(s, expect);
    }

    #[test]
    fn zero_params_unit_entries() {
        let s = sylvester_matrix(&DeformationParams::zero(3)).entries;
        assert_eq!(s.iter().filter(|v| **v == 1.0).count(), 2);
        assert_eq!(s.iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn m2_values() {
        assert_eq!(resultant(&DeformationParams::from_m2(1.0, 0.0, 0.0)), 1.0);
        assert!(resultant(&DeformationParams::from_m2(2.0, 1.0, -4.0)).abs() < 1e-14);
        assert!((resultant(&DeformationParams::from_m2(0.0, 1.0, 0.37)) - 0.37).abs() < 1e-15);
    }

    #[test]
    fn membership() {
        assert!(is_on_discriminant(&DeformationParams::zero(4), 1e-10));
        assert!(is_on_discriminant(&DeformationParams::from_m2(2.0, 1.0, -4.0), 1e-10));
        assert!(!is_on_discriminant(&DeformationParams::from_m2(1.0, 0.0, -1.0), 1e-10));
    }

    #[test]
    fn structure_m2_to_m6() {
        for m in 2..=6 {
            let rep = verify_structure(m, 4, 7 + m as u64).unwrap();
            for c in &rep.checks {
                assert!(c.pass, "m = {m}: {c:?}");
            }
        }
        assert!(verify_structure(7, 1, 0).is_err());
    }

    #[test]
    fn m4_a0_zero_value_sign() {
        let (a1, ab0) = (0.7, 0.3);
        let p = DeformationParams::new(vec![0.0, a1, 0.0, 0.0], vec![ab0, 0.0, 0.0]).unwrap();
        let r = resultant(&p);
        assert!((r - ab0 * a1.powi(4)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn r2_closed_form(a0 in -3.0..3.0f64, a1 in -3.0..3.0f64, ab in -3.0..3.0f64) {
            let p = DeformationParams::from_m2(a0, a1, ab);
            let exact = a0 * a0 + a1 * a1 * ab;
            prop_assert!((resultant(&p) - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }

        #[test]
        fn constructed_common_roots_lie_on_discriminant(seed in 0u64..1000, y0 in -1.5..1.5f64, m in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = params_with_common_root(m, y0, &mut rng);
            prop_assert!(is_on_discriminant(&p, 1e-10));
            prop_assert!(shares_root(&p, 1e-5));
        }
    }
}
