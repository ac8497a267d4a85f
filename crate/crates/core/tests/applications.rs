use std::sync::Arc;

use degenbif::applications::chemnet::*;
use degenbif::applications::hamiltonian::*;

#[test]
fn mexican_hat_levels_decrease_towards_the_band_floor() {
    let pot = RadialPotential::mexican_hat(1.0);
    let levels = degenerate_energies(&pot, 4..=10);
    let es: Vec<f64> = levels.iter().map(|l| l.energy.unwrap()).collect();
    // E_n = V(r0) + r0² V''(r0) / (2(2n² − 9)) with r0² = (n² − 5)/(n² − 6) decreases to −λ⁴/4
    assert!(es.windows(2).all(|w| w[1] < w[0]), "{es:?}");
    assert!(es.iter().all(|e| *e > -0.25 && *e < 0.0));
    assert!(levels.iter().all(|l| l.in_hill_region));
}

#[test]
fn circular_closure_holds_for_accepted_radii() {
    let pot = RadialPotential::mexican_hat(1.3);
    for n in 3..=8 {
        let r0 = degenerate_radius(&pot, n, 10.0).unwrap();
        let m = RadialPotentialModel::new(pot.clone(), r0).unwrap();
        let lhs = m.energy() - (pot.v)(r0);
        assert!((lhs - 0.5 * r0 * (pot.dv)(r0)).abs() < 1e-12);
        assert!(hamiltonian_omega_condition(&m, n).abs() < 1e-10);
    }
}

#[test]
fn kernel_dimension_is_stable_under_refinement() {
    let pot = RadialPotential::mexican_hat(1.0);
    for r0 in [1.1f64.sqrt(), 1.5] {
        let m = RadialPotentialModel::new(pot.clone(), r0).unwrap();
        assert_eq!(kernel_dimension(&m, 32).dimension, kernel_dimension(&m, 64).dimension);
    }
}

#[test]
fn hessian_kernel_grows_at_the_coupled_mode_level() {
    let pot = RadialPotential::mexican_hat(1.0);
    let dims: Vec<usize> = [1.1f64, 1.2, 2.25]
        .iter()
        .map(|r2| hessian_kernel_dimension(&RadialPotentialModel::new(pot.clone(), r2.sqrt()).unwrap(), 6, 256, 1e-6).0)
        .collect();
    assert_eq!(dims, vec![1, 3, 1]);
}

#[test]
fn jacobi_quartic_fit_is_robust_at_the_coupled_level() {
    let pot = RadialPotential::mexican_hat(1.0);
    let m = RadialPotentialModel::new(pot, 1.2f64.sqrt()).unwrap();
    let ys = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2];
    let a = jacobi_expansion(&m, &radial_mode(4), &ys, 512).unwrap();
    let b = jacobi_expansion(&m, &radial_mode(4), &ys.map(|y| 2.0 * y), 1024).unwrap();
    let (r2, r3) = a.relative_low_order();
    assert!(r2 < 1e-6 && r3 < 1e-6, "{r2:e} {r3:e}");
    assert!((a.quartic() - b.quartic()).abs() < 1e-2 * a.quartic().abs());
}

fn network(phi: PerturbationFn) -> ChemNetworkModel {
    ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![phi]).unwrap()
}

#[test]
fn pipeline_agrees_with_branch_function() {
    let model = network(Arc::new(|z: &[f64]| [z[2].cos(), 1.0, 0.0]));
    let (_, bf) = chem_branch_function(&model, &[1.0], 512).unwrap();
    let pipe = chem_pipeline_branch_points(&model, &[1.0], 512).unwrap();
    assert_eq!(pipe.exponents, [2, 2]);
    assert_eq!(bf.zeros.len(), pipe.branch_points.len());
    for (z, p) in bf.zeros.iter().zip(&pipe.branch_points) {
        assert!((z - p.x0).abs() < 1e-5, "{z} vs {}", p.x0);
    }
}

#[test]
fn constant_perturbation_has_no_branch_points() {
    // b(t) and b(p) pair with a constant φ independently of λ, so g is constant
    let model = network(Arc::new(|_z: &[f64]| [1.0, 0.0, 0.0]));
    let (g, bf) = chem_branch_function(&model, &[1.0], 256).unwrap();
    assert!(bf.zeros.is_empty());
    assert!((g(0.5) - g(5.0)).abs() < 1e-12);
}

#[test]
fn zero_perturbation_is_degenerate() {
    let model = network(Arc::new(|_z: &[f64]| [0.0; 3]));
    assert!(matches!(chem_branch_function(&model, &[1.0], 128), Err(degenbif::Error::DegeneracyCheck(_))));
}

#[test]
fn cubic_rate_fails_the_quadratic_check() {
    let model = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(3)), vec![Arc::new(|z: &[f64]| [z[2].cos(), 1.0, 0.0])]).unwrap();
    assert!(!chem_regularity(&model).regular);
    assert!(matches!(chem_branch_function(&model, &[1.0], 128), Err(degenbif::Error::DegeneracyCheck(_))));
}
