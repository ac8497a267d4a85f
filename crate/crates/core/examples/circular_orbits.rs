//! Degenerate energy levels of circular orbits in the Mexican hat potential.

use degenbif::applications::hamiltonian::{
    degenerate_energies, hessian_kernel_dimension, jacobi_expansion, kernel_dimension, radial_mode, RadialPotential,
    RadialPotentialModel,
};

fn main() -> anyhow::Result<()> {
    let pot = RadialPotential::mexican_hat(1.0);
    for lv in degenerate_energies(&pot, 2..=8) {
        match (lv.r0, lv.energy) {
            (Some(r0), Some(e)) => {
                let model = RadialPotentialModel::new(pot.clone(), r0)?;
                let k = kernel_dimension(&model, 32);
                println!(
                    "n = {}: r0^2 = {:.6}, E = {e:.6}, Hill band: {}, mode-rule kernel {}",
                    lv.n,
                    r0 * r0,
                    lv.in_hill_region,
                    k.dimension
                );
            }
            _ => println!("n = {}: omitted ({})", lv.n, lv.omitted.unwrap_or_default()),
        }
    }

    // compare the mode rule with the Hessian of the discretised Jacobi functional
    for r0_sq in [1.1, 1.2, 2.25] {
        let model = RadialPotentialModel::new(pot.clone(), f64::sqrt(r0_sq))?;
        let (dim, eig) = hessian_kernel_dimension(&model, 6, 512, 1e-6);
        let exp = jacobi_expansion(&model, &radial_mode(4), &[1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2], 512)?;
        println!(
            "r0^2 = {r0_sq}: Hessian kernel {dim} (smallest |eigenvalues| {:.2e}, {:.2e}), y^2 coefficient {:.3e}",
            eig[0].abs(),
            eig[1].abs(),
            exp.coeffs[1]
        );
    }
    Ok(())
}
