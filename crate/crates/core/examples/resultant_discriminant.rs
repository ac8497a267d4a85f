//! Resultant of the versal pair and its low-order structure for m = 2..5.

use degenbif::deformation::DeformationParams;
use degenbif::resultant::{is_on_discriminant, resultant, sylvester_matrix, verify_structure};

fn main() -> anyhow::Result<()> {
    // p = 2 + y and pbar = y^2 - 4 share the root y = -2
    let p = DeformationParams::from_m2(2.0, 1.0, -4.0);
    println!("R2(2, 1, -4) = {:.3e}, on discriminant: {}", resultant(&p), is_on_discriminant(&p, 1e-9));
    println!("Sylvester matrix:\n{}", sylvester_matrix(&p).entries);

    for m in 2..=5 {
        let rep = verify_structure(m, 32, 7)?;
        println!("m = {m}: structure {} (max residual {:.2e})", if rep.all_pass() { "ok" } else { "FAILED" }, rep.max_residual());
    }
    Ok(())
}
