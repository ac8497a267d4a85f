//! Numerical reduction of a three-dimensional system with a ring of equilibria.
//!
//! The field is `-(rho - 1) e_r + (eps + z3^2) e_theta + (eps sin(theta) + z3^3) e_z`,
//! whose reduced pair is `(eps + y^2, eps sin x + y^3)`.

use std::path::Path;

use degenbif::lyapunov_schmidt::{build_reduction, extract_branch_data};
use degenbif::model::ModelDoc;

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/models/ring_system.json");
    let ModelDoc::System(doc) = ModelDoc::load(&path)? else {
        anyhow::bail!("expected a system document");
    };
    let red = build_reduction(&doc.build()?, 64, 1e-8)?;
    println!("{} frames, {} warnings", red.samples.len(), red.warnings.len());
    for k in 0..8 {
        let x = k as f64 * std::f64::consts::TAU / 8.0;
        let e = extract_branch_data(&red, x, 0.05, 1e-3)?;
        println!("x = {x:.4}: m = {:?}, r = [{:.4}, {:.4}], g = [{:.4}, {:.4}]", e.m, e.r[0], e.r[1], e.g[0][0], e.g[1][0]);
    }
    let f = red.reduced_field(&[1e-3], 1.0, 0.02)?;
    println!("reduced field at (eps, x, y) = (1e-3, 1, 0.02): {f:?}");
    Ok(())
}
