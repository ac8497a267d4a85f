//! Degenerate steady states of X1 + X2 <-> X3, 0 -> X2 and their branch points.

use std::sync::Arc;

use degenbif::applications::chemnet::{
    chem_branch_function, chem_pipeline_branch_points, chem_regularity, rate_family, ChemNetworkModel, PerturbationFn,
};

fn main() -> anyhow::Result<()> {
    for mu in [0.5, 0.0] {
        let m = ChemNetworkModel::new(rate_family(mu), vec![])?;
        let r = chem_regularity(&m);
        println!("v'(x1*) = {mu}: regular = {}, corank = {}", r.regular, r.corank);
    }

    let phi: PerturbationFn = Arc::new(|z: &[f64]| [z[2].cos(), 1.0, 0.0]);
    let model = ChemNetworkModel::new(Arc::new(|x: f64| (x - 1.0).powi(2)), vec![phi])?;
    let (_, bf) = chem_branch_function(&model, &[1.0], 512)?;
    println!("zeros of the branch function: {:?}", bf.zeros);
    let pipe = chem_pipeline_branch_points(&model, &[1.0], 512)?;
    println!("reduced exponents {:?}", pipe.exponents);
    for p in &pipe.branch_points {
        println!("  pipeline branch point at lambda = {:.8} ({:?})", p.x0, p.status);
    }
    Ok(())
}
