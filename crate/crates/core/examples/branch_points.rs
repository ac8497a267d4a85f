//! Branch points of reduced models from the general, uniform and variational conditions.

use std::sync::Arc;

use degenbif::branching::{
    find_branch_points, find_variational_branch_points, BranchOptions, ModelSource, Variant, VariationalModel,
};
use degenbif::deformation::ManifoldChart;
use degenbif::synthetic::{example1, example2, uniform_model};

fn main() -> anyhow::Result<()> {
    let opts = BranchOptions::default();

    let m = example1(f64::sin)?;
    println!("(eps + y^2, eps sin x + y^3):");
    for p in find_branch_points(&ModelSource::new(&m), Variant::General, &opts)? {
        println!("  x0 = {:.6}, {:?}, eps sign {:?}", p.x0, p.status, p.eps_sign);
    }

    let m = example2(|_| 1.0, |x| (3.0 * x).sin())?;
    println!("(eps + y^2, eps sin 3x + y^2):");
    for p in find_branch_points(&ModelSource::new(&m), Variant::General, &opts)? {
        println!("  x0 = {:.6}, {:?}", p.x0, p.status);
    }

    let m = uniform_model(3)?;
    println!("uniform m = 3:");
    for p in find_branch_points(&ModelSource::new(&m), Variant::Uniform, &opts)? {
        println!("  x0 = {:.6}, {:?}, {:?}", p.x0, p.status, p.condition);
    }

    let var = VariationalModel {
        m: 3,
        g: Arc::new(f64::cos),
        r: Arc::new(|_| 1.0),
        chart: ManifoldChart::circle(),
    };
    println!("variational, g = cos x:");
    for p in find_variational_branch_points(&var, &opts)? {
        println!("  x0 = {:.6}, {:?}", p.x0, p.status);
    }
    Ok(())
}
