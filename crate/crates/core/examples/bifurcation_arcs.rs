//! Bifurcation arcs of the circle model for m = 2, 3, 4, with fitted contact orders.

use degenbif::blowup::{bifurcation_arcs_m, bifurcation_arcs_m2, ArcOptions};
use degenbif::synthetic::circle_expansion;

fn main() -> anyhow::Result<()> {
    let opts = ArcOptions::default();
    for m in 2..=4 {
        let data = circle_expansion(m, 1.0);
        let arcs = if m == 2 {
            bifurcation_arcs_m2(&data, &opts)?
        } else {
            bifurcation_arcs_m(m, &data, &opts)?
        };
        println!("m = {m}: {} arcs", arcs.len());
        for a in &arcs {
            let fits: Vec<String> = a
                .fitted_orders
                .iter()
                .map(|f| f.map_or("-".into(), |v| format!("{v:.3}")))
                .collect();
            println!(
                "  {:?} group {} at (θ, x) = ({:.4}, {:.4}), sides {:?}, contact {:?}, fitted [{}]{}",
                a.kind,
                a.group,
                a.source.theta,
                a.source.x,
                a.sides,
                a.contact_order,
                fits.join(", "),
                if a.annotations.is_empty() { String::new() } else { format!(" ({})", a.annotations.join("; ")) }
            );
        }
    }
    Ok(())
}
