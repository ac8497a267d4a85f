//! End points of the tangent cone for the circle model, classified by stratum.

use degenbif::blowup::find_special_points_m2;
use degenbif::synthetic::circle_expansion;

fn main() {
    let data = circle_expansion(2, 1.0);
    for p in find_special_points_m2(&data, [0.0, std::f64::consts::TAU], 200) {
        let theta = p.s[1].atan2(p.s[0]);
        println!(
            "theta = {theta:+.4}, x = {:.4}: {:?} in {:?}, b = {:?}",
            p.x, p.kind, p.stratum, p.residuals
        );
    }
}
