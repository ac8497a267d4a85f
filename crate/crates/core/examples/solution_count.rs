//! Brute-force zero counts: fixed parameters and a count map around a circle of radius rho.

use degenbif::deformation::Field2;
use degenbif::oracle::{count_solutions, region_count_map, CountMapOptions, CountOptions, Window};
use degenbif::synthetic::{circle_versal, example1};

fn main() -> anyhow::Result<()> {
    let m = example1(f64::sin)?;
    let window = Window::for_chart(&m.chart(), 0.1);
    for eps in [-1e-4, 1e-4] {
        let set = count_solutions(&m, &[eps], &window, &CountOptions::default())?;
        println!("eps = {eps:+e}: {} zeros", set.count());
        for z in &set.zeros {
            println!("  (x, y) = ({:.6}, {:+.6})", z.x, z.y);
        }
    }

    let fam = circle_versal(2, 1.0)?;
    let opts = CountMapOptions {
        n_angles: 360,
        count: CountOptions { nx: 160, ny: 120, ..CountOptions::default() },
        ..CountMapOptions::default()
    };
    let map = region_count_map(&fam, 1e-2, &Window::for_chart(&fam.chart(), 0.3), &opts)?;
    println!("circle model m = 2 at rho = 1e-2:");
    for j in &map.jumps {
        println!("  theta = {:.4}: {} -> {}", j.theta, j.from, j.to);
    }
    Ok(())
}
