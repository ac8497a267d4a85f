//! Continuation of the solution branch born at a branch point, with fitted exponents.

use degenbif::oracle::{trace_branch, TraceOptions};
use degenbif::synthetic::{example1, uniform_model};

fn main() -> anyhow::Result<()> {
    let cases = [("(eps + y^2, eps sin x + y^3)", example1(f64::sin)?), ("uniform m = 3", uniform_model(3)?)];
    for (name, model) in &cases {
        for dir in [-1.0, 1.0] {
            match trace_branch(model, 0.0, &[dir], &TraceOptions::default()) {
                Ok(t) => println!(
                    "{name}, eps direction {dir:+}: |eps| ~ t^{:.3}, x - x0 ~ t^{}, y ~ t^{:.3} ({} samples)",
                    t.alpha_eps,
                    t.alpha_x.map_or("-".into(), |a| format!("{a:.3}")),
                    t.alpha_y,
                    t.samples.len()
                ),
                Err(e) => println!("{name}, eps direction {dir:+}: {e}"),
            }
        }
    }
    Ok(())
}
