//! The sub-mean-value inequality for `log|f̂|²` over invariant balls, and how often the
//! maximum over a fixed ball stays within `δL`.
//!
//! cargo run --release --example submean

use hypergaf::gaf::{GafModel, TailPolicy};
use hypergaf::geometry::Point;
use hypergaf::stats::{control_max_frequency, random_centre, submean_check, SubmeanSettings};
use hypergaf::Caps;

fn main() -> hypergaf::Result<()> {
    for (n, l) in [(1, 10.0), (2, 4.0)] {
        let s = 0.3;
        let model = GafModel::new(n, l, TailPolicy::new(0.6, 1e-10), &Caps::default())?;
        let mut least = f64::INFINITY;
        for t in 0..50 {
            let lambda = random_centre(n, 0.3, 1, t);
            let slack =
                submean_check(&model.sample(1, t), &lambda, s, &SubmeanSettings::default())?;
            least = least.min(slack.slack);
        }
        println!("n={n}, L={l}: smallest slack over 50 samples {least:.3e}");
    }

    let z0 = Point::real(&[0.2])?;
    for p in control_max_frequency(1, &z0, 0.3, 0.5, &[2.0, 8.0, 32.0], 400, 2, 0)? {
        println!(
            "L={:>4}: frequency {:.3} [{:.3}, {:.3}]",
            p.l, p.frequency, p.ci_lo, p.ci_hi
        );
    }
    Ok(())
}
