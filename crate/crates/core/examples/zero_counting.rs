//! Zeros of one-dimensional samples: roots in a disk, argument-principle counts, and the
//! mean count against `L μ(B(0,r))`.
//!
//! cargo run --release --example zero_counting

use hypergaf::gaf::{GafModel, TailPolicy};
use hypergaf::stats::intensity_campaign;
use hypergaf::zeros::{count_disk, roots_disk};
use hypergaf::Caps;

fn main() -> hypergaf::Result<()> {
    let (l, r) = (20.0, 0.5);
    let model = GafModel::new(1, l, TailPolicy::new(r, 1e-10), &Caps::default())?;
    let sample = model.sample(7, 0);

    let roots = roots_disk(&sample, r)?;
    println!("{} roots in |z| < {r} ({:?})", roots.count, roots.certainty);
    for z in roots.roots_complex() {
        println!(
            "  {z:.6}  |f̂| = {:.2e}",
            sample
                .evaluate_normalized(&hypergaf::geometry::Point::new(vec![z])?)
                .norm()
        );
    }
    let wind = count_disk(&sample, r)?;
    println!("argument principle: {} ({:?})", wind.count, wind.certainty);
    println!("as a JSON line: {}", wind.to_json_line());

    let res = intensity_campaign(l, r, 1e-10, 4000, 7, 0)?;
    println!(
        "mean count {:.4} ± {:.4}, expected {:.4}, uncertain {}",
        res.mean, res.se, res.expected, res.uncertain
    );
    Ok(())
}
