//! The three-event construction that forces a hole: choice of the constant, its
//! probability, and conditioned samples that indeed have no zero.
//!
//! cargo run --release --example hole_certificate

use hypergaf::zeros::{
    certificate_log_probability, certificate_sample, min_modulus_on_disk, scan_constant,
    HoleCertificateSpec,
};
use hypergaf::Caps;

fn main() -> hypergaf::Result<()> {
    let (n, l, r) = (1, 12.0, 0.3);
    let scan = scan_constant(n, l, r, 0.05, 1000.0)?;
    println!("C = {} after {} steps", scan.chosen, scan.steps.len());
    let spec = HoleCertificateSpec::new(n, l, r, scan.chosen, &Caps::default())?;
    println!(
        "bounds: middle {:.4}, tail {:.4}",
        spec.bounds.middle, spec.bounds.tail
    );
    let lp = certificate_log_probability(&spec);
    println!(
        "log P ≥ {:.4} = {:.4} (E₁) + {:.4} (E₂) + {:.4} (E₃)",
        lp.total, lp.e1, lp.e2, lp.e3
    );

    let mut least = f64::INFINITY;
    let mut holes = 0;
    for t in 0..500 {
        if let Some(m) = min_modulus_on_disk(&certificate_sample(&spec, 1, t), r)? {
            holes += 1;
            least = least.min(m);
        }
    }
    println!(
        "{holes}/500 conditioned samples have a hole; smallest min |f| on the disk: {least:.4}"
    );
    Ok(())
}
