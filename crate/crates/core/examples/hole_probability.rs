//! Probability of no zero in `B(0,r)`, with the certificate lower bound overlaid.
//!
//! cargo run --release --example hole_probability

use hypergaf::stats::hole_campaign;

fn main() -> hypergaf::Result<()> {
    let ls = [4.0, 8.0, 12.0, 16.0];
    let res = hole_campaign(1, 0.3, &ls, 1e-10, 16, 100_000, 9, 0, true)?;
    for (p, c) in res.curve.points.iter().zip(&res.certificates) {
        println!(
            "L={:>4}: p̂ = {:.4e} [{:.3e}, {:.3e}], certificate log P ≥ {:.2} (C = {:.2}, below: {})",
            p.l, p.p_hat, p.ci_lo, p.ci_hi, c.log_probability.total, c.c, c.below
        );
    }
    if let Some(fit) = res.curve.fit {
        println!(
            "-log p̂ ≈ {:.4} + {:.5}·L²  (R² = {:.4})",
            fit.intercept, fit.slope, fit.r_squared
        );
    }
    println!("uncertain trials: {}", res.uncertain);

    let res2 = hole_campaign(2, 0.3, &[2.0, 4.0], 1e-10, 16, 2000, 9, 0, false)?;
    for p in &res2.curve.points {
        println!(
            "n=2 L={}: p̂ = {:.3e} (slice evidence, not certified)",
            p.l, p.p_hat
        );
    }
    Ok(())
}
