//! Probability that `I_L(ψ)/L` strays from `∫ψ dμ`, and its decay in `L`.
//!
//! cargo run --release --example large_deviations

use hypergaf::stats::{large_deviation_campaign, Deviation, MollifiedIndicator, PotentialSettings};

fn main() -> hypergaf::Result<()> {
    let psi = MollifiedIndicator::new(1, 0.5, 0.05);
    let ls = [5.0, 10.0, 15.0];
    let res = large_deviation_campaign(
        &psi,
        0.5,
        Deviation::Relative,
        &ls,
        1e-10,
        &PotentialSettings::coarse(),
        20_000,
        5,
        0,
    )?;
    println!("threshold on |I/L - ∫ψdμ|: {:.4}", res.threshold);
    for p in &res.curve.points {
        println!(
            "L={:>4}: p̂ = {:.3e}  [{:.3e}, {:.3e}]  ({} events)",
            p.l, p.p_hat, p.ci_lo, p.ci_hi, p.events
        );
    }
    if let Some(fit) = res.curve.fit {
        println!(
            "-log p̂ ≈ {:.4} + {:.5}·L²  (R² = {:.3})",
            fit.intercept, fit.slope, fit.r_squared
        );
    }
    Ok(())
}
