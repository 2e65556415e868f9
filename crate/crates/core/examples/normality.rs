//! Standardised fluctuations of a linear statistic against the standard normal.
//!
//! cargo run --release --example normality

use hypergaf::stats::{normality_campaign, MollifiedIndicator, PotentialSettings};

fn main() -> hypergaf::Result<()> {
    let psi = MollifiedIndicator::new(1, 0.5, 0.2);
    let res = normality_campaign(
        &psi,
        100.0,
        1e-10,
        &PotentialSettings::default(),
        2000,
        11,
        0,
    )?;
    let s = &res.summary;
    println!(
        "E[I_L] = {:.4}, Var (quadrature) = {:.6}",
        res.expected, res.variance_quad
    );
    println!("sample variance of fluctuations: {:.6}", res.raw.variance);
    println!(
        "standardised: mean {:.4}, variance {:.4}, skewness {:.4}, excess kurtosis {:.4}",
        s.moments.mean, s.moments.variance, s.moments.skewness, s.moments.excess_kurtosis
    );
    println!(
        "KS D = {:.4}, p = {:.3}, rejected at 1%: {}",
        s.ks.statistic,
        s.ks.p_value,
        s.rejected_at(0.01)
    );
    Ok(())
}
