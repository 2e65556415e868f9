//! The closed-form identities with their independent checks, including the two that
//! hold only in corrected form.
//!
//! cargo run --release --example identity_suite

use hypergaf::stats::{
    condition_b_integral, identity_suite, layer_sum_exact, truncated_beta_closed,
    truncated_beta_variant, IdentityStatus,
};

fn main() -> hypergaf::Result<()> {
    for (n, m) in [(1, 5), (2, 2), (3, 4), (4, 10)] {
        println!(
            "Σ_{{|α|={m}}} α^α/(α! m^m) for n={n}: {}",
            layer_sum_exact(n, m)?
        );
    }
    println!(
        "n ∫_0^r (1-t)^(k-1) t^(n-1) dt at n=3, k=1, r=0.5: {} ((n-j)! in the sum), {} (Γ(n-j))",
        truncated_beta_closed(3, 1.0, 0.5),
        truncated_beta_variant(3, 1.0, 0.5)
    );
    println!(
        "∫(1-|z|²)^(L/2) dμ at n=1, L=6: {}",
        condition_b_integral(1, 6.0)?
    );

    let reports = identity_suite(0)?;
    let count = |s| reports.iter().filter(|r| r.status == s).count();
    println!(
        "{} checks: {} pass, {} measured, {} fail",
        reports.len(),
        count(IdentityStatus::Pass),
        count(IdentityStatus::Measured),
        count(IdentityStatus::Fail)
    );
    for r in reports
        .iter()
        .filter(|r| r.status == IdentityStatus::Measured)
        .take(5)
    {
        println!("  {}: {}", r.label(), r.note.as_deref().unwrap_or(""));
    }
    Ok(())
}
