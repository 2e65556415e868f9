//! Variance of a smooth linear statistic against `n! ζ(n+2) ∫(Dψ)² dμ / Lⁿ`.
//!
//! cargo run --release --example variance_asymptotics

use hypergaf::stats::{
    radial_factor, self_averaging_slope, variance_asymptote, variance_monte_carlo,
    variance_quadrature, RadialBump, VarianceRule,
};

fn main() -> hypergaf::Result<()> {
    let psi = RadialBump::new(1, 0.7, 4);
    let rule = VarianceRule::default();
    let limit = variance_asymptote(&psi)?;
    println!("limit of L·Var: {limit:.6}");
    println!(
        "{:>6} {:>12} {:>10} {:>12}",
        "L", "L·Var", "error", "L·J(L)"
    );
    for l in [20.0, 40.0, 80.0, 160.0, 320.0] {
        let v = variance_quadrature(&psi, l, &rule)?;
        println!(
            "{l:>6} {:>12.6} {:>10.1e} {:>12.6}",
            l * v.value,
            l * v.error,
            l * radial_factor(1, l)?
        );
    }

    let mc = variance_monte_carlo(&psi, 80.0, 50_000, 3)?;
    let q = variance_quadrature(&psi, 80.0, &rule)?;
    println!(
        "L=80: quadrature {:.6e}, Monte Carlo {:.6e} ± {:.1e}",
        q.value, mc.value, mc.error
    );

    let ls = [20.0, 40.0, 80.0, 160.0];
    println!(
        "slope of log(Var/E²) against log L: {:.3}",
        self_averaging_slope(&psi, &ls, &rule)?
    );

    let psi2 = RadialBump::new(2, 0.7, 4);
    let v2 = variance_quadrature(&psi2, 40.0, &rule)?;
    println!(
        "n=2, L=40: L²·Var = {:.6}, limit {:.6}",
        1600.0 * v2.value,
        variance_asymptote(&psi2)?
    );
    Ok(())
}
