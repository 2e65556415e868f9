//! Automorphisms, the pseudo-hyperbolic distance and the invariant measure on the ball.
//!
//! cargo run --release --example ball_geometry

use hypergaf::geometry::{
    build_grid, epsilon_mean, invariant_volume_ball, mobius_apply, mu_density,
    one_minus_pseudo_distance_sq, pseudo_distance, GridRule, Point,
};
use hypergaf::Caps;
use num_complex::Complex64;

fn main() -> hypergaf::Result<()> {
    let z = Point::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)])?;
    let w = Point::new(vec![Complex64::new(0.5, -0.2), Complex64::new(0.1, 0.1)])?;

    let moved = mobius_apply(&w, &z)?;
    println!("φ_w(z)            = {:?}", moved.coords());
    println!("φ_w(φ_w(z)) - z   = {:.2e}", {
        let back = mobius_apply(&w, &moved)?;
        back.coords()
            .iter()
            .zip(z.coords())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    });
    println!("1 - |φ_w(z)|²     = {:.15}", 1.0 - moved.norm_sq());
    println!(
        "closed form       = {:.15}",
        one_minus_pseudo_distance_sq(&z, &w)
    );
    println!("ϱ(z, w)           = {:.15}", pseudo_distance(&z, &w)?);

    // μ-volume of an invariant ball does not depend on its centre
    for n in 1..=3 {
        println!(
            "n={n}: μ(B(0,0.5)) = {:.6}, ε(n,0.5) = {:.6}",
            invariant_volume_ball(0.5, n)?,
            epsilon_mean(n, 0.5)?
        );
    }

    // the same volume by tensor quadrature of the μ density
    let grid = build_grid(2, 0.5, GridRule::new(24, 8, 32), &Caps::default())?;
    let vol = grid.integrate(|p| mu_density(2, p.norm_sq()));
    println!(
        "grid μ(B(0,0.5)) for n=2: {vol:.10} (exact {:.10})",
        invariant_volume_ball(0.5, 2)?
    );
    Ok(())
}
