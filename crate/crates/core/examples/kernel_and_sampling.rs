//! Covariance kernel, sampling, and the empirical covariance of many samples.
//!
//! cargo run --release --example kernel_and_sampling

use hypergaf::gaf::{GafModel, KernelEvaluator, TailPolicy};
use hypergaf::geometry::Point;
use hypergaf::Caps;
use num_complex::Complex64;

fn main() -> hypergaf::Result<()> {
    let (n, l) = (2, 5.0);
    let z = Point::real(&[0.3, -0.2])?;
    let w = Point::new(vec![Complex64::new(0.1, 0.25), Complex64::new(0.2, 0.0)])?;
    let k = KernelEvaluator::new(l);
    println!("K_L(z,w)      = {:.12}", k.kernel(&z, &w));
    println!("|θ_L(z,w)|²   = {:.12}", k.normalized_kernel_sq(&z, &w));
    println!("ρ_L(z,w)      = {:.12}", k.rho(&z, &w));

    let model = GafModel::new(n, l, TailPolicy::new(0.5, 1e-12), &Caps::default())?;
    println!(
        "truncation degree {} with {} coefficients",
        model.degree,
        model.coefficient_count()
    );

    let trials = 20_000u64;
    let mut cov = Complex64::new(0.0, 0.0);
    for t in 0..trials {
        let s = model.sample(42, t);
        cov += s.evaluate(&z) * s.evaluate(&w).conj();
    }
    cov /= trials as f64;
    let exact = k.kernel(&z, &w);
    println!("E[f(z) conj f(w)] ≈ {cov:.4}  (kernel {exact:.4}, {trials} samples)");

    let s = model.sample(42, 0);
    println!(
        "log|f̂(z)|² for sample 0: {:.6}",
        s.evaluate_log_normalized(&z)
    );
    Ok(())
}
