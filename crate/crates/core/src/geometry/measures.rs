//! Invariant measures on the ball.
//!
//! `ν` is Lebesgue measure normalised so that `ν(𝔹ₙ) = 1`; in polar coordinates
//! `z_j = sqrt(t_j) e^{iθ_j}` it reads `n! Π dt_j dθ_j / 2π`. The invariant measure is
//! `dμ = dν / (1-|z|²)^{n+1}` and `ω` has coefficient matrix `Ω(z)` with `ωⁿ = μ`.

use super::point::Point;
use crate::error::{GafError, Result};
use crate::special::integrate;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureDensities {
    pub n: usize,
}

impl MeasureDensities {
    pub fn new(n: usize) -> Self {
        MeasureDensities { n }
    }

    /// `ν(𝔹ₙ)`.
    pub fn nu_total(&self) -> f64 {
        1.0
    }

    /// Density of `μ` with respect to `ν`.
    pub fn mu_density_at(&self, z: &Point) -> f64 {
        mu_density(self.n, z.norm_sq())
    }

    /// `Ω(z)_{jk} = [(1-|z|²) δ_jk + z̄_j z_k] / (1-|z|²)²`.
    pub fn omega_matrix_at(&self, z: &Point) -> DMatrix<Complex64> {
        omega_matrix(z)
    }
}

pub fn mu_density(n: usize, t: f64) -> f64 {
    (1.0 - t).powi(-(n as i32 + 1))
}

pub fn omega_matrix(z: &Point) -> DMatrix<Complex64> {
    let n = z.dim();
    let a = 1.0 - z.norm_sq();
    let c = z.coords();
    DMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { a } else { 0.0 };
        (Complex64::new(d, 0.0) + c[j].conj() * c[k]) / (a * a)
    })
}

fn check_radius(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(GafError::domain(format!("radius {s} outside (0,1)")))
    }
}

/// `μ(B(0,s)) = s^{2n} / (1-s²)ⁿ`; by invariance this is also `μ(E(w,s))`.
pub fn invariant_volume_ball(s: f64, n: usize) -> Result<f64> {
    check_radius(s)?;
    let t = s * s;
    Ok((t / (1.0 - t)).powi(n as i32))
}

/// `ε(n,s) = n / Xⁿ ∫₀^X x^{n-1} log(1+x) dx` with `X = s²/(1-s²)`.
///
/// This is the amount by which the `μ`-mean of `log(1-|ξ|²)` over `E(λ,s)` falls
/// short of `log(1-|λ|²)`. It satisfies `0 < ε ≤ X`.
pub fn epsilon_mean(n: usize, s: f64) -> Result<f64> {
    check_radius(s)?;
    if n == 0 {
        return Err(GafError::domain("dimension must be positive"));
    }
    let big_x = s * s / (1.0 - s * s);
    let k = n as i32 - 1;
    // Substitute x = X u to keep the integrand O(1).
    let r = integrate(
        |u: f64| u.powi(k) * (big_x * u).ln_1p(),
        0.0,
        1.0,
        1e-16,
        1e-14,
        200,
    );
    Ok(n as f64 * r.value)
}

/// `∫_{B(0,s)} g(|z|²) dν = ∫₀^{s²} g(t) n t^{n-1} dt` for radial integrands.
pub fn radial_nu_integral<F: FnMut(f64) -> f64>(n: usize, s: f64, mut g: F, rel_tol: f64) -> f64 {
    let k = n as i32 - 1;
    integrate(
        |t: f64| g(t) * n as f64 * t.powi(k),
        0.0,
        s * s,
        1e-300,
        rel_tol,
        400,
    )
    .value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(
            invariant_volume_ball(0.5, 1).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            invariant_volume_ball(0.5, 2).unwrap(),
            1.0 / 9.0,
            max_relative = 1e-15
        );
        let s = 1e-4;
        assert_relative_eq!(
            invariant_volume_ball(s, 3).unwrap() / s.powi(6),
            1.0,
            max_relative = 1e-7
        );
        assert!(invariant_volume_ball(1.0, 1).is_err());
        assert!(invariant_volume_ball(0.0, 1).is_err());
    }

    #[test]
    fn epsilon_closed_form_n1() {
        let s = 0.5f64.sqrt();
        let expected = 2.0 * std::f64::consts::LN_2 - 1.0;
        assert_relative_eq!(epsilon_mean(1, s).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn epsilon_bounds() {
        for n in 1..=4 {
            for &s in &[0.01, 0.2, 0.5, 0.9, 0.99] {
                let e = epsilon_mean(n, s).unwrap();
                let x = s * s / (1.0 - s * s);
                assert!(e > 0.0 && e <= x, "n={n} s={s}: {e} vs {x}");
            }
        }
        assert!(epsilon_mean(2, 1e-6).unwrap() < 1e-11);
    }

    #[test]
    fn epsilon_matches_log_mean() {
        for n in 1..=3 {
            for &s in &[0.3, 0.6, 0.85] {
                let vol = invariant_volume_ball(s, n).unwrap();
                let mean =
                    radial_nu_integral(n, s, |t| (1.0 - t).ln() * mu_density(n, t), 1e-14) / vol;
                assert!((epsilon_mean(n, s).unwrap() + mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn omega_determinant_and_positivity() {
        let z = Point::new(vec![Complex64::new(0.3, -0.1), Complex64::new(0.2, 0.4)]).unwrap();
        let m = omega_matrix(&z);
        let det = m.clone().determinant();
        assert_relative_eq!(det.re, mu_density(2, z.norm_sq()), max_relative = 1e-13);
        assert!(det.im.abs() < 1e-13);
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e > 0.0));
    }
}
