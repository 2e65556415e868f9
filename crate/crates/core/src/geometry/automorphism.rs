use super::point::{inner, Point};
use crate::error::{GafError, Result};
use num_complex::Complex64;

/// The involutive automorphism `φ_w` of the ball exchanging `w` and `0`:
///
/// `φ_w(z) = (w - P_w z - s_w Q_w z) / (1 - ⟨z, w⟩)`, with `P_w` the orthogonal
/// projection onto `ℂw`, `Q_w = I - P_w` and `s_w = sqrt(1 - |w|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    center: Point,
    s: f64,
}

impl Automorphism {
    pub fn new(center: Point) -> Self {
        let s = (1.0 - center.norm_sq()).sqrt();
        Automorphism { center, s }
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn apply(&self, z: &Point) -> Point {
        Point::from_mapped(self.apply_raw(z.coords()))
    }

    pub(crate) fn apply_raw(&self, z: &[Complex64]) -> Vec<Complex64> {
        let w = self.center.coords();
        let ww = self.center.norm_sq();
        let zw = inner(z, w);
        let denom = Complex64::new(1.0, 0.0) - zw;
        if ww == 0.0 {
            return z.iter().map(|c| -c).collect();
        }
        let coef = zw / ww;
        w.iter()
            .zip(z)
            .map(|(&wj, &zj)| {
                let p = coef * wj;
                let q = zj - p;
                (wj - p - self.s * q) / denom
            })
            .collect()
    }
}

fn check_dims(z: &Point, w: &Point) -> Result<()> {
    if z.dim() != w.dim() {
        return Err(GafError::domain(format!(
            "dimension mismatch: {} vs {}",
            z.dim(),
            w.dim()
        )));
    }
    Ok(())
}

/// `φ_w(z)`.
pub fn mobius_apply(w: &Point, z: &Point) -> Result<Point> {
    check_dims(z, w)?;
    Ok(Automorphism::new(w.clone()).apply(z))
}

/// `1 - ϱ(z,w)² = (1-|z|²)(1-|w|²) / |1 - ⟨z,w⟩|²`.
pub fn one_minus_pseudo_distance_sq(z: &Point, w: &Point) -> f64 {
    let d = (Complex64::new(1.0, 0.0) - z.inner(w)).norm_sqr();
    ((1.0 - z.norm_sq()) * (1.0 - w.norm_sq()) / d).min(1.0)
}

/// `ϱ(z,w)²`, using `|1-⟨z,w⟩|² - (1-|z|²)(1-|w|²) = |z-w|² - Σ_{j<k} |z_j w_k - z_k w_j|²`
/// for the numerator, so that nearby points do not lose digits to cancellation.
pub fn pseudo_distance_sq(z: &Point, w: &Point) -> f64 {
    let (a, b) = (z.coords(), w.coords());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let mut cross = 0.0;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            cross += (a[j] * b[k] - a[k] * b[j]).norm_sqr();
        }
    }
    let d = (Complex64::new(1.0, 0.0) - z.inner(w)).norm_sqr();
    ((diff - cross) / d).clamp(0.0, 1.0)
}

/// Pseudo-hyperbolic distance `ϱ(z,w) = |φ_w(z)|`.
pub fn pseudo_distance(z: &Point, w: &Point) -> Result<f64> {
    check_dims(z, w)?;
    Ok(pseudo_distance_sq(z, w).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{aux_rng, sphere_point, uniform};
    use approx::assert_abs_diff_eq;

    fn random_point(rng: &mut rand_chacha::ChaCha8Rng, n: usize, rmax: f64) -> Point {
        let dir = sphere_point(rng, n);
        let r = rmax * uniform(rng).powf(1.0 / (2.0 * n as f64));
        Point::new(dir.into_iter().map(|c| c * r).collect()).unwrap()
    }

    #[test]
    fn swaps_center_and_origin() {
        let w = Point::real(&[0.3, -0.2]).unwrap();
        let phi = Automorphism::new(w.clone());
        assert!(phi.apply(&w).norm() < 1e-15);
        let back = phi.apply(&Point::origin(2));
        for (a, b) in back.coords().iter().zip(w.coords()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn worked_values() {
        let w = Point::real(&[0.5]).unwrap();
        let z = Point::real(&[-0.5]).unwrap();
        assert_abs_diff_eq!(mobius_apply(&w, &z).unwrap().norm(), 0.8, epsilon = 1e-15);
        let z = Point::real(&[0.5, 0.0]).unwrap();
        let w = Point::real(&[0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(1.0 - pseudo_distance_sq(&z, &w), 0.5625, epsilon = 1e-15);
        assert_abs_diff_eq!(
            pseudo_distance(&z, &w).unwrap(),
            0.661_437_827_766_147_8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn identity_and_involution_on_random_pairs() {
        for n in 1..=3 {
            let mut rng = aux_rng(3, 99, n as u64);
            for _ in 0..10_000 {
                let z = random_point(&mut rng, n, 0.999);
                let w = random_point(&mut rng, n, 0.999);
                let phi = Automorphism::new(w.clone());
                let fz = phi.apply(&z);
                let lhs = 1.0 - fz.norm_sq();
                let rhs = (1.0 - z.norm_sq()) * (1.0 - w.norm_sq())
                    / (Complex64::new(1.0, 0.0) - z.inner(&w)).norm_sqr();
                assert!((lhs - rhs).abs() < 1e-10, "n={n}: {lhs} vs {rhs}");
                let zz = phi.apply(&fz);
                for (a, b) in zz.coords().iter().zip(z.coords()) {
                    assert!((a - b).norm() < 1e-10);
                }
                assert!((pseudo_distance_sq(&z, &w) - fz.norm_sq()).abs() < 1e-10);
                assert!((pseudo_distance_sq(&z, &w) - pseudo_distance_sq(&w, &z)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let z = Point::real(&[0.1]).unwrap();
        let w = Point::real(&[0.1, 0.1]).unwrap();
        assert!(mobius_apply(&w, &z).is_err());
        assert!(pseudo_distance(&z, &w).is_err());
    }
}
