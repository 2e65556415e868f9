use crate::error::{GafError, Result};
use num_complex::Complex64;

/// A point of the open unit ball in `ℂⁿ` with its squared norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
    norm_sq: f64,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GafError::domain("point must have at least one coordinate"));
        }
        let norm_sq = norm_sq(&coords);
        if !(norm_sq < 1.0) {
            return Err(GafError::domain(format!(
                "point outside the unit ball (|z|^2 = {norm_sq})"
            )));
        }
        Ok(Point { coords, norm_sq })
    }

    /// Real coordinates, for quick construction.
    pub fn real(coords: &[f64]) -> Result<Self> {
        Point::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(n: usize) -> Self {
        Point {
            coords: vec![Complex64::new(0.0, 0.0); n],
            norm_sq: 0.0,
        }
    }

    /// Used for results of maps that land in the ball mathematically; rounding that
    /// pushes the norm to 1 is pulled back just inside.
    pub(crate) fn from_mapped(mut coords: Vec<Complex64>) -> Self {
        let mut ns = norm_sq(&coords);
        if ns >= 1.0 {
            let scale = ((1.0 - f64::EPSILON) / ns).sqrt();
            coords.iter_mut().for_each(|c| *c *= scale);
            ns = norm_sq(&coords);
        }
        Point {
            coords,
            norm_sq: ns,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// `⟨z, w⟩ = Σ z_j w̄_j`.
    pub fn inner(&self, w: &Point) -> Complex64 {
        inner(&self.coords, &w.coords)
    }
}

pub(crate) fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_boundary_and_outside() {
        assert!(Point::real(&[1.0]).is_err());
        assert!(Point::real(&[0.8, 0.61]).is_err());
        assert!(Point::real(&[0.8, 0.5]).is_ok());
        assert!(Point::real(&[0.5, 0.5]).is_ok());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn mapped_points_stay_inside() {
        let p = Point::from_mapped(vec![Complex64::new(1.0, 0.0)]);
        assert!(p.norm_sq() < 1.0);
    }
}
