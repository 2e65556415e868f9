use crate::geometry::{mu_density, one_minus_pseudo_distance_sq, Point};
use crate::special::dilog;
use num_complex::Complex64;

/// Closed-form covariance quantities of `f_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluator {
    pub l: f64,
}

impl KernelEvaluator {
    pub fn new(l: f64) -> Self {
        KernelEvaluator { l }
    }

    /// `K_L(z,w) = (1 - ⟨z,w⟩)^{-L}`, principal branch (`Re(1 - ⟨z,w⟩) > 0` on the ball).
    pub fn kernel(&self, z: &Point, w: &Point) -> Complex64 {
        let base = Complex64::new(1.0, 0.0) - z.inner(w);
        (-self.l * base.ln()).exp()
    }

    /// `θ_L(z,w) = K_L(z,w) / sqrt(K_L(z,z) K_L(w,w))`.
    pub fn normalized_kernel(&self, z: &Point, w: &Point) -> Complex64 {
        let base = Complex64::new(1.0, 0.0) - z.inner(w);
        let log_diag = 0.5 * self.l * ((1.0 - z.norm_sq()).ln() + (1.0 - w.norm_sq()).ln());
        (-self.l * base.ln() + log_diag).exp()
    }

    /// `|θ_L(z,w)|² = (1 - ϱ(z,w)²)^L`.
    pub fn normalized_kernel_sq(&self, z: &Point, w: &Point) -> f64 {
        one_minus_pseudo_distance_sq(z, w).powf(self.l)
    }

    /// `ρ_L(z,w) = Li₂(|θ_L(z,w)|²)`, four times the covariance of `log|f̂|` at `z`, `w`.
    pub fn rho(&self, z: &Point, w: &Point) -> f64 {
        dilog(self.normalized_kernel_sq(z, w))
    }

    /// Density of the expected zero current against `ν`: `L (1-|z|²)^{-(n+1)}`.
    /// For `n = 1` this is the expected number of zeros per unit `ν`-area.
    pub fn first_intensity_density(&self, z: &Point) -> f64 {
        first_intensity_density(z, self.l)
    }
}

pub fn kernel(z: &Point, w: &Point, l: f64) -> Complex64 {
    KernelEvaluator::new(l).kernel(z, w)
}

pub fn normalized_kernel(z: &Point, w: &Point, l: f64) -> Complex64 {
    KernelEvaluator::new(l).normalized_kernel(z, w)
}

pub fn rho(z: &Point, w: &Point, l: f64) -> f64 {
    KernelEvaluator::new(l).rho(z, w)
}

pub fn first_intensity_density(z: &Point, l: f64) -> f64 {
    l * mu_density(z.dim(), z.norm_sq())
}
