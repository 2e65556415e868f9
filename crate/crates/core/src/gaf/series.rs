//! One-variable restrictions `t ↦ f_L(tζ)` in normalised form.
//!
//! For a unit vector `ζ` the restriction is `Σ_m e^{ℓ_m} S_m t^m` with
//! `ℓ_m = ½ ln(Γ(L+m)/(m!Γ(L)))` and `S_m = Σ_{|α|=m} a_α sqrt(m!/α!) ζ^α`, so each
//! `S_m` has unit variance. At `|t| = ρ` the normalised value is
//! `f̂ = Σ_m b_m(ρ) S_m e^{imθ}` with `b_m(ρ) = e^{ℓ_m} ρ^m (1-ρ²)^{L/2}`; since
//! `Σ_m b_m² = 1` every scale lies in `(0, 1]` and nothing overflows for large `L`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Per-degree constants shared by every restriction of one model.
#[derive(Debug, Clone)]
pub struct LayerScales {
    pub(crate) l: f64,
    /// `ℓ_m`.
    pub(crate) log_weight: Vec<f64>,
    /// `e^{ℓ_{m+1} - ℓ_m} = sqrt((L+m)/(m+1))`.
    pub(crate) step: Vec<f64>,
}

impl LayerScales {
    pub fn new(l: f64, log_weight: Vec<f64>) -> Self {
        let step = (0..log_weight.len().saturating_sub(1))
            .map(|m| ((l + m as f64) / (m as f64 + 1.0)).sqrt())
            .collect();
        LayerScales {
            l,
            log_weight,
            step,
        }
    }

    pub fn degree(&self) -> usize {
        self.log_weight.len() - 1
    }

    /// `b_m(ρ)` for `m = 0..=degree`.
    pub fn scales(&self, rho: f64) -> Vec<f64> {
        let len = self.log_weight.len();
        let mut b = vec![0.0; len];
        if rho == 0.0 {
            b[0] = 1.0;
            return b;
        }
        let lr = rho.ln();
        let shift = 0.5 * self.l * (-rho * rho).ln_1p();
        let (peak, peak_log) = self
            .log_weight
            .iter()
            .enumerate()
            .map(|(m, lw)| (m, lw + m as f64 * lr))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        b[peak] = (peak_log + shift).exp();
        for m in peak..len - 1 {
            b[m + 1] = b[m] * self.step[m] * rho;
        }
        for m in (0..peak).rev() {
            b[m] = b[m + 1] / (self.step[m] * rho);
        }
        b
    }
}

/// `t ↦ f̂_L(tζ)` for one sample and one direction.
#[derive(Debug, Clone)]
pub struct RadialSeries {
    pub(crate) scales: Arc<LayerScales>,
    /// `S_m`, one per degree.
    pub coeffs: Vec<Complex64>,
}

impl RadialSeries {
    pub fn new(scales: Arc<LayerScales>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(scales.log_weight.len(), coeffs.len());
        RadialSeries { scales, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn intensity(&self) -> f64 {
        self.scales.l
    }

    /// Coefficients `b_m(ρ) S_m` of the polynomial in `u = t/ρ`.
    pub fn scaled_coeffs(&self, rho: f64) -> Vec<Complex64> {
        self.scales
            .scales(rho)
            .iter()
            .zip(&self.coeffs)
            .map(|(b, s)| s * *b)
            .collect()
    }

    /// `f̂(t) = f(t)(1-|t|²)^{L/2}` (up to the unimodular factor of the direction).
    pub fn eval_normalized(&self, t: Complex64) -> Complex64 {
        let rho = t.norm();
        let u = if rho > 0.0 {
            t / rho
        } else {
            Complex64::new(1.0, 0.0)
        };
        let c = self.scaled_coeffs(rho);
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * u + x)
    }

    /// `log|f̂(t)|²`.
    pub fn log_normalized(&self, t: Complex64) -> f64 {
        self.eval_normalized(t).norm_sqr().ln()
    }

    /// `f̂` at the `k`-th of `len` equispaced points of the circle `|t| = ρ`, `k = 0..len`.
    pub fn circle_values(&self, rho: f64, len: usize) -> Vec<Complex64> {
        circle_values_of(&self.scaled_coeffs(rho), len)
    }

    /// `Σ_m m b_m(ρ) |S_m|`, a Lipschitz constant of `θ ↦ f̂(ρe^{iθ})`.
    pub fn lipschitz(&self, rho: f64) -> f64 {
        self.scaled_coeffs(rho)
            .iter()
            .enumerate()
            .map(|(m, c)| m as f64 * c.norm())
            .sum()
    }

    /// Trapezoid mean of `log|f̂|²` over the circle `|t| = ρ` with `len` points.
    pub fn circle_log_mean(&self, rho: f64, len: usize) -> f64 {
        log_mean_sq(&self.circle_values(rho, len))
    }
}

/// Values of `Σ_m c_m ω^{mk}`, `ω = e^{2πi/len}`, via one inverse FFT after folding
/// degrees modulo `len`.
pub fn circle_values_of(c: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (m, &x) in c.iter().enumerate() {
        buf[m % len] += x;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len));
    fft.process(&mut buf);
    buf
}

/// `(1/K) Σ_k log|v_k|²`, accumulated as a product of mantissas with a separate binary
/// exponent so that only one logarithm is taken.
pub fn log_mean_sq(values: &[Complex64]) -> f64 {
    let mut mant = 1.0f64;
    let mut exp2: i64 = 0;
    for v in values {
        let a = v.norm_sqr();
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        mant *= a;
        if !(1e-150..=1e150).contains(&mant) {
            let (m, e) = frexp(mant);
            mant = m;
            exp2 += e as i64;
        }
    }
    let (m, e) = frexp(mant);
    (m.ln() + (exp2 + e as i64) as f64 * std::f64::consts::LN_2) / values.len() as f64
}

fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i32;
    if raw == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022u64 << 52));
    (m, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaf::weights::WeightTable;
    use approx::assert_relative_eq;

    fn scales(l: f64, degree: usize) -> Arc<LayerScales> {
        let t = WeightTable::new(l, degree).unwrap();
        Arc::new(LayerScales::new(
            l,
            (0..=degree).map(|m| t.layer_log_weight(m)).collect(),
        ))
    }

    #[test]
    fn scales_are_a_unit_vector() {
        let s = scales(300.0, 4000);
        let b = s.scales(0.8);
        let total: f64 = b.iter().map(|x| x * x).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-10);
        assert!(b.iter().all(|x| x.is_finite() && *x <= 1.0));
        let direct = (s.log_weight[500] + 500.0 * 0.8f64.ln() + 150.0 * (1.0 - 0.64f64).ln()).exp();
        assert_relative_eq!(b[500], direct, max_relative = 1e-11);
    }

    #[test]
    fn fft_matches_horner() {
        let s = scales(3.0, 40);
        let coeffs: Vec<Complex64> = (0..=40)
            .map(|m| Complex64::new((m as f64).sin(), (m as f64 * 0.7).cos()))
            .collect();
        let series = RadialSeries::new(s, coeffs);
        for &len in &[16usize, 64, 128] {
            let v = series.circle_values(0.6, len);
            for k in [0, 3, len - 1] {
                let t = Complex64::from_polar(0.6, std::f64::consts::TAU * k as f64 / len as f64);
                assert!((v[k] - series.eval_normalized(t)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn log_mean_matches_naive() {
        let v: Vec<Complex64> = (1..500)
            .map(|k| Complex64::new(1e-40 * k as f64, 1e30 / k as f64))
            .collect();
        let naive: f64 = v.iter().map(|x| x.norm_sqr().ln()).sum::<f64>() / v.len() as f64;
        assert_relative_eq!(log_mean_sq(&v), naive, max_relative = 1e-13);
    }

    #[test]
    fn constant_function() {
        let s = scales(5.0, 10);
        let mut c = vec![Complex64::new(0.0, 0.0); 11];
        c[0] = Complex64::new(1.0, 0.0);
        let series = RadialSeries::new(s, c);
        let t = Complex64::new(0.3, 0.4);
        assert_relative_eq!(
            series.log_normalized(t),
            5.0 * (1.0 - 0.25f64).ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            series.circle_log_mean(0.5, 64),
            5.0 * 0.75f64.ln(),
            max_relative = 1e-13
        );
    }
}
