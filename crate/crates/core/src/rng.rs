//! Per-trial random streams.
//!
//! Every trial owns a ChaCha8 stream keyed by the master seed with stream id = trial
//! index. Coefficient number `k` always consumes words `4k .. 4k+4` of that stream, so
//! a coefficient depends only on `(seed, trial, ordinal)`: samples are independent of
//! execution order and thread count, and a degree-`M+10` sample extends the degree-`M`
//! sample with the same leading coefficients.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::TAU;

/// Words consumed per coefficient.
pub const WORDS_PER_COEFFICIENT: u128 = 4;

fn key(seed: u64, domain: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&domain.to_le_bytes());
    k[16..24].copy_from_slice(b"hypergaf");
    k
}

/// Uniform on `[0, 1)` with 53 random bits.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream of coefficient draws for one trial.
#[derive(Debug, Clone)]
pub struct CoefficientStream {
    rng: ChaCha8Rng,
}

impl CoefficientStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key(seed, 0));
        rng.set_stream(trial);
        CoefficientStream { rng }
    }

    /// Position the stream at coefficient `ordinal`.
    pub fn seek(&mut self, ordinal: u64) {
        self.rng
            .set_word_pos(ordinal as u128 * WORDS_PER_COEFFICIENT);
    }

    /// The raw pair `(u, v)` of uniforms on `[0, 1)` for the next coefficient:
    /// `u` drives the squared modulus, `v` the phase.
    pub fn next_uniforms(&mut self) -> (f64, f64) {
        let u = unit(self.rng.next_u64());
        let v = unit(self.rng.next_u64());
        (u, v)
    }

    /// Standard complex Gaussian: `|a|² ~ Exp(1)`, independent uniform phase.
    pub fn next_gaussian(&mut self) -> Complex64 {
        let (u, v) = self.next_uniforms();
        let modulus_sq = -(-u).ln_1p();
        polar_from(modulus_sq, v)
    }
}

/// Complex number with squared modulus `modulus_sq` and phase `2π v`.
pub fn polar_from(modulus_sq: f64, v: f64) -> Complex64 {
    Complex64::from_polar(modulus_sq.sqrt(), TAU * v)
}

/// Auxiliary generator for draws that are not GAF coefficients (random slice
/// directions, QMC shifts, test points). Separated from coefficient streams by key.
pub fn aux_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain.wrapping_add(1)));
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)` from any generator.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    unit(rng.next_u64())
}

/// Standard real normal by Box–Muller.
pub fn std_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u = 1.0 - uniform(rng);
    let v = uniform(rng);
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// Uniform point on the unit sphere of `ℂⁿ`.
pub fn sphere_point<R: RngCore>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(std_normal(rng), std_normal(rng)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = CoefficientStream::new(7, 3);
        let mut b = CoefficientStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_gaussian(), b.next_gaussian());
        }
    }

    #[test]
    fn seek_gives_random_access() {
        let mut a = CoefficientStream::new(11, 5);
        let draws: Vec<_> = (0..20).map(|_| a.next_gaussian()).collect();
        let mut b = CoefficientStream::new(11, 5);
        b.seek(13);
        assert_eq!(b.next_gaussian(), draws[13]);
    }

    #[test]
    fn trials_and_seeds_differ() {
        let x = CoefficientStream::new(1, 0).next_gaussian();
        assert_ne!(x, CoefficientStream::new(1, 1).next_gaussian());
        assert_ne!(x, CoefficientStream::new(2, 0).next_gaussian());
    }

    #[test]
    fn moments_of_complex_gaussian() {
        let mut s = CoefficientStream::new(42, 0);
        let n = 200_000;
        let (mut m2, mut re2, mut re_im, mut mean) = (0.0, 0.0, 0.0, Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let a = s.next_gaussian();
            m2 += a.norm_sqr();
            re2 += a.re * a.re;
            re_im += a.re * a.im;
            mean += a;
        }
        let nf = n as f64;
        assert!((m2 / nf - 1.0).abs() < 0.01);
        assert!((re2 / nf - 0.5).abs() < 0.01);
        assert!((re_im / nf).abs() < 0.01);
        assert!(mean.norm() / nf < 0.01);
    }
}
