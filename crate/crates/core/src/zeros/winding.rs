//! Argument-principle zero counts on a circle, certified arc by arc.
//!
//! For `F(θ) = Σ_m c_m e^{imθ}` sampled at `K` equispaced points with spacing `h`,
//! `|F'| ≤ Λ₁ = Σ m|c_m|` and `|F''| ≤ Λ₂ = Σ m²|c_m|`. An arc `[θ_k, θ_k + h]` is
//! certified when its image lies in a convex set missing the origin, which makes the
//! principal argument of `F_{k+1}/F_k` the exact change of argument along it. Two sets
//! are tried: the disks of radius `Λ₁h/2` around both endpoints (each covering half the
//! arc), and the tube of radius `Λ₂h²/2` around the segment `F_k + sF'(θ_k)`, `s ∈ [0,h]`.
//! The grid is refined until every arc passes or the length cap is reached.

use super::super::gaf::circle_values_of;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Result of one argument-principle count on `|u| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingCount {
    /// Number of zeros of the polynomial in `|u| < 1`.
    pub count: usize,
    /// Every arc passed one of the tests, so `count` is exact for the polynomial.
    pub arcs_certified: bool,
    /// Lower bound for `min_{|u|=1} |F|` (may be negative when not certified).
    pub margin: f64,
    /// Number of sample points used at the final level.
    pub samples: usize,
}

impl WindingCount {
    /// Certified for the untruncated function when the circle margin beats the tail
    /// envelope (Rouché).
    pub fn certified_against(&self, envelope: f64) -> bool {
        self.arcs_certified && self.margin > envelope
    }
}

/// Smallest sample count tried.
pub const MIN_SAMPLES: usize = 64;

/// Distance from the origin to the segment `[a, b]`.
fn segment_distance(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len = d.norm_sqr();
    if len == 0.0 {
        return a.norm();
    }
    let s = (-(a.conj() * d).re / len).clamp(0.0, 1.0);
    (a + d * s).norm()
}

/// Smallest per-arc lower bound for `|F|` from the tangent-segment test.
fn tangent_margin(c: &[Complex64], values: &[Complex64], lip2: f64) -> f64 {
    let len = values.len();
    let h = TAU / len as f64;
    let dc: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(m, x)| x * Complex64::new(0.0, m as f64))
        .collect();
    let slopes = circle_values_of(&dc, len);
    let rem = 0.5 * lip2 * h * h;
    values
        .iter()
        .zip(&slopes)
        .map(|(&f, &df)| segment_distance(f, f + df * h) - rem)
        .fold(f64::INFINITY, f64::min)
}

/// Count the zeros of `Σ_m c_m u^m` in the open unit disk.
pub fn winding_count(c: &[Complex64], max_samples: usize) -> WindingCount {
    let lip: f64 = c.iter().enumerate().map(|(m, x)| m as f64 * x.norm()).sum();
    let lip2: f64 = c
        .iter()
        .enumerate()
        .map(|(m, x)| (m * m) as f64 * x.norm())
        .sum();
    let max_samples = max_samples.max(MIN_SAMPLES);
    let cap = max_samples.next_power_of_two();
    let mut len = MIN_SAMPLES;
    loop {
        let values = circle_values_of(c, len);
        let min_abs = values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        let mut margin = min_abs - PI * lip / len as f64;
        if margin <= 0.0 && min_abs > 0.0 {
            margin = margin.max(tangent_margin(c, &values, lip2));
        }
        let ok = margin > 0.0;
        if ok || len >= max_samples {
            let mut turn = 0.0;
            for k in 0..len {
                let a = values[k];
                let b = values[(k + 1) % len];
                turn += (b * a.conj()).arg();
            }
            let count = (turn / TAU).round().max(0.0) as usize;
            return WindingCount {
                count,
                arcs_certified: ok,
                margin,
                samples: len,
            };
        }
        // jump straight to a length that could pass if the minimum does not shrink
        let first = PI * lip / min_abs;
        let second = TAU * (lip2 / min_abs).sqrt();
        let want = first.min(second).ceil().min(cap as f64) as usize;
        len = (len * 2).max(want.next_power_of_two()).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn counts_known_roots() {
        // (u - 0.3)(u + 0.4)(u - 2) : two roots inside
        // = (u² + 0.1u - 0.12)(u - 2) = u³ - 1.9u² - 0.32u + 0.24
        let w = winding_count(&[c(0.24), c(-0.32), c(-1.9), c(1.0)], 1 << 16);
        assert!(w.arcs_certified);
        assert_eq!(w.count, 2);
        assert!(w.margin > 0.0);
    }

    #[test]
    fn root_near_circle_needs_refinement() {
        // u - 0.999 has its root just inside
        let w = winding_count(&[c(-0.999), c(1.0)], 1 << 16);
        assert!(w.arcs_certified);
        assert_eq!(w.count, 1);
        assert!(w.samples > MIN_SAMPLES);
    }

    #[test]
    fn root_on_circle_is_not_certified() {
        let w = winding_count(&[c(-1.0), c(1.0)], 1 << 12);
        assert!(!w.arcs_certified);
        assert!(w.margin <= 0.0);
    }

    #[test]
    fn tangent_test_reaches_closer_roots() {
        // (u - 0.9999)·(u² + 2u + 3): the root 1e-4 inside the circle needs the second test
        let a = c(-0.9999);
        let coeffs = [a * 3.0, a * 2.0 + c(3.0), a + c(2.0), c(1.0)];
        let w = winding_count(&coeffs, 1 << 12);
        assert!(w.arcs_certified);
        assert_eq!(w.count, 1);
        assert!(w.margin > 0.0 && w.margin < 1e-3);
    }

    #[test]
    fn high_degree_monomial() {
        let mut coeffs = vec![c(0.0); 300];
        coeffs[299] = c(1.0);
        coeffs[0] = c(0.5);
        // u^299 + 0.5: all 299 roots have modulus 0.5^{1/299} < 1
        let w = winding_count(&coeffs, 1 << 16);
        assert!(w.arcs_certified);
        assert_eq!(w.count, 299);
    }
}
