//! Coefficient events that force a hole in `B(0, r)`.
//!
//! With `N(n,m)` the number of multi-indices of degree `m` and `M₀ = ⌊CL⌋`:
//!
//! * `E₁`: `|a_0|² ≥ 1`;
//! * `E₃`: `|a_α|² < (1-r²)^L / (16 C L N(n,|α|))` for `0 < |α| ≤ M₀`;
//! * `E₂`: `|a_α|² ≤ |α|^{2n} / N(n,|α|)` for `|α| > M₀`.
//!
//! On `E₃` the middle degrees contribute at most
//! `(I) = sqrt(M₀ (1-r²)^L / (16CL)) · sqrt(Σ_{0<m≤M₀} c_m r^{2m}) ≤ 1/4` to `|f_L|` on
//! `|z| ≤ r`, and on `E₂` the high degrees at most `(II) = Σ_{m>M₀} m^n sqrt(c_m r^{2m})`.
//! When `(II) < 1/4` every sample in `E₁ ∩ E₂ ∩ E₃` has `|f_L| ≥ 1/2` there.

use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::gaf::{choose_truncation, GafModel, GafSample, TailPolicy};
use crate::rng::{polar_from, CoefficientStream};
use crate::special::{ln_binomial, ln_gamma, log1mexp};
use crate::zeros::winding_disk;
use serde::Serialize;
use std::sync::Arc;

/// Tail tolerance used for the sampled degree of conditioned samples.
pub const CERTIFICATE_EPS_TAIL: f64 = 1e-10;

fn ln_layer_count(n: usize, m: usize) -> f64 {
    ln_binomial((m + n - 1) as f64, (n - 1) as f64)
}

/// `ln(c_m r^{2m})` with `c_m = Γ(L+m)/(m! Γ(L))`.
fn ln_layer_variance(l: f64, r: f64, m: usize) -> f64 {
    let mf = m as f64;
    ln_gamma(l + mf) - ln_gamma(l) - ln_gamma(mf + 1.0) + 2.0 * mf * r.ln()
}

/// The two deterministic bounds behind the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateBounds {
    /// Bound on the middle degrees under `E₃`.
    pub middle: f64,
    /// Bound on the high degrees under `E₂` (all degrees, including unsampled ones).
    pub tail: f64,
}

impl CertificateBounds {
    pub fn holds(&self) -> bool {
        self.middle <= 0.25 && self.tail < 0.25
    }
}

pub fn certificate_bounds(n: usize, l: f64, r: f64, c: f64) -> CertificateBounds {
    let m0 = (c * l).floor() as usize;
    let middle = if m0 == 0 {
        0.0
    } else {
        let var: f64 = (1..=m0).map(|m| ln_layer_variance(l, r, m).exp()).sum();
        let caps = m0 as f64 * (l * (1.0 - r * r).ln()).exp() / (16.0 * c * l);
        (caps * var).sqrt()
    };
    let x = r * r;
    let peak = ((l * x - 1.0) / (1.0 - x)).max(0.0);
    let mut tail = 0.0;
    let mut m = m0 + 1;
    loop {
        let term = (n as f64 * (m as f64).ln() + 0.5 * ln_layer_variance(l, r, m)).exp();
        tail += term;
        // past the peak, the ratio of successive terms is below
        // q = (1+1/m)^n sqrt((L+m)/(m+1)) r, which decreases in m when L ≥ 1
        let q =
            (1.0 + 1.0 / m as f64).powi(n as i32) * ((l + m as f64) / (m as f64 + 1.0)).sqrt() * r;
        if m as f64 > peak && q < 1.0 && l >= 1.0 && term * q / (1.0 - q) < 1e-17 * tail {
            tail += term * q / (1.0 - q);
            break;
        }
        if m > m0 + 10_000_000 {
            tail = f64::INFINITY;
            break;
        }
        m += 1;
    }
    CertificateBounds { middle, tail }
}

/// The constants tried when choosing `C`, with their bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantScan {
    pub chosen: f64,
    pub steps: Vec<(f64, CertificateBounds)>,
}

/// First `C` on the grid `step, 2·step, …` for which both bounds hold.
pub fn scan_constant(n: usize, l: f64, r: f64, step: f64, max_c: f64) -> Result<ConstantScan> {
    if !(step > 0.0) {
        return Err(GafError::domain("scan step must be positive"));
    }
    let mut steps = Vec::new();
    let mut k = 1;
    loop {
        let c = step * k as f64;
        if c > max_c {
            return Err(GafError::Config(format!(
                "no certificate constant up to {max_c} for n={n}, L={l}, r={r}"
            )));
        }
        let b = certificate_bounds(n, l, r, c);
        steps.push((c, b));
        if b.holds() {
            return Ok(ConstantScan { chosen: c, steps });
        }
        k += 1;
    }
}

/// Parameters of the certificate, with the model used to draw conditioned samples.
#[derive(Debug, Clone)]
pub struct HoleCertificateSpec {
    pub n: usize,
    pub l: f64,
    pub r: f64,
    pub c: f64,
    /// `⌊CL⌋`, the last degree capped by `E₃`.
    pub middle_degree: usize,
    pub bounds: CertificateBounds,
    pub model: Arc<GafModel>,
}

impl HoleCertificateSpec {
    pub fn new(n: usize, l: f64, r: f64, c: f64, caps: &Caps) -> Result<Self> {
        if n == 0 || !(l > 0.0) || !(r > 0.0 && r < 1.0) || !(c > 0.0) {
            return Err(GafError::domain(
                "certificate needs n ≥ 1, L > 0, 0 < r < 1, C > 0",
            ));
        }
        let bounds = certificate_bounds(n, l, r, c);
        if !bounds.holds() {
            return Err(GafError::domain(format!(
                "C = {c} too small: middle bound {:.4}, tail bound {:.4}",
                bounds.middle, bounds.tail
            )));
        }
        let middle_degree = (c * l).floor() as usize;
        let degree = choose_truncation(n, l, r, CERTIFICATE_EPS_TAIL, caps)?.max(middle_degree);
        let model =
            GafModel::with_degree(n, l, degree, TailPolicy::new(r, CERTIFICATE_EPS_TAIL), caps)?;
        Ok(HoleCertificateSpec {
            n,
            l,
            r,
            c,
            middle_degree,
            bounds,
            model,
        })
    }

    /// Certificate with `C` from [`scan_constant`] (steps of 0.05).
    pub fn scanned(n: usize, l: f64, r: f64, caps: &Caps) -> Result<(Self, ConstantScan)> {
        let scan = scan_constant(n, l, r, 0.05, 1000.0)?;
        Ok((Self::new(n, l, r, scan.chosen, caps)?, scan))
    }

    /// `ln` of the cap on `|a_α|²` for `|α| = m > 0` (upper caps from `E₂` and `E₃`).
    pub fn log_cap(&self, m: usize) -> f64 {
        assert!(m > 0);
        if m <= self.middle_degree {
            self.l * (1.0 - self.r * self.r).ln()
                - (16.0 * self.c * self.l).ln()
                - ln_layer_count(self.n, m)
        } else {
            2.0 * self.n as f64 * (m as f64).ln() - ln_layer_count(self.n, m)
        }
    }
}

/// A sample drawn from the coefficient law conditioned on `E₁ ∩ E₂ ∩ E₃`, truncated at
/// the certificate model's degree. Coordinates are independent, so each `|a_α|²` is
/// drawn by inverting its truncated exponential law.
pub fn certificate_sample(spec: &HoleCertificateSpec, seed: u64, trial: u64) -> GafSample {
    let model = &spec.model;
    let mut stream = CoefficientStream::new(seed, trial);
    let mut coeffs = Vec::with_capacity(model.coefficient_count());
    for (m, layer) in model.layers.iter().enumerate() {
        let log_cap = if m == 0 { 0.0 } else { spec.log_cap(m) };
        let mass = if m == 0 {
            0.0
        } else {
            -(-log_cap.exp()).exp_m1()
        };
        for _ in 0..layer.count() {
            let (u, v) = stream.next_uniforms();
            let modulus_sq = if m == 0 {
                1.0 - (-u).ln_1p()
            } else {
                -(-u * mass).ln_1p()
            };
            coeffs.push(polar_from(modulus_sq, v));
        }
    }
    GafSample {
        model: Arc::clone(model),
        coeffs,
        seed,
        trial,
    }
}

/// Lower bound for `min |f_M|` over `|z| ≤ r` for an `n = 1` sample, or `None` when the
/// truncation may vanish there. With no zeros inside, the minimum sits on the circle,
/// where the winding margin bounds `|f̂|` from below.
pub fn min_modulus_on_disk(sample: &GafSample, r: f64) -> Result<Option<f64>> {
    let (w, _) = winding_disk(sample, r)?;
    if !w.arcs_certified || w.count != 0 {
        return Ok(None);
    }
    Ok(Some(
        w.margin * (-0.5 * sample.model.l * (-r * r).ln_1p()).exp(),
    ))
}

/// `ln P[E₁]`, `ln P[E₂]`, `ln P[E₃]` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateLogProbability {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// Bound on the part of the `E₂` product that was not summed.
    pub e2_remainder: f64,
    pub total: f64,
}

pub fn certificate_log_probability(spec: &HoleCertificateSpec) -> CertificateLogProbability {
    let count = |m: usize| ln_layer_count(spec.n, m).exp();
    let e1 = -1.0;
    let e3: f64 = (1..=spec.middle_degree)
        .map(|m| count(m) * log1mexp(spec.log_cap(m).exp()))
        .sum();
    // E₂ terms are N·ln(1-e^{-cap}) ≈ -N e^{-cap} with cap growing like m^{n+1}
    let mut e2 = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = spec.middle_degree + 1;
    let remainder = loop {
        let term = count(m) * log1mexp(spec.log_cap(m).exp());
        e2 += term;
        let ratio = term / prev;
        if term == 0.0 {
            break 0.0;
        }
        if ratio.abs() < 0.5 && term.abs() < 1e-17 * e2.abs().max(1e-300) {
            // terms at least halve from here on
            break term.abs();
        }
        prev = term;
        m += 1;
    };
    CertificateLogProbability {
        e1,
        e2,
        e3,
        e2_remainder: remainder,
        total: e1 + e2 + e3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{hole_indicator, HoleVerdict};

    #[test]
    fn e1_and_single_term() {
        let (spec, _) = HoleCertificateSpec::scanned(1, 20.0, 0.3, &Caps::default()).unwrap();
        let p = certificate_log_probability(&spec);
        assert_eq!(p.e1, -1.0);
        // n = 1: every layer has one index, so each E₃ factor is one term
        let cap = (20.0 * (1.0f64 - 0.09).ln()).exp() / (16.0 * spec.c * 20.0);
        let direct = (1.0 - (-cap).exp()).ln();
        assert!((spec.log_cap(1).exp() - cap).abs() <= 1e-15 * cap);
        assert!((log1mexp(spec.log_cap(1).exp()) - direct).abs() < 1e-14 * direct.abs());
    }

    #[test]
    fn scan_reaches_a_valid_constant() {
        let scan = scan_constant(1, 30.0, 0.3, 0.05, 100.0).unwrap();
        assert!(scan.steps.last().unwrap().1.holds());
        assert!(scan.steps[..scan.steps.len() - 1]
            .iter()
            .all(|(_, b)| !b.holds()));
        assert!(certificate_bounds(1, 30.0, 0.3, scan.chosen).middle <= 0.25);
    }

    #[test]
    fn conditioned_samples_obey_caps_and_have_holes() {
        let (spec, _) = HoleCertificateSpec::scanned(1, 30.0, 0.3, &Caps::default()).unwrap();
        for trial in 0..200 {
            let s = certificate_sample(&spec, 9, trial);
            assert!(s.coeffs[0].norm() >= 1.0);
            for m in 1..=spec.middle_degree {
                assert!(s.layer(m)[0].norm_sqr() < spec.log_cap(m).exp());
            }
            assert_eq!(
                hole_indicator(&s, 0.3, 1).unwrap().verdict,
                HoleVerdict::Hole
            );
            assert!(min_modulus_on_disk(&s, 0.3).unwrap().unwrap() >= 0.5);
        }
    }

    #[test]
    fn two_dimensional_certificate() {
        let (spec, _) = HoleCertificateSpec::scanned(2, 8.0, 0.3, &Caps::default()).unwrap();
        let p = certificate_log_probability(&spec);
        assert!(p.total < -1.0 && p.e3 < 0.0 && p.e2 <= 0.0);
        let s = certificate_sample(&spec, 1, 0);
        assert_ne!(
            hole_indicator(&s, 0.3, 6).unwrap().verdict,
            HoleVerdict::NoHole
        );
    }
}
