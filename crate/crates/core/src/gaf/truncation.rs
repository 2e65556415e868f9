//! Truncation degree and tail envelopes.
//!
//! With `c_m = Γ(L+m)/(m! Γ(L))`, the variance of the degree-`m` layer at `|z| = r` is
//! `c_m r^{2m}` whatever the dimension, so the tail variance beyond degree `M` is
//! `T(M) = Σ_{m>M} c_m r^{2m}`. Tails are summed directly (never as a difference of
//! totals), with a geometric bound for the part that is not summed.

use super::layer::coefficients_up_to;
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::special::{ln_binomial, ln_gamma};
use std::f64::consts::PI;

/// Truncation settings attached to every sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TailPolicy {
    /// Largest radius on which the truncation is trusted.
    pub r_max: f64,
    /// Target standard deviation of the omitted tail at `|z| = r_max`.
    pub eps_tail: f64,
    /// Probability allowance for the high-probability tail envelope.
    pub p_exceed: f64,
}

impl TailPolicy {
    pub fn new(r_max: f64, eps_tail: f64) -> Self {
        TailPolicy {
            r_max,
            eps_tail,
            p_exceed: 1e-12,
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Bound on the largest ratio `c_{m+1} x^{m+1} / (c_m x^m)` over `m ≥ k`.
fn ratio_bound(l: f64, x: f64, k: usize) -> f64 {
    let q = (l + k as f64) * x / (k as f64 + 1.0);
    if l >= 1.0 {
        q
    } else {
        x
    }
}

/// `ln T(M)` for `M = 0..len`, where `len` is the first degree at which the remainder
/// beyond it is negligible against `floor` or `limit` is reached.
fn log_tails(l: f64, x: f64, floor: f64, limit: usize) -> Vec<f64> {
    let lx = x.ln();
    let peak = ((l * x - 1.0) / (1.0 - x)).max(0.0);
    let mut lt = vec![0.0];
    let mut m = 0usize;
    loop {
        let next = lt[m] + ((l + m as f64) / (m as f64 + 1.0)).ln() + lx;
        lt.push(next);
        m += 1;
        let q = ratio_bound(l, x, m);
        if (m as f64 > peak && q < 1.0 && next - (1.0 - q).ln() < floor - 40.0) || m > limit {
            break;
        }
    }
    let k = lt.len() - 1;
    let q = ratio_bound(l, x, k).min(1.0 - 1e-12);
    let mut tails = vec![0.0; k + 1];
    // remainder beyond k: lt_{k+1} / (1-q) ≤ lt_k q / (1-q)
    tails[k] = lt[k] + q.ln() - (1.0 - q).ln();
    for j in (0..k).rev() {
        tails[j] = log_add(lt[j + 1], tails[j + 1]);
    }
    tails
}

/// `ln Σ_{m>M} c_m x^m` (tail variance of `f_L` beyond degree `M` at `|z|² = x`).
pub fn log_tail_variance(l: f64, x: f64, degree: usize) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let lx = x.ln();
    let peak = ((l * x - 1.0) / (1.0 - x)).max(0.0);
    let mut m = degree + 1;
    let mut lt = ln_gamma(l + m as f64) - ln_gamma(l) - ln_gamma(m as f64 + 1.0) + m as f64 * lx;
    let mut acc = lt;
    loop {
        let q = ratio_bound(l, x, m);
        if m as f64 > peak && q < 1.0 {
            let rest = lt + q.ln() - (1.0 - q).ln();
            if rest < acc - 40.0 {
                return log_add(acc, rest);
            }
        }
        lt += ((l + m as f64) / (m as f64 + 1.0)).ln() + lx;
        m += 1;
        acc = log_add(acc, lt);
    }
}

/// Smallest `M` with `Σ_{m>M} c_m r_max^{2m} ≤ ε_tail²`.
pub fn choose_truncation(
    n: usize,
    l: f64,
    r_max: f64,
    eps_tail: f64,
    caps: &Caps,
) -> Result<usize> {
    if !(0.0..1.0).contains(&r_max) {
        return Err(GafError::domain(format!("r_max {r_max} outside [0,1)")));
    }
    if !(eps_tail > 0.0) || !(l > 0.0) {
        return Err(GafError::domain(
            "tail tolerance and intensity must be positive",
        ));
    }
    if r_max == 0.0 {
        return Ok(0);
    }
    let x = r_max * r_max;
    let target = 2.0 * eps_tail.ln();
    let tails = log_tails(l, x, target, caps.max_degree + 1);
    let m = match tails.iter().position(|&t| t <= target) {
        Some(m) if m <= caps.max_degree => m,
        _ => {
            return Err(GafError::Resource {
                what: "truncation degree",
                requested: tails.len() as u64,
                cap: caps.max_degree as u64,
            })
        }
    };
    Caps::check(
        "coefficients",
        coefficients_up_to(n, m),
        caps.max_coefficients,
    )?;
    Ok(m)
}

/// `τ` such that all omitted coefficients satisfy `|a_α|² ≤ τ + 2 ln m + ln N(n,m)`
/// except on an event of probability at most `p_exceed`.
pub fn envelope_level(p_exceed: f64) -> f64 {
    (PI * PI / (6.0 * p_exceed)).ln()
}

/// High-probability bound on `sup_{|z|=r} |f̂_L - f̂_{L,M}|`: with probability at least
/// `1 - p_exceed`,
/// `|tail| ≤ Σ_{m>M} sqrt(N(n,m)(τ + 2 ln m + ln N(n,m))) · sqrt(c_m) r^m (1-r²)^{L/2}`.
pub fn tail_envelope(n: usize, l: f64, r: f64, degree: usize, p_exceed: f64) -> f64 {
    tail_envelope_scaled(n, l, r, degree, p_exceed, 0.5 * l * (1.0 - r * r).ln())
}

/// The same envelope for the unnormalised `f_L` (no `(1-r²)^{L/2}` factor).
pub fn tail_envelope_unnormalized(n: usize, l: f64, r: f64, degree: usize, p_exceed: f64) -> f64 {
    tail_envelope_scaled(n, l, r, degree, p_exceed, 0.0)
}

fn tail_envelope_scaled(
    n: usize,
    l: f64,
    r: f64,
    degree: usize,
    p_exceed: f64,
    log_scale: f64,
) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let tau = envelope_level(p_exceed);
    let lr = r.ln();
    let x = r * r;
    let peak = ((l * x - 1.0) / (1.0 - x)).max(0.0);
    let mut log_c = ln_gamma(l + degree as f64 + 1.0) - ln_gamma(l) - ln_gamma(degree as f64 + 2.0);
    let mut sum = 0.0;
    let mut m = degree + 1;
    loop {
        let ln_n = ln_binomial((m + n - 1) as f64, (n - 1) as f64);
        let level = tau + 2.0 * (m as f64).ln() + ln_n;
        let term = (0.5 * (ln_n + level.ln()) + 0.5 * log_c + m as f64 * lr + log_scale).exp();
        sum += term;
        // successive terms shrink at least by sqrt(q) * (slowly varying factor) past the peak
        let q = ratio_bound(l, x, m) * (m + n) as f64 / (m as f64 + 1.0);
        if m as f64 > peak && q < 1.0 && term < 1e-18 * sum.max(1e-300) {
            let sq = q.sqrt() * 1.01;
            if sq < 1.0 {
                sum += term * sq / (1.0 - sq);
                break;
            }
        }
        if m > degree + 1_000_000 {
            return f64::INFINITY;
        }
        log_c += ((l + m as f64) / (m as f64 + 1.0)).ln();
        m += 1;
    }
    sum
}
