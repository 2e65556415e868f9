//! Coefficient weights `w_α = sqrt(Γ(L+|α|) / (α! Γ(L)))`, kept in log scale.
//!
//! `ln Γ(L+m) - ln Γ(L)` and `ln k!` are stored as compensated running sums of
//! `ln(L+k)` and `ln k`, so differences between neighbouring weights are exact to
//! rounding even when the logs themselves are in the tens of thousands.

use crate::error::{GafError, Result};
use crate::special::{ln_gamma, CompensatedSum};

#[derive(Debug, Clone)]
pub struct WeightTable {
    l: f64,
    ln_poch: Vec<CompensatedSum>,
    ln_fact: Vec<CompensatedSum>,
}

fn two_diff(a: (f64, f64), b: (f64, f64)) -> f64 {
    let s = a.0 - b.0;
    let bb = s - a.0;
    let err = (a.0 - (s - bb)) + (-b.0 - bb);
    s + (err + (a.1 - b.1))
}

impl WeightTable {
    pub fn new(l: f64, max_degree: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(GafError::domain(format!(
                "intensity must be positive, got {l}"
            )));
        }
        let mut ln_poch = Vec::with_capacity(max_degree + 1);
        let mut ln_fact = Vec::with_capacity(max_degree + 1);
        let mut p = CompensatedSum::new();
        let mut f = CompensatedSum::new();
        for k in 0..=max_degree {
            ln_poch.push(p);
            p.add((l + k as f64).ln());
            if k > 0 {
                f.add((k as f64).ln());
            }
            ln_fact.push(f);
        }
        Ok(WeightTable {
            l,
            ln_poch,
            ln_fact,
        })
    }

    pub fn intensity(&self) -> f64 {
        self.l
    }

    pub fn max_degree(&self) -> usize {
        self.ln_poch.len() - 1
    }

    fn sum_fact(&self, alpha: &[u32]) -> CompensatedSum {
        let mut s = CompensatedSum::new();
        for &a in alpha {
            let (h, l) = self.ln_fact[a as usize].parts();
            s.add(h);
            s.add(l);
        }
        s
    }

    /// `ln w_α²` as an unevaluated pair `(hi, lo)`.
    pub fn log_weight_sq_parts(&self, alpha: &[u32]) -> (f64, f64) {
        let m: usize = alpha.iter().map(|&a| a as usize).sum();
        let mut s = self.ln_poch[m];
        let (h, l) = self.sum_fact(alpha).parts();
        s.add(-h);
        s.add(-l);
        s.parts()
    }

    /// `ln w_α`.
    pub fn log_weight(&self, alpha: &[u32]) -> f64 {
        let (h, l) = self.log_weight_sq_parts(alpha);
        0.5 * (h + l)
    }

    /// `w²_{α+e_j} / w²_α`, which equals `(L+|α|)/(α_j+1)`.
    pub fn weight_sq_ratio(&self, alpha: &[u32], j: usize) -> f64 {
        let mut next = alpha.to_vec();
        next[j] += 1;
        two_diff(
            self.log_weight_sq_parts(&next),
            self.log_weight_sq_parts(alpha),
        )
        .exp()
    }

    /// `ℓ_m = ½ ln(Γ(L+m) / (m! Γ(L)))`, the log-weight of the monomial `z_1^m`.
    pub fn layer_log_weight(&self, m: usize) -> f64 {
        0.5 * two_diff(self.ln_poch[m].parts(), self.ln_fact[m].parts())
    }

    /// `½ ln(m! / α!)` with `m = |α|`.
    pub fn half_log_multinomial(&self, alpha: &[u32]) -> f64 {
        let m: usize = alpha.iter().map(|&a| a as usize).sum();
        0.5 * two_diff(self.ln_fact[m].parts(), self.sum_fact(alpha).parts())
    }
}

/// `c_{n,L} = Γ(L) / (n! Γ(L-n))`, the constant normalising `f_L` into a density on the
/// ball when `L > n`. Only documented; the sampler uses the coefficient formula for
/// every `L > 0`.
pub fn normalising_constant(n: usize, l: f64) -> Option<f64> {
    if l <= n as f64 {
        return None;
    }
    Some((ln_gamma(l) - ln_gamma(n as f64 + 1.0) - ln_gamma(l - n as f64)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_dimensional_weights() {
        let t = WeightTable::new(2.5, 60).unwrap();
        for m in 0..60usize {
            let direct = ln_gamma(2.5 + m as f64) - ln_gamma(2.5) - ln_gamma(m as f64 + 1.0);
            assert_relative_eq!(
                2.0 * t.log_weight(&[m as u32]),
                direct,
                epsilon = 1e-12,
                max_relative = 1e-13
            );
            assert_relative_eq!(
                t.layer_log_weight(m),
                0.5 * direct,
                epsilon = 1e-12,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn ratio_identity_at_high_degree() {
        let t = WeightTable::new(500.0, 5001).unwrap();
        for alpha in [[5000u32, 0], [2500, 2500], [1, 4999], [0, 0], [17, 3]] {
            let m: u32 = alpha.iter().sum();
            for j in 0..2 {
                let expected = (500.0 + m as f64) / (alpha[j] as f64 + 1.0);
                assert_relative_eq!(t.weight_sq_ratio(&alpha, j), expected, max_relative = 1e-12);
            }
            assert!(t.log_weight(&alpha).is_finite());
        }
    }

    #[test]
    fn multinomial_part() {
        let t = WeightTable::new(1.0, 10).unwrap();
        // 4!/(2!1!1!) = 12
        assert_relative_eq!(
            t.half_log_multinomial(&[2, 1, 1]),
            0.5 * 12f64.ln(),
            max_relative = 1e-14
        );
        assert_eq!(t.half_log_multinomial(&[0, 0]), 0.0);
    }

    #[test]
    fn rejects_bad_intensity() {
        assert!(WeightTable::new(0.0, 3).is_err());
        assert!(WeightTable::new(f64::NAN, 3).is_err());
    }

    #[test]
    fn normalising_constant_values() {
        assert_eq!(normalising_constant(2, 1.5), None);
        // Γ(5)/(1! Γ(4)) = 4
        assert_relative_eq!(
            normalising_constant(1, 5.0).unwrap(),
            4.0,
            max_relative = 1e-12
        );
    }
}
