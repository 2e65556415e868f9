//! Polar product quadrature on `B(0,s)` with respect to `ν`.
//!
//! With `t = |z|²` the measure splits as `n t^{n-1} dt` times the uniform measure on the
//! sphere. The sphere is parametrised by `u = (|z_1|², …, |z_n|²)/t` on the simplex
//! (collapsed coordinates) and the phases `θ_j`. Gauss–Legendre is used for `t` and
//! for each collapsed simplex coordinate, the trapezoid rule for each phase. The rule
//! integrates `t^a u^β e^{i⟨k,θ⟩}` exactly for `a + n ≤ 2·radial`, `|β| + n ≤ 2·simplex`
//! and `|k_j| < angular`.

use super::point::Point;
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::special::gauss_legendre_on;
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRule {
    pub radial: usize,
    pub simplex: usize,
    pub angular: usize,
}

impl GridRule {
    pub fn new(radial: usize, simplex: usize, angular: usize) -> Self {
        GridRule {
            radial,
            simplex,
            angular,
        }
    }

    pub fn node_count(&self, n: usize) -> u64 {
        let simplex = (self.simplex as u64).saturating_pow(n as u32 - 1);
        let angular = (self.angular as u64).saturating_pow(n as u32);
        (self.radial as u64)
            .saturating_mul(simplex)
            .saturating_mul(angular)
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub support_radius: f64,
}

impl QuadratureGrid {
    pub fn integrate<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .collect::<crate::special::CompensatedSum>()
            .value()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes and weights for the uniform probability measure on the simplex
/// `{u ≥ 0, Σu = 1}` in `ℝⁿ`.
pub fn simplex_rule(n: usize, order: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 1 {
        return (vec![vec![1.0]], vec![1.0]);
    }
    let (x, w) = gauss_legendre_on(order, 0.0, 1.0);
    let dims = n - 1;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dims];
    let norm: f64 = (1..n).map(|k| k as f64).product();
    loop {
        let mut u = Vec::with_capacity(n);
        let mut rest = 1.0;
        let mut wt = norm;
        for (i, &j) in idx.iter().enumerate() {
            let xi = x[j];
            u.push(rest * xi);
            wt *= w[j] * (1.0 - xi).powi((dims - 1 - i) as i32);
            rest *= 1.0 - xi;
        }
        u.push(rest);
        nodes.push(u);
        weights.push(wt);
        let mut carry = 0;
        while carry < dims {
            idx[carry] += 1;
            if idx[carry] < order {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == dims {
            break;
        }
    }
    (nodes, weights)
}

/// Polar product rule on `B(0, support_radius) ⊂ ℂⁿ`, weights relative to `ν`.
pub fn build_grid(
    n: usize,
    support_radius: f64,
    rule: GridRule,
    caps: &Caps,
) -> Result<QuadratureGrid> {
    if !(support_radius > 0.0 && support_radius < 1.0) {
        return Err(GafError::domain(format!(
            "support radius {support_radius} outside (0,1)"
        )));
    }
    if n == 0 || rule.radial == 0 || rule.simplex == 0 || rule.angular == 0 {
        return Err(GafError::domain("grid dimensions must be positive"));
    }
    Caps::check("grid nodes", rule.node_count(n), caps.max_grid_nodes)?;
    let s2 = support_radius * support_radius;
    let (ts, tw) = gauss_legendre_on(rule.radial, 0.0, s2);
    let (us, uw) = simplex_rule(n, rule.simplex);
    let angles: Vec<Complex64> = (0..rule.angular)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / rule.angular as f64))
        .collect();
    let ang_weight = (rule.angular as f64).powi(-(n as i32));
    let total = rule.node_count(n) as usize;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut phase_idx = vec![0usize; n];
    for (t, wt) in ts.iter().zip(&tw) {
        let radial_w = wt * n as f64 * t.powi(n as i32 - 1);
        for (u, wu) in us.iter().zip(&uw) {
            let moduli: Vec<f64> = u.iter().map(|uj| (t * uj).sqrt()).collect();
            phase_idx.iter_mut().for_each(|p| *p = 0);
            loop {
                let coords = moduli
                    .iter()
                    .zip(&phase_idx)
                    .map(|(r, &k)| angles[k] * *r)
                    .collect();
                nodes.push(Point::from_mapped(coords));
                weights.push(radial_w * wu * ang_weight);
                let mut carry = 0;
                while carry < n {
                    phase_idx[carry] += 1;
                    if phase_idx[carry] < rule.angular {
                        break;
                    }
                    phase_idx[carry] = 0;
                    carry += 1;
                }
                if carry == n {
                    break;
                }
            }
        }
    }
    Ok(QuadratureGrid {
        nodes,
        weights,
        support_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::automorphism::{pseudo_distance_sq, Automorphism};
    use crate::geometry::measures::{epsilon_mean, invariant_volume_ball, mu_density};
    use approx::assert_relative_eq;

    #[test]
    fn volume_of_ball() {
        for n in 1..=3 {
            let g = build_grid(n, 0.7, GridRule::new(6, 4, 4), &Caps::default()).unwrap();
            assert_relative_eq!(
                g.integrate(|_| 1.0),
                0.49f64.powi(n as i32),
                max_relative = 1e-13
            );
            assert!(g.nodes.iter().all(|p| p.norm() <= 0.7 + 1e-15));
        }
    }

    #[test]
    fn monomial_exactness() {
        // ∫_{B(0,s)} |z^α|² dν = n! α! s^{2(|α|+n)} / (|α|+n)!
        let s: f64 = 0.8;
        let g = build_grid(2, s, GridRule::new(8, 6, 6), &Caps::default()).unwrap();
        let exact = |a: i32, b: i32| {
            let fact = |k: i32| (1..=k).map(|x| x as f64).product::<f64>();
            2.0 * fact(a) * fact(b) * s.powi(2 * (a + b + 2)) / fact(a + b + 2)
        };
        for a in 0..4 {
            for b in 0..4 {
                let q = g.integrate(|p| {
                    p.coords()[0].norm_sqr().powi(a) * p.coords()[1].norm_sqr().powi(b)
                });
                assert_relative_eq!(q, exact(a, b), max_relative = 1e-12);
            }
        }
        // non-trivial phases integrate to zero
        let q = g.integrate(|p| (p.coords()[0] * p.coords()[1].conj()).re);
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn mu_volume_and_log_mean() {
        let g = build_grid(2, 0.5, GridRule::new(24, 2, 1), &Caps::default()).unwrap();
        assert_relative_eq!(
            g.integrate(|p| mu_density(2, p.norm_sq())),
            1.0 / 9.0,
            max_relative = 1e-13
        );
        for n in 1..=3 {
            let s = 0.6;
            let g = build_grid(n, s, GridRule::new(40, 2, 1), &Caps::default()).unwrap();
            let q = g.integrate(|p| (1.0 - p.norm_sq()).ln() * mu_density(n, p.norm_sq()));
            let expected = -invariant_volume_ball(s, n).unwrap() * epsilon_mean(n, s).unwrap();
            assert_relative_eq!(q, expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn invariance_of_mu_under_automorphisms() {
        // g(z) = bump(ϱ(z,w)²) lives on E(w,s); pulled back by φ_w it is radial.
        let w = Point::new(vec![Complex64::new(0.25, 0.1)]).unwrap();
        let s2 = 0.25;
        let bump = |r2: f64| {
            if r2 < s2 {
                (1.0 - r2 / s2).powi(6)
            } else {
                0.0
            }
        };
        let phi = Automorphism::new(w.clone());
        let centred = build_grid(1, 0.5, GridRule::new(40, 1, 8), &Caps::default()).unwrap();
        let rhs = centred.integrate(|z| {
            bump(pseudo_distance_sq(&phi.apply(z), &w)) * mu_density(1, z.norm_sq())
        });
        let big = build_grid(1, 0.85, GridRule::new(400, 1, 400), &Caps::default()).unwrap();
        let lhs = big.integrate(|z| bump(pseudo_distance_sq(z, &w)) * mu_density(1, z.norm_sq()));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps {
            max_grid_nodes: 10,
            ..Caps::default()
        };
        assert!(matches!(
            build_grid(2, 0.5, GridRule::new(4, 4, 4), &caps),
            Err(GafError::Resource { .. })
        ));
    }
}
