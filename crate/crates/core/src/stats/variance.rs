//! Variance of linear statistics.
//!
//! `Var I_L(ψ) = ∬ Li₂((1-ϱ(z,w)²)^L) Dψ(z) Dψ(w) dμ(z) dμ(w)`, since the covariance of
//! `log|ξ|²` and `log|η|²` for standard complex Gaussians with `|corr|² = x` is `Li₂(x)`.
//! Substituting `w = φ_z(ξ)` makes the kernel depend on `|ξ|` alone. For radial `ψ` the
//! outer integral also collapses to one radius, leaving a deterministic rule in
//! `(t, |ξ|², |ξ₁|, arg ξ₁)` for every `n`.

use super::linear::{dpsi_sq_integral, expected_linear_statistic, potential_weight};
use super::testfn::{d_operator, radial_d, TestFunction};
use crate::error::{GafError, Result};
use crate::geometry::{mu_density, Automorphism, Point};
use crate::rng::{aux_rng, sphere_point, uniform};
use crate::special::{dilog, gauss_legendre_on, ln_gamma, zeta, CompensatedSum};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Resolution of the radial variance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceRule {
    /// Gauss–Legendre panels per smooth piece of `ψ` in `t`.
    pub t_panels: usize,
    /// Geometric panels in `y = -log(1-|ξ|²)`.
    pub y_panels: usize,
    /// Gauss–Legendre order used on every panel.
    pub order: usize,
    /// Trapezoid points in `arg ξ₁`.
    pub phases: usize,
    /// Gauss–Legendre nodes in `|ξ₁|` (unused for `n = 1`).
    pub moduli: usize,
}

impl Default for VarianceRule {
    fn default() -> Self {
        VarianceRule {
            t_panels: 4,
            y_panels: 24,
            order: 12,
            phases: 256,
            moduli: 24,
        }
    }
}

impl VarianceRule {
    fn refined(&self) -> Self {
        VarianceRule {
            t_panels: 2 * self.t_panels,
            y_panels: 2 * self.y_panels,
            order: self.order,
            phases: 2 * self.phases,
            moduli: 2 * self.moduli,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Difference to the same rule at doubled resolution (deterministic path) or the
    /// standard error (Monte Carlo path).
    pub error: f64,
}

fn radial_dpsi(psi: &dyn TestFunction, x: f64) -> f64 {
    if x >= psi.support_radius().powi(2) {
        return 0.0;
    }
    radial_d(psi.n(), x, psi.radial_profile(x).unwrap())
}

fn panel_nodes(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut w) = (Vec::new(), Vec::new());
    for b in breaks.windows(2) {
        let (xs, ws) = gauss_legendre_on(order, b[0], b[1]);
        x.extend(xs);
        w.extend(ws);
    }
    (x, w)
}

/// `∫ Dψ(w) Li₂((1-ϱ(z,w)²)^L) dμ(w)` at `|z|² = t`.
fn inner(
    psi: &dyn TestFunction,
    l: f64,
    t: f64,
    rule: &VarianceRule,
    mods: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let n = psi.n();
    let s = psi.support_radius();
    let rz = t.sqrt();
    let xi_max = ((rz + s) / (1.0 + rz * s)).min(1.0 - 1e-16);
    let y_top = (-(-xi_max * xi_max).ln_1p()).min(45.0 / l);
    // geometric grading towards y = 0, where Li₂(e^{-Ly}) has a logarithmic kink
    let mut breaks = vec![0.0];
    for j in (0..rule.y_panels).rev() {
        breaks.push(y_top * 0.5f64.powi(j as i32));
    }
    let (ys, yw) = panel_nodes(&breaks, rule.order);
    let cos: Vec<f64> = (0..rule.phases)
        .map(|k| (TAU * k as f64 / rule.phases as f64).cos())
        .collect();
    let mut acc = CompensatedSum::new();
    for (y, wy) in ys.iter().zip(&yw) {
        let tau = -(-y).exp_m1();
        let radial =
            n as f64 * tau.powi(n as i32 - 1) * (n as f64 * y).exp() * dilog((-l * y).exp());
        let mut mean = 0.0;
        for (a, wa) in mods.0.iter().zip(&mods.1) {
            let c = (t * tau).sqrt() * a;
            let mut ring = 0.0;
            for cs in &cos {
                let d = 1.0 - 2.0 * c * cs + c * c;
                let x = 1.0 - (1.0 - t) * (1.0 - tau) / d;
                ring += radial_dpsi(psi, x);
            }
            mean += wa * ring / rule.phases as f64;
        }
        acc.add(wy * radial * mean);
    }
    acc.value()
}

/// `|ξ₁|` nodes with weights for the law of one coordinate of a uniform point on the
/// sphere, density `2a(n-1)(1-a²)^{n-2}` on `[0,1]`.
fn modulus_rule(n: usize, count: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![1.0], vec![1.0]);
    }
    let (a, w) = gauss_legendre_on(count, 0.0, 1.0);
    let dens: Vec<f64> = a
        .iter()
        .zip(&w)
        .map(|(&a, &w)| w * 2.0 * a * (n - 1) as f64 * (1.0 - a * a).powi(n as i32 - 2))
        .collect();
    (a, dens)
}

fn radial_variance(psi: &dyn TestFunction, l: f64, rule: &VarianceRule) -> f64 {
    let top = psi.support_radius().powi(2);
    let mut edges = vec![0.0];
    edges.extend(
        psi.radial_breaks()
            .into_iter()
            .filter(|&b| b > 0.0 && b < top),
    );
    edges.push(top);
    let mut breaks = vec![0.0];
    for e in edges.windows(2) {
        for p in 1..=rule.t_panels {
            breaks.push(e[0] + (e[1] - e[0]) * p as f64 / rule.t_panels as f64);
        }
    }
    let (ts, tw) = panel_nodes(&breaks, rule.order);
    let mods = modulus_rule(psi.n(), rule.moduli);
    ts.iter()
        .zip(&tw)
        .map(|(&t, &w)| w * potential_weight(psi, t) * inner(psi, l, t, rule, &mods))
        .collect::<CompensatedSum>()
        .value()
}

/// Deterministic variance of `I_L(ψ)` for a radial test function, with the change under
/// doubled resolution as error estimate.
pub fn variance_quadrature(
    psi: &dyn TestFunction,
    l: f64,
    rule: &VarianceRule,
) -> Result<VarianceEstimate> {
    if psi.radial_profile(0.0).is_none() {
        return Err(GafError::domain(
            "deterministic variance rule needs a radial test function; use variance_monte_carlo",
        ));
    }
    if !(l > 0.0) {
        return Err(GafError::domain("L must be positive"));
    }
    let coarse = radial_variance(psi, l, rule);
    let fine = radial_variance(psi, l, &rule.refined());
    Ok(VarianceEstimate {
        value: fine.max(0.0),
        error: (fine - coarse).abs(),
    })
}

/// Monte Carlo estimate of the double integral for any test function: `z` uniform
/// (for `ν`) on the support ball, `ξ = φ_z(w)` with `-log(1-|ξ|²)` exponential of
/// rate `L`, isotropic directions.
pub fn variance_monte_carlo(
    psi: &dyn TestFunction,
    l: f64,
    pairs: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    if pairs < 2 {
        return Err(GafError::domain("need at least two Monte Carlo pairs"));
    }
    let n = psi.n();
    let s = psi.support_radius();
    let mut rng = aux_rng(seed, 0x7a51, 0);
    let (mut sum, mut sum_sq) = (CompensatedSum::new(), CompensatedSum::new());
    let ball = s.powi(2 * n as i32);
    for _ in 0..pairs {
        let t = s * s * uniform(&mut rng).powf(1.0 / n as f64);
        let dir = sphere_point(&mut rng, n);
        let z = Point::new(dir.iter().map(|c| c * t.sqrt()).collect())?;
        let dz = d_operator(psi, &z);
        if dz == 0.0 {
            sum.add(0.0);
            continue;
        }
        let wz = ball * mu_density(n, t) * dz;
        let y = -(-uniform(&mut rng)).ln_1p() / l;
        let tau = -(-y).exp_m1();
        let wy = n as f64 * tau.powi(n as i32 - 1) * (n as f64 * y).exp() * dilog((-l * y).exp())
            / (l * (-l * y).exp());
        let xi: Vec<Complex64> = sphere_point(&mut rng, n)
            .iter()
            .map(|c| c * tau.sqrt())
            .collect();
        let w = Automorphism::new(z).apply(&Point::new(xi)?);
        let v = wz * wy * d_operator(psi, &w);
        sum.add(v);
        sum_sq.add(v * v);
    }
    let m = pairs as f64;
    let mean = sum.value() / m;
    let var = (sum_sq.value() / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(VarianceEstimate {
        value: mean,
        error: (var / m).sqrt(),
    })
}

/// `n! ζ(n+2) ∫(Dψ)² dμ`, the limit of `L^n Var I_L(ψ)`.
pub fn variance_asymptote(psi: &dyn TestFunction) -> Result<f64> {
    let n = psi.n();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    Ok(fact * zeta(n as f64 + 2.0) * dpsi_sq_integral(psi)?)
}

/// `J = Σ_m m^{-2} ∫(1-|z|²)^{mL} dμ = Σ_m m^{-2} n B(n, mL-n)`, the radial factor of the
/// variance; `L^n J → n! ζ(n+2)`. Requires `L > n`.
pub fn radial_factor(n: usize, l: f64) -> Result<f64> {
    if l <= n as f64 {
        return Err(GafError::domain("radial factor needs L > n"));
    }
    let nf = n as f64;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    const HEAD: usize = 2000;
    let mut acc = CompensatedSum::new();
    for m in 1..=HEAD {
        let m = m as f64;
        acc.add((nf.ln() + ln_gamma(nf) + ln_gamma(m * l - nf) - ln_gamma(m * l)).exp() / (m * m));
    }
    // beyond HEAD, n B(n, mL-n) = n!/(mL)^n (1 + n(n+1)/(2mL) + O((mL)^{-2}))
    let tail = |s: f64| {
        let big = HEAD as f64;
        big.powf(1.0 - s) / (s - 1.0) - 0.5 * big.powf(-s) + s * big.powf(-s - 1.0) / 12.0
    };
    acc.add(
        fact / l.powi(n as i32) * (tail(nf + 2.0) + nf * (nf + 1.0) / (2.0 * l) * tail(nf + 3.0)),
    );
    Ok(acc.value())
}

/// Log-log slope of `Var/E²` over an `L` grid (least squares), which self-averaging
/// predicts to be `-(n+2)`.
pub fn self_averaging_slope(
    psi: &dyn TestFunction,
    ls: &[f64],
    rule: &VarianceRule,
) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &l in ls {
        let v = variance_quadrature(psi, l, rule)?.value;
        let e = expected_linear_statistic(psi, l)?;
        xs.push(l.ln());
        ys.push((v / (e * e)).ln());
    }
    Ok(super::summary::least_squares(&xs, &ys)?.slope)
}
