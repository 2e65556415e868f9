//! The sub-mean inequality for `log|f̂_L|²` on invariant balls, and the frequency with
//! which its maximum over a ball stays within `±δL`.
//!
//! For `E = E(λ,s)` the slack is
//! `(1/μ(E)) ∫_E log|f̂|² dμ + L ε(n,s) - log|f̂(λ)|²`,
//! which is nonnegative for every holomorphic `f` and vanishes when `f` has no zero in `E`.
//! The integral is taken in `ξ = φ_λ(z)`: along each complex line `w ↦ wζ` the function
//! `g(w) = f(φ_λ(wζ))` is holomorphic, so one FFT on `|w| = s` gives its Taylor
//! coefficients and circle values at any smaller radius cost one more FFT.

use super::linear::sphere_directions;
use super::summary::wilson_interval;
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::gaf::{circle_values_of, GafModel, GafSample, PointEvaluator, TailPolicy};
use crate::geometry::{
    epsilon_mean, invariant_volume_ball, mu_density, pseudo_distance_sq, Automorphism, Point,
};
use crate::rng::{aux_rng, sphere_point, uniform};
use crate::special::{integrate_panels, CompensatedSum};
use crate::zeros::polynomial_roots;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Resolution of the sub-mean quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubmeanSettings {
    /// Initial number of points used to recover line coefficients (doubled until the
    /// top half of the spectrum is negligible).
    pub coefficient_points: usize,
    /// Points on each circle for the circle mean, raised on circles that pass close to a
    /// zero.
    pub circle_points: usize,
    /// Simplex order of the direction set when `n ≥ 2`.
    pub sphere_order: usize,
    /// Absolute tolerance of the radial integration.
    pub radial_tol: f64,
    /// Divide out the zeros inside each line disk and add their circle means exactly;
    /// otherwise circles near zeros are resolved by raising the point count alone.
    pub deflate: bool,
}

impl Default for SubmeanSettings {
    fn default() -> Self {
        SubmeanSettings {
            coefficient_points: 256,
            circle_points: 512,
            sphere_order: 3,
            radial_tol: 1e-10,
            deflate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmeanSlack {
    pub slack: f64,
    /// Radial quadrature error estimate (absolute, before division by `μ(E)`).
    pub error: f64,
    pub lines: usize,
    /// Gauss–Kronrod panels used, summed over lines.
    pub panels: usize,
}

/// Taylor coefficients `g_k s^k` of `w ↦ f(φ_λ(wζ))` on `|w| ≤ s`.
fn line_coefficients(
    ev: &PointEvaluator,
    phi: &Automorphism,
    zeta: &[Complex64],
    s: f64,
    start: usize,
) -> Result<Vec<Complex64>> {
    let mut planner = FftPlanner::new();
    let mut len = start.max(16);
    loop {
        let mut buf: Vec<Complex64> = (0..len)
            .map(|j| {
                let w = Complex64::from_polar(s, TAU * j as f64 / len as f64);
                let xi: Vec<Complex64> = zeta.iter().map(|c| c * w).collect();
                let z = phi.apply(&Point::from_mapped(xi));
                ev.eval(z.coords())
            })
            .collect();
        planner.plan_fft_forward(len).process(&mut buf);
        let scale = 1.0 / len as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        let top = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let upper = buf[len / 2..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if upper <= 1e-15 * top || len >= 1 << 16 {
            if upper > 1e-10 * top {
                return Err(GafError::Numeric(
                    "line coefficients did not converge".into(),
                ));
            }
            buf.truncate(len / 2);
            return Ok(buf);
        }
        len *= 2;
    }
}

/// One complex line through `λ`: Taylor coefficients in `u = w/s` with the zeros in
/// `|u| < 1` divided out, and those zeros.
struct Line {
    coeffs: Vec<Complex64>,
    deflated: Vec<Complex64>,
    lam_zeta: Complex64,
    weight: f64,
}

/// Mean of `log|f̂(φ_λ(wζ))|²` over `|w| = √τ`. Each deflated zero `a` contributes its
/// exact circle mean `2 log max(|u|, |a|)`.
fn circle_mean(line: &Line, s: f64, tau: f64, lam_sq: f64, l: f64, len: usize) -> f64 {
    let coeffs = &line.coeffs;
    let lam_zeta = line.lam_zeta;
    let rho = tau.sqrt();
    let ratio = rho / s;
    let jensen: f64 = line
        .deflated
        .iter()
        .map(|a| 2.0 * a.norm().max(ratio).ln())
        .sum();
    let mut scaled = Vec::with_capacity(coeffs.len());
    let mut p = 1.0;
    for c in coeffs {
        scaled.push(c * p);
        p *= ratio;
    }
    let eval = |len: usize| {
        let v = circle_values_of(&scaled, len);
        let mut acc = CompensatedSum::new();
        for (j, x) in v.iter().enumerate() {
            let w = Complex64::from_polar(rho, TAU * j as f64 / len as f64);
            // 1 - |φ_λ(wζ)|² = (1-|λ|²)(1-τ) / |1 - w⟨ζ,λ⟩|²
            let d = (Complex64::new(1.0, 0.0) - w * lam_zeta).norm_sqr();
            acc.add(x.norm_sqr().ln() + l * ((1.0 - lam_sq) * (1.0 - tau) / d).ln());
        }
        (acc.value() / len as f64, v)
    };
    // The trapezoid error from a zero at relative distance d from the circle is about
    // e^{-Kd}/K. The Newton step |g/(w g')| at the nodes estimates d once the nodes are
    // fine enough to resolve it, so K grows until it stops asking for more.
    let dw: Vec<Complex64> = scaled
        .iter()
        .enumerate()
        .map(|(k, c)| c * k as f64)
        .collect();
    let mut len = len;
    loop {
        let (m, v) = eval(len);
        let dv = circle_values_of(&dw, len);
        let d = v
            .iter()
            .zip(&dv)
            .map(|(g, dg)| g.norm() / dg.norm())
            .fold(f64::INFINITY, f64::min);
        if 24.0 / d <= len as f64 || len >= MAX_CIRCLE_POINTS {
            return m + jensen;
        }
        len = ((24.0 / d).min(MAX_CIRCLE_POINTS as f64) as usize)
            .next_power_of_two()
            .max(2 * len);
    }
}

const MAX_CIRCLE_POINTS: usize = 1 << 16;

/// Zeros of `Σ c_k u^k` in `|u| < 1` and the quotient by `Π(u - a)`. Synthetic division
/// from the top degree down multiplies rounding errors by `|a| < 1` at each step.
fn deflate(coeffs: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let keep = coeffs
        .iter()
        .rposition(|c| c.norm() > 1e-14 * top)
        .map_or(0, |k| k + 1);
    let mut q = coeffs[..keep].to_vec();
    let inside: Vec<Complex64> = match polynomial_roots(&q) {
        Ok(r) => r.into_iter().filter(|u| u.norm() < 1.0).collect(),
        Err(_) => return (q, Vec::new()),
    };
    for a in &inside {
        let d = q.len() - 1;
        let mut next = vec![Complex64::new(0.0, 0.0); d];
        next[d - 1] = q[d];
        for k in (1..d).rev() {
            next[k - 1] = q[k] + a * next[k];
        }
        q = next;
    }
    (q, inside)
}

/// Slack of the sub-mean inequality at `λ` with radius `s`.
pub fn submean_check(
    sample: &GafSample,
    lambda: &Point,
    s: f64,
    settings: &SubmeanSettings,
) -> Result<SubmeanSlack> {
    let n = sample.n();
    if lambda.dim() != n {
        return Err(GafError::domain("point and sample dimensions differ"));
    }
    let reach = (lambda.norm() + s) / (1.0 + lambda.norm() * s);
    if !(s > 0.0 && s < 1.0) || reach > sample.model.tail.r_max * (1.0 + 1e-12) {
        return Err(GafError::domain(format!(
            "E(λ,{s}) reaches radius {reach}, beyond r_max = {}",
            sample.model.tail.r_max
        )));
    }
    let l = sample.model.l;
    let ev = PointEvaluator::new(sample)?;
    let phi = Automorphism::new(lambda.clone());
    let lam_sq = lambda.norm_sq();
    let centre = ev.log_normalized(lambda.coords());
    let dirs = sphere_directions(n, settings.sphere_order);
    let mut lines = Vec::with_capacity(dirs.len());
    for (zeta, w) in &dirs {
        let coeffs = line_coefficients(&ev, &phi, zeta, s, settings.coefficient_points)?;
        // ⟨wζ, λ⟩ = w Σ ζ_j λ̄_j
        let lam_zeta: Complex64 = zeta
            .iter()
            .zip(lambda.coords())
            .map(|(a, b)| a * b.conj())
            .sum();
        let (coeffs, deflated) = if settings.deflate {
            deflate(&coeffs)
        } else {
            (coeffs, Vec::new())
        };
        lines.push(Line {
            coeffs,
            deflated,
            lam_zeta,
            weight: *w,
        });
    }
    let (mut total, mut error, mut circles) = (CompensatedSum::new(), 0.0, 0);
    for line in &lines {
        // the exact terms have kinks at |u| = |a|
        let mut breaks = vec![0.0, s * s];
        breaks.extend(line.deflated.iter().map(|a| a.norm_sqr() * s * s));
        breaks.sort_by(f64::total_cmp);
        let r = integrate_panels(
            |tau| {
                circle_mean(line, s, tau, lam_sq, l, settings.circle_points)
                    * n as f64
                    * tau.powi(n as i32 - 1)
                    * mu_density(n, tau)
            },
            &breaks,
            settings.radial_tol,
            0.0,
            4000,
        );
        total.add(line.weight * r.value);
        error += line.weight * r.error;
        circles += r.evaluations / 15;
    }
    let vol = invariant_volume_ball(s, n)?;
    Ok(SubmeanSlack {
        slack: total.value() / vol + l * epsilon_mean(n, s)? - centre,
        error,
        lines: lines.len(),
        panels: circles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlPoint {
    pub l: f64,
    pub trials: u64,
    /// Trials with `|max_E log|f̂|²| ≤ δL`.
    pub within: u64,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Grid maximum of `log|f̂|²` over `E(z₀,r)`: `radial × angular` points per line in
/// `ξ = φ_{z₀}(z)`, lines from the direction rule.
pub fn max_log_on_ball(
    sample: &GafSample,
    z0: &Point,
    r: f64,
    radial: usize,
    angular: usize,
) -> Result<f64> {
    let ev = PointEvaluator::new(sample)?;
    let phi = Automorphism::new(z0.clone());
    let mut best = f64::NEG_INFINITY;
    for (zeta, _) in sphere_directions(sample.n(), 3) {
        for i in 0..=radial {
            let rho = r * i as f64 / radial as f64;
            for j in 0..angular {
                let w = Complex64::from_polar(rho, TAU * j as f64 / angular as f64);
                let xi: Vec<Complex64> = zeta.iter().map(|c| c * w).collect();
                let z = phi.apply(&Point::from_mapped(xi));
                best = best.max(ev.log_normalized(z.coords()));
            }
        }
    }
    Ok(best)
}

/// Frequency of `|max_{E(z₀,r)} log|f̂_L|²| ≤ δL` over an `L` grid.
#[allow(clippy::too_many_arguments)]
pub fn control_max_frequency(
    n: usize,
    z0: &Point,
    r: f64,
    delta: f64,
    ls: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<ControlPoint>> {
    let reach = (z0.norm() + r) / (1.0 + z0.norm() * r);
    let mut out = Vec::new();
    for &l in ls {
        let model = GafModel::new(n, l, TailPolicy::new(reach, 1e-8), &Caps::from_env())?;
        let hits = super::campaign::run_trials(trials, workers, |t| {
            let m = max_log_on_ball(&model.sample(seed, t), z0, r, 8, 32)?;
            Ok(m.abs() <= delta * l)
        })?;
        let within = hits.iter().filter(|&&h| h).count() as u64;
        let (ci_lo, ci_hi) = wilson_interval(within, trials, super::campaign::CI_ALPHA);
        out.push(ControlPoint {
            l,
            trials,
            within,
            frequency: within as f64 / trials as f64,
            ci_lo,
            ci_hi,
        });
    }
    Ok(out)
}

/// A point `λ` drawn uniformly (for `ν`) from `B(0, radius)`, for randomised checks.
pub fn random_centre(n: usize, radius: f64, seed: u64, index: u64) -> Point {
    let mut rng = aux_rng(seed, 0x5b3e, index);
    let t = radius * radius * uniform(&mut rng).powf(1.0 / n as f64);
    Point::from_mapped(
        sphere_point(&mut rng, n)
            .iter()
            .map(|c| c * t.sqrt())
            .collect(),
    )
}

/// Whether `z` lies in `E(λ, s)`.
pub fn in_invariant_ball(z: &Point, lambda: &Point, s: f64) -> bool {
    pseudo_distance_sq(z, lambda) < s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::truncation_roots;

    fn model(n: usize, l: f64, r: f64) -> std::sync::Arc<GafModel> {
        GafModel::new(n, l, TailPolicy::new(r, 1e-10), &Caps::default()).unwrap()
    }

    #[test]
    fn constant_sample_has_zero_slack() {
        for n in [1usize, 2] {
            let m = model(n, 9.0, 0.7);
            let mut c = vec![Complex64::new(0.0, 0.0); m.coefficient_count()];
            c[0] = Complex64::new(-0.3, 1.1);
            let s = m.from_coefficients(c).unwrap();
            let lam = random_centre(n, 0.3, 1, n as u64);
            let slack = submean_check(&s, &lam, 0.35, &SubmeanSettings::default()).unwrap();
            assert!(slack.slack.abs() < 1e-8, "n={n}: {slack:?}");
        }
    }

    #[test]
    fn jensen_oracle_in_one_dimension() {
        // For n = 1 the slack equals the μ-average over E of Σ_zeros log(τ/|a|²)_+ with
        // a = φ_λ(zero), by Jensen's formula on each circle.
        let m = model(1, 12.0, 0.8);
        for trial in 0..5 {
            let s = m.sample(4, trial);
            let lam = random_centre(1, 0.3, 2, trial);
            let radius = 0.45;
            let got = submean_check(&s, &lam, radius, &SubmeanSettings::default())
                .unwrap()
                .slack;
            let phi = Automorphism::new(lam.clone());
            let inside: Vec<f64> = truncation_roots(&s)
                .unwrap()
                .into_iter()
                .map(|z| phi.apply(&Point::from_mapped(vec![z])).norm_sq())
                .filter(|&a| a < radius * radius)
                .collect();
            let oracle = integrate_panels(
                |tau| {
                    inside.iter().map(|a| (tau / a).ln().max(0.0)).sum::<f64>() * mu_density(1, tau)
                },
                &[0.0, radius * radius],
                1e-13,
                0.0,
                2000,
            )
            .value
                / invariant_volume_ball(radius, 1).unwrap();
            assert!(
                (got - oracle).abs() < 1e-8,
                "trial {trial}: {got} vs {oracle}"
            );
            if trial == 0 {
                let plain = SubmeanSettings {
                    deflate: false,
                    ..SubmeanSettings::default()
                };
                let direct = submean_check(&s, &lam, radius, &plain).unwrap().slack;
                assert!((direct - oracle).abs() < 1e-8, "{direct} vs {oracle}");
            }
        }
    }

    #[test]
    fn slack_is_nonnegative_in_two_dimensions() {
        let m = model(2, 4.0, 0.7);
        for trial in 0..10 {
            let lam = random_centre(2, 0.3, 3, trial);
            let slack =
                submean_check(&m.sample(5, trial), &lam, 0.3, &SubmeanSettings::default()).unwrap();
            assert!(slack.slack >= -1e-6, "trial {trial}: {slack:?}");
        }
    }

    #[test]
    fn control_frequency_in_unit_interval() {
        let pts =
            control_max_frequency(1, &Point::origin(1), 0.3, 0.5, &[5.0, 20.0], 40, 1, 1).unwrap();
        for p in &pts {
            assert!(
                (0.0..=1.0).contains(&p.frequency)
                    && p.ci_lo <= p.frequency
                    && p.frequency <= p.ci_hi
            );
        }
    }

    #[test]
    fn membership() {
        let lam = Point::real(&[0.4]).unwrap();
        assert!(in_invariant_ball(&lam, &lam, 0.1));
        assert!(!in_invariant_ball(&Point::origin(1), &lam, 0.3));
    }
}
