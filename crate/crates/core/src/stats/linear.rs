//! Linear statistics `I_L(ψ) = ∫_{Z_f} ψ ω^{n-1}` of one sample.
//!
//! Stokes gives `I_L(ψ) - E[I_L(ψ)] = ∫ log|f̂_L|² Dψ dμ`, and `E[I_L(ψ)] = L ∫ψ dμ`.
//! For radial `ψ = g(|z|²)` the potential integral becomes
//! `∫₀^T A(t) W(t) dt` with `A(t)` the sphere mean of `log|f̂|²` on `|z|² = t` and
//! `W(t) = Dψ(t) n t^{n-1} (1-t)^{-n-1}`. The sphere mean is an average of circle means
//! along complex lines, and each circle mean is one FFT.

use super::testfn::{d_operator, radial_d, TestFunction};
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::gaf::{log_mean_sq, GafSample, PointEvaluator, RadialSeries};
use crate::geometry::{build_grid, mu_density, simplex_rule, GridRule, Point};
use crate::special::{integrate_panels, CompensatedSum};
use crate::zeros::{roots_disk, ZeroReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Resolution of the potential quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSettings {
    /// Points on each circle (FFT length).
    pub circle_points: usize,
    /// Gauss–Kronrod panels in `t = |z|²`.
    pub panels: usize,
    /// Simplex order of the direction set when `n ≥ 2`.
    pub sphere_order: usize,
    /// Product grid for test functions without a radial profile.
    pub grid: (usize, usize, usize),
}

impl Default for PotentialSettings {
    fn default() -> Self {
        PotentialSettings {
            circle_points: 512,
            panels: 32,
            sphere_order: 6,
            grid: (24, 8, 48),
        }
    }
}

impl PotentialSettings {
    /// Coarse settings for rare-event campaigns, where only exceedances matter.
    pub fn coarse() -> Self {
        PotentialSettings {
            circle_points: 128,
            panels: 8,
            sphere_order: 4,
            grid: (12, 4, 24),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fluctuation {
    pub value: f64,
    /// Kronrod-minus-Gauss estimate summed over panels.
    pub error: f64,
    /// Circles re-sampled at four times the resolution because they passed close to a zero.
    pub refined_circles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatMethod {
    RootSum,
    PotentialQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearStatSample {
    pub trial: u64,
    pub i_value: f64,
    pub fluctuation: f64,
    pub method: StatMethod,
}

fn radial_breaks(psi: &dyn TestFunction) -> Vec<f64> {
    let top = psi.support_radius().powi(2);
    let mut b = vec![0.0];
    b.extend(
        psi.radial_breaks()
            .into_iter()
            .filter(|&x| x > 0.0 && x < top),
    );
    b.push(top);
    b
}

/// `Dψ(t) n t^{n-1} (1-t)^{-n-1}` for a radial test function.
pub fn potential_weight(psi: &dyn TestFunction, t: f64) -> f64 {
    let n = psi.n();
    let g = psi.radial_profile(t).expect("radial test function");
    radial_d(n, t, g) * n as f64 * t.powi(n as i32 - 1) * mu_density(n, t)
}

fn radial_mu_integral(psi: &dyn TestFunction, f: impl Fn(f64) -> f64) -> f64 {
    let n = psi.n();
    let breaks = radial_breaks(psi);
    integrate_panels(
        |t| f(t) * n as f64 * t.powi(n as i32 - 1) * mu_density(n, t),
        &breaks,
        1e-300,
        1e-14,
        2000,
    )
    .value
}

fn grid_for(
    psi: &dyn TestFunction,
    rule: (usize, usize, usize),
) -> Result<crate::geometry::QuadratureGrid> {
    build_grid(
        psi.n(),
        psi.support_radius(),
        GridRule::new(rule.0, rule.1, rule.2),
        &Caps::from_env(),
    )
}

/// `∫ψ dμ`.
pub fn mu_integral(psi: &dyn TestFunction) -> Result<f64> {
    if psi.radial_profile(0.0).is_some() {
        return Ok(radial_mu_integral(psi, |t| {
            psi.radial_profile(t).unwrap()[0]
        }));
    }
    let grid = grid_for(psi, (64, 16, 64))?;
    Ok(grid.integrate(|z| psi.value(z) * mu_density(z.dim(), z.norm_sq())))
}

/// `E[I_L(ψ)] = L ∫ψ dμ`.
pub fn expected_linear_statistic(psi: &dyn TestFunction, l: f64) -> Result<f64> {
    Ok(l * mu_integral(psi)?)
}

/// `∫(Dψ)² dμ`.
pub fn dpsi_sq_integral(psi: &dyn TestFunction) -> Result<f64> {
    if psi.radial_profile(0.0).is_some() {
        let n = psi.n();
        return Ok(radial_mu_integral(psi, |t| {
            radial_d(n, t, psi.radial_profile(t).unwrap()).powi(2)
        }));
    }
    let grid = grid_for(psi, (64, 16, 64))?;
    Ok(grid.integrate(|z| d_operator(psi, z).powi(2) * mu_density(z.dim(), z.norm_sq())))
}

/// `∫ f Dψ dμ` for a radial function `f(t)`; with `f = log(1-t)` this is `-∫ψ dμ`.
pub fn radial_pairing(psi: &dyn TestFunction, f: impl Fn(f64) -> f64) -> f64 {
    let breaks = radial_breaks(psi);
    integrate_panels(
        |t| f(t) * potential_weight(psi, t),
        &breaks,
        1e-300,
        1e-13,
        4000,
    )
    .value
}

/// Directions `ζ` on the unit sphere with weights, such that averaging circle means over
/// them integrates circle-invariant functions on the sphere.
pub fn sphere_directions(n: usize, order: usize) -> Vec<(Vec<Complex64>, f64)> {
    if n == 1 {
        return vec![(vec![Complex64::new(1.0, 0.0)], 1.0)];
    }
    let (us, uw) = simplex_rule(n, order);
    let phases = 2 * order;
    let per = (phases as f64).powi(n as i32 - 1);
    let mut out = Vec::new();
    for (u, w) in us.iter().zip(&uw) {
        let mut idx = vec![0usize; n - 1];
        loop {
            let mut zeta = vec![Complex64::new(u[0].sqrt(), 0.0)];
            for j in 1..n {
                zeta.push(Complex64::from_polar(
                    u[j].sqrt(),
                    TAU * idx[j - 1] as f64 / phases as f64,
                ));
            }
            out.push((zeta, w / per));
            let mut carry = 0;
            while carry < n - 1 {
                idx[carry] += 1;
                if idx[carry] < phases {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == n - 1 {
                break;
            }
        }
    }
    out
}

/// Circle mean of `log|f̂|²`, re-sampled four times finer when the circle passes close
/// to a zero.
fn circle_mean(series: &RadialSeries, rho: f64, len: usize, refined: &mut usize) -> f64 {
    if rho == 0.0 {
        return series.log_normalized(Complex64::new(0.0, 0.0));
    }
    let v = series.circle_values(rho, len);
    let (mut lo, mut sum) = (f64::INFINITY, 0.0);
    for x in &v {
        let a = x.norm_sqr();
        lo = lo.min(a);
        sum += a;
    }
    if lo < 1e-6 * sum / len as f64 {
        *refined += 1;
        return log_mean_sq(&series.circle_values(rho, 4 * len));
    }
    log_mean_sq(&v)
}

fn check_support(sample: &GafSample, psi: &dyn TestFunction) -> Result<()> {
    if psi.n() != sample.n() {
        return Err(GafError::domain(
            "test function and sample dimensions differ",
        ));
    }
    if psi.support_radius() > sample.model.tail.r_max * (1.0 + 1e-12) {
        return Err(GafError::domain(format!(
            "support radius {} exceeds trusted radius {}",
            psi.support_radius(),
            sample.model.tail.r_max
        )));
    }
    Ok(())
}

/// `I_L(ψ) - E[I_L(ψ)] = ∫ log|f̂_L|² Dψ dμ` by potential quadrature.
pub fn fluctuation(
    sample: &GafSample,
    psi: &dyn TestFunction,
    settings: &PotentialSettings,
) -> Result<Fluctuation> {
    check_support(sample, psi)?;
    if psi.radial_profile(0.0).is_none() {
        return fluctuation_on_grid(sample, psi, settings);
    }
    let dirs = sphere_directions(sample.n(), settings.sphere_order);
    let series: Vec<(RadialSeries, f64)> =
        dirs.iter().map(|(z, w)| (sample.slice(z), *w)).collect();
    let breaks = radial_breaks(psi);
    let total: f64 = breaks[breaks.len() - 1];
    let mut refined = 0;
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    for w in breaks.windows(2) {
        let pieces = ((settings.panels as f64 * (w[1] - w[0]) / total).ceil() as usize).max(1);
        for p in 0..pieces {
            let a = w[0] + (w[1] - w[0]) * p as f64 / pieces as f64;
            let b = w[0] + (w[1] - w[0]) * (p + 1) as f64 / pieces as f64;
            let r = integrate_panels(
                |t| {
                    let rho = t.sqrt();
                    let mean: f64 = series
                        .iter()
                        .map(|(s, wt)| {
                            wt * circle_mean(s, rho, settings.circle_points, &mut refined)
                        })
                        .sum();
                    mean * potential_weight(psi, t)
                },
                &[a, b],
                f64::INFINITY,
                0.0,
                1,
            );
            value.add(r.value);
            error += r.error;
        }
    }
    Ok(Fluctuation {
        value: value.value(),
        error,
        refined_circles: refined,
    })
}

/// Potential quadrature on the polar product grid, for test functions without a radial
/// profile. No error estimate is available on a fixed grid.
pub fn fluctuation_on_grid(
    sample: &GafSample,
    psi: &dyn TestFunction,
    settings: &PotentialSettings,
) -> Result<Fluctuation> {
    check_support(sample, psi)?;
    let grid = grid_for(psi, settings.grid)?;
    let ev = PointEvaluator::new(sample)?;
    let value = grid.integrate(|z| {
        let d = d_operator(psi, z);
        if d == 0.0 {
            0.0
        } else {
            ev.log_normalized(z.coords()) * d * mu_density(z.dim(), z.norm_sq())
        }
    });
    Ok(Fluctuation {
        value,
        error: f64::NAN,
        refined_circles: 0,
    })
}

/// `Σ ψ(ζ)` over the zeros of an `n = 1` sample, with the zero report it came from.
pub fn root_sum(sample: &GafSample, psi: &dyn TestFunction) -> Result<(f64, ZeroReport)> {
    check_support(sample, psi)?;
    let rep = roots_disk(sample, psi.support_radius())?;
    let total = rep
        .roots_complex()
        .into_iter()
        .map(|z| psi.value(&Point::new(vec![z]).expect("root inside the disk")))
        .collect::<CompensatedSum>()
        .value();
    Ok((total, rep))
}

/// `I_L(ψ)` and its fluctuation for one sample by the chosen method.
pub fn linear_statistic(
    sample: &GafSample,
    psi: &dyn TestFunction,
    expected: f64,
    method: StatMethod,
    settings: &PotentialSettings,
) -> Result<LinearStatSample> {
    let (i_value, fluct) = match method {
        StatMethod::RootSum => {
            let (i, _) = root_sum(sample, psi)?;
            (i, i - expected)
        }
        StatMethod::PotentialQuadrature => {
            let f = fluctuation(sample, psi, settings)?.value;
            (expected + f, f)
        }
    };
    Ok(LinearStatSample {
        trial: sample.trial,
        i_value,
        fluctuation: fluct,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaf::{GafModel, TailPolicy};
    use crate::stats::testfn::{MollifiedIndicator, PseudoBump, RadialBump};
    use approx::assert_relative_eq;

    #[test]
    fn mollified_ball_volume() {
        // μ(B(0,0.5)) = 1/3; the symmetric mollifier changes it only slightly
        let psi = MollifiedIndicator::new(1, 0.5, 0.01);
        let e = expected_linear_statistic(&psi, 30.0).unwrap();
        assert!((e / 30.0 - 1.0 / 3.0).abs() < 2e-3);
        assert_eq!(expected_linear_statistic(&psi, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn integral_of_d_vanishes() {
        for psi in [
            Box::new(RadialBump::new(1, 0.7, 4)) as Box<dyn TestFunction>,
            Box::new(RadialBump::new(2, 0.6, 3)),
            Box::new(MollifiedIndicator::new(3, 0.5, 0.2)),
        ] {
            let v = radial_pairing(psi.as_ref(), |_| 1.0);
            assert!(v.abs() < 1e-8, "{}: {v}", psi.family());
        }
    }

    #[test]
    fn omega_potential_identity() {
        for psi in [
            Box::new(RadialBump::new(1, 0.7, 4)) as Box<dyn TestFunction>,
            Box::new(RadialBump::new(2, 0.6, 3)),
            Box::new(MollifiedIndicator::new(2, 0.5, 0.2)),
        ] {
            let lhs = radial_pairing(psi.as_ref(), |t| (-t).ln_1p());
            let rhs = -mu_integral(psi.as_ref()).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        }
    }

    #[test]
    fn constant_sample_cancels_the_mean() {
        for n in [1usize, 2] {
            let psi = RadialBump::new(n, 0.6, 4);
            let m = GafModel::new(n, 12.0, TailPolicy::new(0.6, 1e-8), &Caps::default()).unwrap();
            let mut c = vec![Complex64::new(0.0, 0.0); m.coefficient_count()];
            c[0] = Complex64::new(0.6, 0.8);
            let s = m.from_coefficients(c).unwrap();
            let f = fluctuation(&s, &psi, &PotentialSettings::default()).unwrap();
            let e = expected_linear_statistic(&psi, 12.0).unwrap();
            assert!(
                (f.value + e).abs() < 1e-8 * e,
                "n={n}: {} vs {}",
                f.value,
                -e
            );
        }
    }

    #[test]
    fn green_consistency_on_a_few_samples() {
        let psi = RadialBump::new(1, 0.7, 4);
        let m = GafModel::new(1, 20.0, TailPolicy::new(0.7, 1e-10), &Caps::default()).unwrap();
        let e = expected_linear_statistic(&psi, 20.0).unwrap();
        for trial in 0..20 {
            let s = m.sample(21, trial);
            let (rs, _) = root_sum(&s, &psi).unwrap();
            let f = fluctuation(&s, &psi, &PotentialSettings::default()).unwrap();
            assert!(
                (rs - e - f.value).abs() < 1e-3,
                "trial {trial}: {rs} vs {}",
                e + f.value
            );
        }
    }

    #[test]
    fn grid_path_agrees_with_radial_path() {
        // a pseudo-bump centred at the origin is the radial bump, evaluated on the grid
        let psi = PseudoBump::new(Point::origin(1), 0.5, 5);
        let radial = RadialBump::new(1, 0.5, 5);
        let m = GafModel::new(1, 6.0, TailPolicy::new(0.5, 1e-10), &Caps::default()).unwrap();
        let settings = PotentialSettings {
            grid: (96, 1, 256),
            ..PotentialSettings::default()
        };
        let mut diffs = Vec::new();
        for trial in 0..5 {
            let s = m.sample(2, trial);
            let a = fluctuation(&s, &psi, &settings).unwrap().value;
            let b = fluctuation(&s, &radial, &settings).unwrap().value;
            diffs.push((a - b).abs());
        }
        let worst = diffs.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 2e-2, "{diffs:?}");
    }
}
