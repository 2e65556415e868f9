//! Monte Carlo campaigns. Trials run on a rayon pool and are collected in trial order,
//! and every trial draws from its own `(seed, trial)` stream, so results do not depend on
//! the number of workers.

use super::linear::{expected_linear_statistic, fluctuation, mu_integral, PotentialSettings};
use super::summary::{
    ks_normal, least_squares, moments, wilson_interval, KsResult, LinearFit, Moments,
};
use super::testfn::TestFunction;
use super::variance::{variance_quadrature, VarianceRule};
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::gaf::{GafModel, TailPolicy};
use crate::geometry::invariant_volume_ball;
use crate::zeros::{
    certificate_log_probability, count_disk, hole_indicator, Certainty, CertificateLogProbability,
    HoleCertificateSpec, HoleVerdict,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Confidence level used for every interval in campaign outputs.
pub const CI_ALPHA: f64 = 0.05;

/// Grid points with fewer exceedance events than this are left out of decay regressions.
pub const MIN_EVENTS: u64 = 50;

/// `f(trial)` for `trial = 0..trials` on `workers` threads, in trial order.
pub fn run_trials<T, F>(trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| GafError::Config(format!("worker pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityTrial {
    pub trial: u64,
    pub count: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntensityResult {
    pub l: f64,
    pub r: f64,
    /// `L μ(B(0,r))`.
    pub expected: f64,
    pub mean: f64,
    pub se: f64,
    pub uncertain: usize,
    pub trials: Vec<IntensityTrial>,
}

impl IntensityResult {
    /// `|mean - expected|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected) / self.se
    }
}

/// Zero counts in `B(0,r)` for `n = 1` by the argument principle.
pub fn intensity_campaign(
    l: f64,
    r: f64,
    eps_tail: f64,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<IntensityResult> {
    let model = GafModel::new(1, l, TailPolicy::new(r, eps_tail), &Caps::from_env())?;
    let rows = run_trials(trials, workers, |t| {
        let rep = count_disk(&model.sample(seed, t), r)?;
        Ok(IntensityTrial {
            trial: t,
            count: rep.count,
            certified: rep.certainty == Certainty::Certified,
        })
    })?;
    let counts: Vec<f64> = rows.iter().map(|x| x.count as f64).collect();
    let m = moments(&counts)?;
    Ok(IntensityResult {
        l,
        r,
        expected: l * invariant_volume_ball(r, 1)?,
        mean: m.mean,
        se: m.mean_se(),
        uncertain: rows.iter().filter(|x| !x.certified).count(),
        trials: rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationTrial {
    pub trial: u64,
    pub i_value: f64,
    pub fluctuation: f64,
    pub quad_error: f64,
    pub refined_circles: usize,
}

/// Potential-quadrature fluctuations of `trials` samples at intensity `l`.
pub fn fluctuation_trials(
    psi: &dyn TestFunction,
    l: f64,
    eps_tail: f64,
    settings: &PotentialSettings,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<FluctuationTrial>> {
    let model = GafModel::new(
        psi.n(),
        l,
        TailPolicy::new(psi.support_radius(), eps_tail),
        &Caps::from_env(),
    )?;
    let e = expected_linear_statistic(psi, l)?;
    run_trials(trials, workers, |t| {
        let f = fluctuation(&model.sample(seed, t), psi, settings)?;
        Ok(FluctuationTrial {
            trial: t,
            i_value: e + f.value,
            fluctuation: f.value,
            quad_error: f.error,
            refined_circles: f.refined_circles,
        })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalitySummary {
    pub moments: Moments,
    pub ks: KsResult,
    /// Standard deviation used to standardise.
    pub scale: f64,
}

impl NormalitySummary {
    pub fn rejected_at(&self, level: f64) -> bool {
        self.ks.p_value < level
    }
}

/// Moments and KS test of `xs / scale` against the standard normal.
pub fn normality_summary(xs: &[f64], scale: f64) -> Result<NormalitySummary> {
    let z: Vec<f64> = xs.iter().map(|x| x / scale).collect();
    Ok(NormalitySummary {
        moments: moments(&z)?,
        ks: ks_normal(&z)?,
        scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityResult {
    pub l: f64,
    pub expected: f64,
    pub variance_quad: f64,
    pub variance_quad_error: f64,
    pub summary: NormalitySummary,
    /// Moments of the raw fluctuations (mean and sample variance for Monte Carlo checks).
    pub raw: Moments,
    pub trials: Vec<FluctuationTrial>,
}

/// Fluctuations standardised by the quadrature variance.
pub fn normality_campaign(
    psi: &dyn TestFunction,
    l: f64,
    eps_tail: f64,
    settings: &PotentialSettings,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<NormalityResult> {
    let rows = fluctuation_trials(psi, l, eps_tail, settings, trials, seed, workers)?;
    let var = variance_quadrature(psi, l, &VarianceRule::default())?;
    let xs: Vec<f64> = rows.iter().map(|r| r.fluctuation).collect();
    Ok(NormalityResult {
        l,
        expected: expected_linear_statistic(psi, l)?,
        variance_quad: var.value,
        variance_quad_error: var.error,
        summary: normality_summary(&xs, var.value.sqrt())?,
        raw: moments(&xs)?,
        trials: rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub l: f64,
    /// `L^{n+1}`.
    pub x: f64,
    pub trials: u64,
    pub events: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl DecayPoint {
    pub fn new(n: usize, l: f64, events: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(events, trials, CI_ALPHA);
        DecayPoint {
            l,
            x: l.powi(n as i32 + 1),
            trials,
            events,
            p_hat: events as f64 / trials as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// `p̂`, or the observable floor `1/trials` when nothing was seen.
    pub fn p_reported(&self) -> f64 {
        if self.events == 0 {
            1.0 / self.trials as f64
        } else {
            self.p_hat
        }
    }
}

/// Empirical probabilities on an `L` grid with the fit of `-log p̂` against `L^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub n: usize,
    pub points: Vec<DecayPoint>,
    /// Fit over points with at least [`MIN_EVENTS`] events, if there are two of them.
    pub fit: Option<LinearFit>,
}

impl DecayCurve {
    pub fn new(n: usize, points: Vec<DecayPoint>) -> Self {
        let used: Vec<&DecayPoint> = points.iter().filter(|p| p.events >= MIN_EVENTS).collect();
        let xs: Vec<f64> = used.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = used.iter().map(|p| -p.p_hat.ln()).collect();
        let fit = least_squares(&xs, &ys).ok();
        DecayCurve { n, points, fit }
    }

    /// `p̂` strictly decreasing along the grid, counting an empty point as below any
    /// positive one; two empty points in a row are not a strict decrease.
    pub fn strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].p_hat < w[0].p_hat)
    }
}

/// How an exceedance of a linear statistic is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deviation {
    /// `|I/L - ∫ψ dμ| > δ`.
    Absolute,
    /// `|I - E| > δ E`, i.e. `|I/L - ∫ψ dμ| > δ ∫ψ dμ`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceTrial {
    pub l: f64,
    pub trial: u64,
    pub fluctuation: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeDeviationResult {
    pub deviation: Deviation,
    pub delta: f64,
    /// Threshold on `|I/L - ∫ψ dμ|`.
    pub threshold: f64,
    pub curve: DecayCurve,
    pub trials: Vec<ExceedanceTrial>,
}

/// Exceedance frequencies of `|I_L(ψ)/L - ∫ψ dμ|` over an `L` grid.
#[allow(clippy::too_many_arguments)]
pub fn large_deviation_campaign(
    psi: &dyn TestFunction,
    delta: f64,
    deviation: Deviation,
    ls: &[f64],
    eps_tail: f64,
    settings: &PotentialSettings,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<LargeDeviationResult> {
    if !(delta > 0.0) {
        return Err(GafError::domain("δ must be positive"));
    }
    let mass = mu_integral(psi)?;
    let threshold = match deviation {
        Deviation::Absolute => delta,
        Deviation::Relative => delta * mass,
    };
    let mut points = Vec::new();
    let mut all = Vec::new();
    for &l in ls {
        let rows = fluctuation_trials(psi, l, eps_tail, settings, trials, seed, workers)?;
        let mut events = 0;
        for r in rows {
            let exceeds = (r.fluctuation / l).abs() > threshold;
            events += exceeds as u64;
            all.push(ExceedanceTrial {
                l,
                trial: r.trial,
                fluctuation: r.fluctuation,
                exceeds,
            });
        }
        points.push(DecayPoint::new(psi.n(), l, events, trials));
    }
    Ok(LargeDeviationResult {
        deviation,
        delta,
        threshold,
        curve: DecayCurve::new(psi.n(), points),
        trials: all,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleTrial {
    pub l: f64,
    pub trial: u64,
    pub verdict: HoleVerdict,
    pub margin: f64,
}

/// Certificate lower bound next to the empirical estimate at one `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOverlay {
    pub l: f64,
    pub c: f64,
    pub log_probability: CertificateLogProbability,
    /// `log p̂ + 3 (log ci_hi - log p̂)`, or `log ci_hi` when no hole was seen.
    pub empirical_ceiling: f64,
    pub below: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoleResult {
    pub r: f64,
    pub heuristic: bool,
    pub uncertain: u64,
    pub curve: DecayCurve,
    pub certificates: Vec<CertificateOverlay>,
    pub trials: Vec<HoleTrial>,
}

/// Empirical hole probabilities of `B(0,r)` over an `L` grid, with the certificate lower
/// bound at each grid point. Every grid point reuses the same `(seed, trial)` streams.
/// Uncertain trials count as no hole.
#[allow(clippy::too_many_arguments)]
pub fn hole_campaign(
    n: usize,
    r: f64,
    ls: &[f64],
    eps_tail: f64,
    slices: usize,
    trials: u64,
    seed: u64,
    workers: usize,
    with_certificates: bool,
) -> Result<HoleResult> {
    let caps = Caps::from_env();
    let mut points = Vec::new();
    let mut certificates = Vec::new();
    let mut all = Vec::new();
    let mut uncertain = 0;
    for &l in ls {
        let model = GafModel::new(n, l, TailPolicy::new(r, eps_tail), &caps)?;
        let rows = run_trials(trials, workers, |t| {
            let h = hole_indicator(&model.sample(seed, t), r, slices)?;
            Ok(HoleTrial {
                l,
                trial: t,
                verdict: h.verdict,
                margin: h.margin,
            })
        })?;
        let holes = rows
            .iter()
            .filter(|h| h.verdict == HoleVerdict::Hole)
            .count() as u64;
        uncertain += rows
            .iter()
            .filter(|h| h.verdict == HoleVerdict::Uncertain)
            .count() as u64;
        all.extend(rows);
        let point = DecayPoint::new(n, l, holes, trials);
        if with_certificates {
            let (spec, _) = HoleCertificateSpec::scanned(n, l, r, &caps)?;
            let lp = certificate_log_probability(&spec);
            let ceiling = if point.events == 0 {
                point.ci_hi.ln()
            } else {
                let lp_hat = point.p_hat.ln();
                lp_hat + 3.0 * (point.ci_hi.ln() - lp_hat)
            };
            certificates.push(CertificateOverlay {
                l,
                c: spec.c,
                log_probability: lp,
                empirical_ceiling: ceiling,
                below: lp.total <= ceiling,
            });
        }
        points.push(point);
    }
    Ok(HoleResult {
        r,
        heuristic: n > 1,
        uncertain,
        curve: DecayCurve::new(n, points),
        certificates,
        trials: all,
    })
}
