//! Running a configured experiment and persisting its outputs.
//!
//! Every run directory holds `trials.csv` (one row per trial, floats with 17 significant
//! digits), `summary.json`, `plot.csv` and `manifest.json`; intensity runs add
//! `zeros.jsonl`. Data files depend only on the configuration and seed, never on the
//! worker count. The manifest carries timestamps and is the only file that changes
//! between identical runs.

use super::config::{ExperimentConfig, ExperimentKind};
use super::plot::emit_plotdata;
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::gaf::choose_truncation;
use crate::stats::{
    fluctuation_trials, hole_campaign, identity_suite, intensity_campaign, invariant_suite,
    large_deviation_campaign, moments, mu_integral, normality_campaign, radial_factor, run_trials,
    self_averaging_slope, variance_asymptote, variance_quadrature, FluctuationTrial,
    IdentityStatus, VarianceRule,
};
use crate::zeros::{
    certificate_log_probability, certificate_sample, hole_indicator, min_modulus_on_disk,
    Certainty, CountMode, HoleCertificateSpec, HoleVerdict, ZeroReport,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ZEROS_FILE: &str = "zeros.jsonl";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Rows of a CSV file, built in memory and written once.
#[derive(Debug, Clone)]
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Value,
    /// SHA-256 of every data file, by file name.
    pub checksums: BTreeMap<String, String>,
}

/// What an experiment produced before anything is written.
struct Artifacts {
    files: Vec<(&'static str, Vec<u8>)>,
    summary: Value,
    derived: Value,
    /// Trials without a certified answer, and the number of trials they are out of.
    failures: Option<(u64, u64)>,
    failed_checks: Vec<String>,
}

impl Artifacts {
    fn new(summary: Value, derived: Value) -> Self {
        Artifacts {
            files: Vec::new(),
            summary,
            derived,
            failures: None,
            failed_checks: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Run `cfg`, writing into `out` (created if needed).
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = chrono::Utc::now();
    let art = match cfg.kind {
        ExperimentKind::Intensity => intensity(cfg)?,
        ExperimentKind::Variance => variance(cfg)?,
        ExperimentKind::Normality => normality(cfg)?,
        ExperimentKind::LargeDev => large_dev(cfg)?,
        ExperimentKind::Hole => hole(cfg)?,
        ExperimentKind::Certificate => certificate(cfg)?,
        ExperimentKind::Selfcheck => selfcheck(cfg)?,
    };

    std::fs::create_dir_all(out)?;
    let mut checksums = BTreeMap::new();
    for (name, bytes) in &art.files {
        std::fs::write(out.join(name), bytes)?;
        checksums.insert(name.to_string(), sha256_hex(bytes));
    }
    let summary_bytes = serde_json::to_vec_pretty(&art.summary)?;
    std::fs::write(out.join(SUMMARY_FILE), &summary_bytes)?;
    checksums.insert(SUMMARY_FILE.to_string(), sha256_hex(&summary_bytes));
    for path in emit_plotdata(out)? {
        let name = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        checksums.insert(name, sha256_hex(&std::fs::read(&path)?));
    }

    // workers and output location do not change the data, so they stay out of the hash
    let mut canonical = cfg.clone();
    canonical.workers = 0;
    canonical.out = None;
    let config_json = serde_json::to_string(&canonical)?;
    let manifest = json!({
        "config": cfg,
        "config_hash": sha256_hex(config_json.as_bytes()),
        "code_version": env!("CARGO_PKG_VERSION"),
        "started": started.to_rfc3339(),
        "finished": chrono::Utc::now().to_rfc3339(),
        "workers": cfg.worker_count(),
        "files": checksums,
        "derived": art.derived,
    });
    std::fs::write(
        out.join(MANIFEST_FILE),
        serde_json::to_vec_pretty(&manifest)?,
    )?;

    if let Some((bad, total)) = art.failures {
        if bad as f64 > cfg.failure_budget * total as f64 {
            return Err(GafError::Numeric(format!(
                "{bad} of {total} trials uncertain, budget is {}",
                cfg.failure_budget
            )));
        }
    }
    if !art.failed_checks.is_empty() {
        return Err(GafError::Numeric(format!(
            "failed checks: {}",
            art.failed_checks.join("; ")
        )));
    }
    Ok(RunOutcome {
        dir: out.to_path_buf(),
        summary: art.summary,
        checksums,
    })
}

fn truncation_degrees(cfg: &ExperimentConfig, r_max: f64) -> Result<Value> {
    let caps = Caps::from_env();
    let mut m = serde_json::Map::new();
    for l in cfg.intensities() {
        m.insert(
            l.to_string(),
            json!(choose_truncation(cfg.n, l, r_max, cfg.eps_tail, &caps)?),
        );
    }
    Ok(Value::Object(m))
}

fn intensity(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let (l, r) = (cfg.intensities()[0], cfg.radius()?);
    let res = intensity_campaign(l, r, cfg.eps_tail, cfg.trials, cfg.seed, cfg.worker_count())?;
    let mut table = CsvTable::new(&["trial", "count", "certified"]);
    let mut zeros = String::new();
    for t in &res.trials {
        table.row(&[
            t.trial.to_string(),
            t.count.to_string(),
            t.certified.to_string(),
        ]);
        let report = ZeroReport {
            trial: t.trial,
            count: t.count,
            certainty: if t.certified {
                Certainty::Certified
            } else {
                Certainty::Uncertain
            },
            roots: None,
            mode: CountMode::Winding,
            slices_used: 0,
        };
        writeln!(zeros, "{}", report.to_json_line()).expect("string write");
    }
    let summary = json!({
        "kind": "intensity",
        "n": 1,
        "l": l,
        "r": r,
        "trials": cfg.trials,
        "expected": res.expected,
        "mean": res.mean,
        "se": res.se,
        "z_score": res.z_score(),
        "uncertain": res.uncertain,
    });
    let mut art = Artifacts::new(
        summary,
        json!({ "truncation_degree": truncation_degrees(cfg, r)? }),
    );
    art.files.push((TRIALS_FILE, table.into_bytes()));
    art.files.push((ZEROS_FILE, zeros.into_bytes()));
    art.failures = Some((res.uncertain as u64, cfg.trials));
    Ok(art)
}

fn fluctuation_table(rows: &[(f64, FluctuationTrial)]) -> CsvTable {
    let mut table = CsvTable::new(&[
        "l",
        "trial",
        "i_value",
        "fluctuation",
        "quad_error",
        "refined_circles",
    ]);
    for (l, t) in rows {
        table.row(&[
            fmt_f64(*l),
            t.trial.to_string(),
            fmt_f64(t.i_value),
            fmt_f64(t.fluctuation),
            fmt_f64(t.quad_error),
            t.refined_circles.to_string(),
        ]);
    }
    table
}

fn variance(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let spec = cfg.test_function()?;
    let psi = spec.build(cfg.n);
    let rule = VarianceRule::default();
    let settings = cfg.quadrature.settings();
    let asymptote = variance_asymptote(psi.as_ref())?;
    let ls = cfg.intensities();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &l in &ls {
        let q = variance_quadrature(psi.as_ref(), l, &rule)?;
        let trials = fluctuation_trials(
            psi.as_ref(),
            l,
            cfg.eps_tail,
            &settings,
            cfg.trials,
            cfg.seed,
            cfg.worker_count(),
        )?;
        let xs: Vec<f64> = trials.iter().map(|t| t.fluctuation).collect();
        let mc = if xs.len() >= 2 {
            Some(moments(&xs)?)
        } else {
            None
        };
        let scale = l.powi(cfg.n as i32);
        points.push(json!({
            "l": l,
            "variance": q.value,
            "variance_error": q.error,
            "l_pow_n_variance": scale * q.value,
            "asymptote": asymptote,
            "radial_factor": radial_factor(cfg.n, l)?,
            "mc_variance": mc.map(|m| m.variance),
            "mc_variance_se": mc.map(|m| m.variance_se()),
            "mc_mean": mc.map(|m| m.mean),
        }));
        rows.extend(trials.into_iter().map(|t| (l, t)));
    }
    let slope = if ls.len() >= 2 {
        Some(self_averaging_slope(psi.as_ref(), &ls, &rule)?)
    } else {
        None
    };
    let summary = json!({
        "kind": "variance",
        "n": cfg.n,
        "psi": spec,
        "trials": cfg.trials,
        "asymptote": asymptote,
        "points": points,
        "self_averaging_slope": slope,
    });
    let derived = json!({
        "truncation_degree": truncation_degrees(cfg, psi.support_radius())?,
        "variance_rule": rule,
        "potential_settings": settings,
    });
    let mut art = Artifacts::new(summary, derived);
    art.files
        .push((TRIALS_FILE, fluctuation_table(&rows).into_bytes()));
    Ok(art)
}

fn normality(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let spec = cfg.test_function()?;
    let psi = spec.build(cfg.n);
    let l = cfg.intensities()[0];
    let settings = cfg.quadrature.settings();
    let res = normality_campaign(
        psi.as_ref(),
        l,
        cfg.eps_tail,
        &settings,
        cfg.trials,
        cfg.seed,
        cfg.worker_count(),
    )?;
    let summary = json!({
        "kind": "normality",
        "n": cfg.n,
        "psi": spec,
        "l": l,
        "trials": cfg.trials,
        "expected": res.expected,
        "variance_quad": res.variance_quad,
        "variance_quad_error": res.variance_quad_error,
        "ks_statistic": res.summary.ks.statistic,
        "ks_p_value": res.summary.ks.p_value,
        "rejected_at_0_01": res.summary.rejected_at(0.01),
        "standardised": res.summary.moments,
        "raw": res.raw,
    });
    let derived = json!({
        "truncation_degree": truncation_degrees(cfg, psi.support_radius())?,
        "variance_rule": VarianceRule::default(),
        "potential_settings": settings,
    });
    let rows: Vec<(f64, FluctuationTrial)> = res.trials.iter().map(|t| (l, *t)).collect();
    let mut art = Artifacts::new(summary, derived);
    art.files
        .push((TRIALS_FILE, fluctuation_table(&rows).into_bytes()));
    Ok(art)
}

fn large_dev(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let spec = cfg.test_function()?;
    let psi = spec.build(cfg.n);
    let delta = cfg.delta.expect("validated");
    let settings = cfg.quadrature.settings();
    let res = large_deviation_campaign(
        psi.as_ref(),
        delta,
        cfg.deviation,
        &cfg.intensities(),
        cfg.eps_tail,
        &settings,
        cfg.trials,
        cfg.seed,
        cfg.worker_count(),
    )?;
    let mut table = CsvTable::new(&["l", "trial", "fluctuation", "exceeds"]);
    for t in &res.trials {
        table.row(&[
            fmt_f64(t.l),
            t.trial.to_string(),
            fmt_f64(t.fluctuation),
            t.exceeds.to_string(),
        ]);
    }
    let summary = json!({
        "kind": "large-dev",
        "n": cfg.n,
        "psi": spec,
        "trials": cfg.trials,
        "deviation": res.deviation,
        "delta": res.delta,
        "mu_mass": mu_integral(psi.as_ref())?,
        "threshold": res.threshold,
        "curve": res.curve,
        "strictly_decreasing": res.curve.strictly_decreasing(),
    });
    let derived = json!({
        "truncation_degree": truncation_degrees(cfg, psi.support_radius())?,
        "potential_settings": settings,
    });
    let mut art = Artifacts::new(summary, derived);
    art.files.push((TRIALS_FILE, table.into_bytes()));
    Ok(art)
}

fn verdict_name(v: HoleVerdict) -> &'static str {
    match v {
        HoleVerdict::Hole => "hole",
        HoleVerdict::NoHole => "no-hole",
        HoleVerdict::Uncertain => "uncertain",
    }
}

fn hole(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let r = cfg.radius()?;
    let ls = cfg.intensities();
    let res = hole_campaign(
        cfg.n,
        r,
        &ls,
        cfg.eps_tail,
        cfg.slices,
        cfg.trials,
        cfg.seed,
        cfg.worker_count(),
        cfg.certificates,
    )?;
    let mut table = CsvTable::new(&["l", "trial", "verdict", "margin"]);
    for t in &res.trials {
        table.row(&[
            fmt_f64(t.l),
            t.trial.to_string(),
            verdict_name(t.verdict).into(),
            fmt_f64(t.margin),
        ]);
    }
    let summary = json!({
        "kind": "hole",
        "n": cfg.n,
        "r": r,
        "trials": cfg.trials,
        "heuristic": res.heuristic,
        "uncertain": res.uncertain,
        "curve": res.curve,
        "certificates": res.certificates,
        "certificates_below": res.certificates.iter().all(|c| c.below),
    });
    let derived = json!({
        "truncation_degree": truncation_degrees(cfg, r)?,
        "certificate_constants": res.certificates.iter().map(|c| json!({"l": c.l, "c": c.c})).collect::<Vec<_>>(),
        "slices": cfg.slices,
    });
    let mut art = Artifacts::new(summary, derived);
    art.files.push((TRIALS_FILE, table.into_bytes()));
    art.failures = Some((res.uncertain, cfg.trials * ls.len() as u64));
    Ok(art)
}

fn certificate(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let r = cfg.radius()?;
    let caps = Caps::from_env();
    let mut table = CsvTable::new(&["l", "trial", "hole", "min_modulus"]);
    let mut points = Vec::new();
    let mut constants = Vec::new();
    let mut missing = 0u64;
    for l in cfg.intensities() {
        let (spec, scan) = HoleCertificateSpec::scanned(cfg.n, l, r, &caps)?;
        let lp = certificate_log_probability(&spec);
        let rows = run_trials(cfg.trials, cfg.worker_count(), |t| {
            let sample = certificate_sample(&spec, cfg.seed, t);
            if cfg.n == 1 {
                let m = min_modulus_on_disk(&sample, r)?;
                Ok((m.is_some(), m))
            } else {
                let h = hole_indicator(&sample, r, cfg.slices)?;
                Ok((h.verdict == HoleVerdict::Hole, None))
            }
        })?;
        let mut holes = 0u64;
        let mut least = f64::INFINITY;
        for (t, (is_hole, m)) in rows.iter().enumerate() {
            holes += *is_hole as u64;
            if let Some(v) = m {
                least = least.min(*v);
            }
            table.row(&[
                fmt_f64(l),
                t.to_string(),
                is_hole.to_string(),
                fmt_f64(m.unwrap_or(f64::NAN)),
            ]);
        }
        missing += cfg.trials - holes;
        points.push(json!({
            "l": l,
            "c": spec.c,
            "middle_degree": spec.middle_degree,
            "bounds": spec.bounds,
            "log_probability": lp,
            "holes": holes,
            "min_modulus": if least.is_finite() { Some(least) } else { None },
        }));
        constants.push(json!({"l": l, "c": spec.c, "degree": spec.model.degree, "scan_steps": scan.steps.len()}));
    }
    let summary = json!({
        "kind": "certificate",
        "n": cfg.n,
        "r": r,
        "trials": cfg.trials,
        "points": points,
    });
    let mut art = Artifacts::new(summary, json!({ "certificates": constants }));
    art.files.push((TRIALS_FILE, table.into_bytes()));
    art.failures = Some((missing, cfg.trials * cfg.intensities().len() as u64));
    Ok(art)
}

fn selfcheck(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let mut reports = identity_suite(cfg.seed)?;
    reports.extend(invariant_suite(cfg.seed)?);
    let mut table = CsvTable::new(&["check", "status", "lhs", "rhs", "discrepancy", "tolerance"]);
    let mut failed = Vec::new();
    let mut measured = Vec::new();
    for r in &reports {
        let status = match r.status {
            IdentityStatus::Pass => "pass",
            IdentityStatus::Fail => "fail",
            IdentityStatus::Measured => "measured",
        };
        table.row(&[
            r.label(),
            status.into(),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.discrepancy),
            fmt_f64(r.tolerance),
        ]);
        match r.status {
            IdentityStatus::Fail => failed.push(r.label()),
            IdentityStatus::Measured => measured
                .push(json!({"check": r.label(), "lhs": r.lhs, "rhs": r.rhs, "note": r.note})),
            IdentityStatus::Pass => {}
        }
    }
    let summary = json!({
        "kind": "selfcheck",
        "checks": reports.len(),
        "passed": reports.iter().filter(|r| r.status == IdentityStatus::Pass).count(),
        "failed": failed,
        "measured": measured,
    });
    let mut art = Artifacts::new(summary, json!({}));
    art.files.push((TRIALS_FILE, table.into_bytes()));
    art.failed_checks = failed;
    Ok(art)
}
