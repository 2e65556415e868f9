//! Experiment configuration files (TOML).
//!
//! ```toml
//! kind = "hole"          # intensity | variance | normality | large-dev | hole | certificate | selfcheck
//! n = 1
//! l = [4, 8, 12, 16, 20, 24]   # a single value is also accepted
//! r = 0.3
//! trials = 100000
//! seed = 1
//! workers = 0            # 0: all available cores
//! certificates = true
//! ```
//!
//! Test functions for `variance`, `normality` and `large-dev`:
//!
//! ```toml
//! psi = { family = "bump", s = 0.7, k = 4 }
//! psi = { family = "mollified", s = 0.5, eta = 0.05 }
//! ```

use crate::error::{GafError, Result};
use crate::stats::{Deviation, MollifiedIndicator, PotentialSettings, RadialBump, TestFunction};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Intensity,
    Variance,
    Normality,
    LargeDev,
    Hole,
    Certificate,
    Selfcheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Intensity => "intensity",
            ExperimentKind::Variance => "variance",
            ExperimentKind::Normality => "normality",
            ExperimentKind::LargeDev => "large-dev",
            ExperimentKind::Hole => "hole",
            ExperimentKind::Certificate => "certificate",
            ExperimentKind::Selfcheck => "selfcheck",
        }
    }
}

/// A single intensity or a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Intensities {
    One(f64),
    Grid(Vec<f64>),
}

impl Intensities {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Intensities::One(l) => vec![*l],
            Intensities::Grid(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PsiSpec {
    /// `(1 - |z|²/s²)^k` on `|z| < s`.
    Bump { s: f64, k: u32 },
    /// Smoothed indicator of `B(0,s)` with transition half-width `eta`.
    Mollified { s: f64, eta: f64 },
}

impl PsiSpec {
    pub fn build(&self, n: usize) -> Box<dyn TestFunction> {
        match *self {
            PsiSpec::Bump { s, k } => Box::new(RadialBump::new(n, s, k)),
            PsiSpec::Mollified { s, eta } => Box::new(MollifiedIndicator::new(n, s, eta)),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PsiSpec::Bump { s, k } if s > 0.0 && s < 1.0 && k >= 3 => Ok(()),
            PsiSpec::Mollified { s, eta } if eta > 0.0 && s - eta >= 0.0 && s + eta < 1.0 => Ok(()),
            _ => Err(GafError::Config(format!("invalid test function {self:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    #[default]
    Default,
    Coarse,
}

impl Quadrature {
    pub fn settings(self) -> PotentialSettings {
        match self {
            Quadrature::Default => PotentialSettings::default(),
            Quadrature::Coarse => PotentialSettings::coarse(),
        }
    }
}

fn default_n() -> usize {
    1
}
fn default_trials() -> u64 {
    1000
}
fn default_eps_tail() -> f64 {
    1e-10
}
fn default_slices() -> usize {
    16
}
fn default_deviation() -> Deviation {
    Deviation::Relative
}
fn default_failure_budget() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub l: Option<Intensities>,
    /// Disk or ball radius for intensity, hole and certificate runs.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_deviation")]
    pub deviation: Deviation,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps_tail")]
    pub eps_tail: f64,
    /// 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Complex lines per sample for hole tests in dimension two and higher.
    #[serde(default = "default_slices")]
    pub slices: usize,
    /// Overlay the certificate lower bound on hole curves.
    #[serde(default)]
    pub certificates: bool,
    /// Largest tolerated fraction of trials without a certified answer.
    #[serde(default = "default_failure_budget")]
    pub failure_budget: f64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n: default_n(),
            l: None,
            r: None,
            psi: None,
            delta: None,
            deviation: default_deviation(),
            trials: default_trials(),
            seed: 0,
            eps_tail: default_eps_tail(),
            workers: 0,
            out: None,
            quadrature: Quadrature::Default,
            slices: default_slices(),
            certificates: false,
            failure_budget: default_failure_budget(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| GafError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GafError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Intensity grid, empty for `selfcheck`.
    pub fn intensities(&self) -> Vec<f64> {
        self.l.as_ref().map(Intensities::values).unwrap_or_default()
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }
    }

    fn require<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| GafError::Config(format!("kind = \"{}\" needs `{name}`", self.kind.name())))
    }

    pub fn radius(&self) -> Result<f64> {
        self.require(self.r, "r")
    }

    pub fn test_function(&self) -> Result<PsiSpec> {
        self.require(self.psi, "psi")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GafError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return bad(format!("eps_tail = {} outside (0, 1)", self.eps_tail));
        }
        if !(0.0..=1.0).contains(&self.failure_budget) {
            return bad("failure_budget must lie in [0, 1]".into());
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r < 1.0) {
                return bad(format!("r = {r} must lie in (0, 1)"));
            }
        }
        if let Some(psi) = &self.psi {
            psi.validate()?;
        }
        if self.kind == ExperimentKind::Selfcheck {
            return Ok(());
        }
        let ls = self.intensities();
        if ls.is_empty() {
            return bad(format!("kind = \"{}\" needs `l`", self.kind.name()));
        }
        if ls.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("intensities must be positive and finite".into());
        }
        match self.kind {
            ExperimentKind::Intensity => {
                self.radius()?;
                if self.n != 1 || ls.len() != 1 {
                    return bad("intensity runs count zeros for n = 1 at a single L".into());
                }
            }
            ExperimentKind::Hole | ExperimentKind::Certificate => {
                self.radius()?;
            }
            ExperimentKind::Variance => {
                self.test_function()?;
                if self.n > 2 {
                    return bad("variance quadrature supports n = 1 and n = 2".into());
                }
            }
            ExperimentKind::Normality => {
                self.test_function()?;
                if ls.len() != 1 {
                    return bad("normality runs use a single L".into());
                }
            }
            ExperimentKind::LargeDev => {
                self.test_function()?;
                let d = self.require(self.delta, "delta")?;
                if !(d > 0.0) {
                    return bad("delta must be positive".into());
                }
            }
            ExperimentKind::Selfcheck => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grid_and_scalar() {
        let c = ExperimentConfig::from_toml("kind = \"hole\"\nl = [4, 8.5]\nr = 0.3\n").unwrap();
        assert_eq!(c.intensities(), vec![4.0, 8.5]);
        let c = ExperimentConfig::from_toml("kind = \"intensity\"\nl = 20\nr = 0.5\ntrials = 10\n")
            .unwrap();
        assert_eq!(c.intensities(), vec![20.0]);
        assert_eq!(c.trials, 10);
    }

    #[test]
    fn test_function_tables() {
        let c = ExperimentConfig::from_toml(
            "kind = \"large-dev\"\nl = [5, 10]\ndelta = 0.5\npsi = { family = \"mollified\", s = 0.5, eta = 0.05 }\n",
        )
        .unwrap();
        assert_eq!(c.psi, Some(PsiSpec::Mollified { s: 0.5, eta: 0.05 }));
        assert_eq!(c.deviation, Deviation::Relative);
    }

    #[test]
    fn schema_errors() {
        for text in [
            "kind = \"hole\"\nl = 4\n",                      // no radius
            "kind = \"hole\"\nl = 4\nr = 1.0\n",             // radius on the boundary
            "kind = \"hole\"\nl = 4\nr = 0.3\ntrials = 0\n", // no trials
            "kind = \"warp\"\n",                             // unknown kind
            "kind = \"hole\"\nl = 4\nr = 0.3\ncolour = 1\n", // unknown key
            "kind = \"variance\"\nl = 4\n",                  // no test function
            "kind = \"normality\"\nl = [4, 5]\npsi = { family = \"bump\", s = 0.5, k = 4 }\n",
            "kind = \"variance\"\nl = 4\npsi = { family = \"bump\", s = 0.5, k = 2 }\n",
        ] {
            let err = ExperimentConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new(ExperimentKind::Variance);
        c.l = Some(Intensities::Grid(vec![20.0, 40.0]));
        c.psi = Some(PsiSpec::Bump { s: 0.7, k: 4 });
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
