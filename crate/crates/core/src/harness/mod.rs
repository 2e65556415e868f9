//! Declarative experiments: TOML configs in, trial tables, summaries, plot files and
//! checksummed manifests out.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Intensities, PsiSpec, Quadrature};
pub use plot::{emit_plotdata, CERTIFICATE_PLOT_FILE};
pub use run::{
    fmt_f64, run, sha256_hex, CsvTable, RunOutcome, MANIFEST_FILE, PLOT_FILE, SUMMARY_FILE,
    TRIALS_FILE, ZEROS_FILE,
};
