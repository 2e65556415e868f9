//! `hypergaf run | selfcheck | plotdata`.

use clap::{Parser, Subcommand};
use hypergaf::harness::{emit_plotdata, run, ExperimentConfig, ExperimentKind};
use hypergaf::stats::{identity_suite, invariant_suite, IdentityStatus};
use hypergaf::{GafError, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "hypergaf", version, about = "Hyperbolic GAF experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity and invariant suites; exit status 0 when every check passes.
    Selfcheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the usual run files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild plot files for a finished run.
    Plotdata {
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let dir = out.or_else(|| cfg.out.clone()).ok_or_else(|| {
                GafError::Config("no output directory: pass --out or set `out`".into())
            })?;
            let outcome = run(&cfg, &dir)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            eprintln!("wrote {}", outcome.dir.display());
            Ok(())
        }
        Command::Selfcheck { seed, workers, out } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Selfcheck);
            cfg.seed = seed.unwrap_or(0);
            cfg.workers = workers.unwrap_or(0);
            if let Some(dir) = out {
                run(&cfg, &dir)?;
                eprintln!("selfcheck passed, files in {}", dir.display());
                return Ok(());
            }
            let mut reports = identity_suite(cfg.seed)?;
            reports.extend(invariant_suite(cfg.seed)?);
            let mut failed = 0;
            for r in &reports {
                let tag = match r.status {
                    IdentityStatus::Pass => "pass",
                    IdentityStatus::Measured => "measured",
                    IdentityStatus::Fail => {
                        failed += 1;
                        "FAIL"
                    }
                };
                println!(
                    "{tag:8} {:40} discrepancy {:.3e} (tol {:.1e})",
                    r.label(),
                    r.discrepancy,
                    r.tolerance
                );
            }
            println!("{} checks, {failed} failed", reports.len());
            if failed > 0 {
                return Err(GafError::Numeric(format!("{failed} checks failed")));
            }
            Ok(())
        }
        Command::Plotdata { out } => {
            for p in emit_plotdata(&out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = execute(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
