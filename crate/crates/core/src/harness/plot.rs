//! Tidy plot files derived from a finished run directory.
//!
//! | kind | columns |
//! |---|---|
//! | hole, large-dev | `L,L^{n+1},p_hat,ci_lo,ci_hi,log_p` |
//! | hole with certificates | also `plot_certificate.csv`: `L,c,certificate_log_p,empirical_ceiling,below` |
//! | variance | `L,L_times_var,asymptote` (`L_times_var` is `Lⁿ Var`) |
//! | normality | `rank,normal_quantile,standardised` |
//! | intensity | `L,r,mean,ci_lo,ci_hi,expected` |
//! | certificate | `L,c,certificate_log_p,holes,min_modulus` |
//! | selfcheck | `check,discrepancy,tolerance` |

use super::run::{fmt_f64, CsvTable, PLOT_FILE, SUMMARY_FILE, TRIALS_FILE};
use crate::error::{GafError, Result};
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Normal};
use std::path::{Path, PathBuf};

pub const CERTIFICATE_PLOT_FILE: &str = "plot_certificate.csv";

fn missing(what: &str) -> GafError {
    GafError::MissingRun(what.to_string())
}

fn num(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| missing(&format!("summary field `{key}`")))
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn decay_table(summary: &Value) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["L", "L^{n+1}", "p_hat", "ci_lo", "ci_hi", "log_p"]);
    let points = summary["curve"]["points"]
        .as_array()
        .ok_or_else(|| missing("summary field `curve.points`"))?;
    for p in points {
        let p_hat = num(p, "p_hat")?;
        t.row(&[
            f(num(p, "l")?),
            f(num(p, "x")?),
            f(p_hat),
            f(num(p, "ci_lo")?),
            f(num(p, "ci_hi")?),
            f(p_hat.ln()),
        ]);
    }
    Ok(t)
}

fn read_trials(dir: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(dir.join(TRIALS_FILE)).map_err(|_| missing(TRIALS_FILE))?;
    Ok(text
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect())
}

/// Write the plot files for the run in `dir` and return their paths. Nothing is written
/// unless every file can be built.
pub fn emit_plotdata(dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(dir.join(SUMMARY_FILE))
        .map_err(|_| missing(&format!("no {SUMMARY_FILE} in {}", dir.display())))?;
    let summary: Value = serde_json::from_str(&text)?;
    let kind = summary["kind"]
        .as_str()
        .ok_or_else(|| missing("summary field `kind`"))?;
    let mut tables: Vec<(&str, CsvTable)> = Vec::new();
    match kind {
        "hole" | "large-dev" => {
            tables.push((PLOT_FILE, decay_table(&summary)?));
            if let Some(certs) = summary["certificates"].as_array().filter(|c| !c.is_empty()) {
                let mut t =
                    CsvTable::new(&["L", "c", "certificate_log_p", "empirical_ceiling", "below"]);
                for c in certs {
                    t.row(&[
                        f(num(c, "l")?),
                        f(num(c, "c")?),
                        f(num(&c["log_probability"], "total")?),
                        f(num(c, "empirical_ceiling")?),
                        c["below"].as_bool().unwrap_or(false).to_string(),
                    ]);
                }
                tables.push((CERTIFICATE_PLOT_FILE, t));
            }
        }
        "variance" => {
            let mut t = CsvTable::new(&["L", "L_times_var", "asymptote"]);
            for p in summary["points"]
                .as_array()
                .ok_or_else(|| missing("summary field `points`"))?
            {
                t.row(&[
                    f(num(p, "l")?),
                    f(num(p, "l_pow_n_variance")?),
                    f(num(p, "asymptote")?),
                ]);
            }
            tables.push((PLOT_FILE, t));
        }
        "normality" => {
            let scale = num(&summary, "variance_quad")?.sqrt();
            let mut xs: Vec<f64> = read_trials(dir)?
                .iter()
                .map(|row| {
                    row.get(3)
                        .and_then(|v| v.parse::<f64>().ok())
                        .map(|x| x / scale)
                })
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| missing("fluctuation column in trials.csv"))?;
            if xs.is_empty() {
                return Err(missing("trials.csv has no rows"));
            }
            xs.sort_by(f64::total_cmp);
            let normal = Normal::standard();
            let count = xs.len() as f64;
            let mut t = CsvTable::new(&["rank", "normal_quantile", "standardised"]);
            for (i, x) in xs.iter().enumerate() {
                let q = normal.inverse_cdf((i as f64 + 0.5) / count);
                t.row(&[i.to_string(), f(q), f(*x)]);
            }
            tables.push((PLOT_FILE, t));
        }
        "intensity" => {
            let (mean, se) = (num(&summary, "mean")?, num(&summary, "se")?);
            let mut t = CsvTable::new(&["L", "r", "mean", "ci_lo", "ci_hi", "expected"]);
            t.row(&[
                f(num(&summary, "l")?),
                f(num(&summary, "r")?),
                f(mean),
                f(mean - 1.96 * se),
                f(mean + 1.96 * se),
                f(num(&summary, "expected")?),
            ]);
            tables.push((PLOT_FILE, t));
        }
        "certificate" => {
            let mut t = CsvTable::new(&["L", "c", "certificate_log_p", "holes", "min_modulus"]);
            for p in summary["points"]
                .as_array()
                .ok_or_else(|| missing("summary field `points`"))?
            {
                t.row(&[
                    f(num(p, "l")?),
                    f(num(p, "c")?),
                    f(num(&p["log_probability"], "total")?),
                    p["holes"].to_string(),
                    f(p["min_modulus"].as_f64().unwrap_or(f64::NAN)),
                ]);
            }
            tables.push((PLOT_FILE, t));
        }
        "selfcheck" => {
            let mut t = CsvTable::new(&["check", "discrepancy", "tolerance"]);
            for row in read_trials(dir)? {
                if row.len() < 6 {
                    return Err(missing("selfcheck rows in trials.csv"));
                }
                t.row(&[row[0].clone(), row[4].clone(), row[5].clone()]);
            }
            tables.push((PLOT_FILE, t));
        }
        other => return Err(GafError::Config(format!("unknown run kind `{other}`"))),
    }
    let mut written = Vec::new();
    for (name, table) in tables {
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, table.into_bytes())?;
        std::fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}
