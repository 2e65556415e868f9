//! Running a declarative experiment from code and reading its outputs back.
//!
//! cargo run --release --example experiment_config

use hypergaf::harness::{run, ExperimentConfig, PLOT_FILE};

fn main() -> hypergaf::Result<()> {
    let cfg = ExperimentConfig::from_toml(
        r#"
kind = "hole"
n = 1
l = [4, 8, 12]
r = 0.3
trials = 20000
seed = 1
certificates = true
"#,
    )?;
    let dir = std::env::temp_dir().join("hypergaf-example-hole");
    let outcome = run(&cfg, &dir)?;
    for (name, sum) in &outcome.checksums {
        println!("{name:>22}  {sum}");
    }
    print!("{}", std::fs::read_to_string(dir.join(PLOT_FILE))?);
    Ok(())
}
