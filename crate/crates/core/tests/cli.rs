use std::path::Path;
use std::process::{Command, Output};

fn hypergaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypergaf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bad_configs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    for text in [
        "kind = \"hole\"\nl = 4\n",
        "kind = \"hole\"\nl = 4\nr = 1.5\n",
        "kind = \"nonsense\"\n",
        "kind = \"hole\"\nl = [4, 8]\nr = 0.3\nextra = true\n",
        "this is not toml",
    ] {
        let cfg = write_config(tmp.path(), text);
        let o = hypergaf(&["run", "--config", &cfg, "--out", out]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{text}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = hypergaf(&["run", "--config", "/nonexistent/run.toml", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new(out).exists());
}

#[test]
fn run_needs_an_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "kind = \"intensity\"\nl = 20\nr = 0.5\ntrials = 10\n",
    );
    let o = hypergaf(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plotdata_without_a_run_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hypergaf(&["plotdata", "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert_ne!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn run_then_plotdata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("hole");
    let cfg = write_config(
        tmp.path(),
        "kind = \"hole\"\nl = [4, 8]\nr = 0.3\ntrials = 200\ncertificates = true\n",
    );
    let o = hypergaf(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["kind"], "hole");
    for f in [
        "trials.csv",
        "summary.json",
        "manifest.json",
        "plot.csv",
        "plot_certificate.csv",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["workers"], 2);

    std::fs::remove_file(out.join("plot.csv")).unwrap();
    let o = hypergaf(&["plotdata", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("plot.csv").is_file());
}

#[test]
fn selfcheck_passes() {
    let o = hypergaf(&["selfcheck", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains(", 0 failed"), "{text}");
}
