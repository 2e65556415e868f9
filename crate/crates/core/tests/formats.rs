use hypergaf::gaf::{read_coefficients_csv, sample};
use hypergaf::harness::{
    emit_plotdata, run, ExperimentConfig, ExperimentKind, Intensities, PsiSpec, Quadrature,
    MANIFEST_FILE, PLOT_FILE, SUMMARY_FILE, TRIALS_FILE, ZEROS_FILE,
};
use std::path::Path;

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn config(kind: ExperimentKind, ls: &[f64]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.l = Some(if ls.len() == 1 {
        Intensities::One(ls[0])
    } else {
        Intensities::Grid(ls.to_vec())
    });
    c.trials = 100;
    c.seed = 11;
    c
}

#[test]
fn plot_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let mollified = PsiSpec::Mollified { s: 0.5, eta: 0.1 };
    let mut cases = Vec::new();

    let mut c = config(ExperimentKind::Intensity, &[10.0]);
    c.r = Some(0.5);
    cases.push((c, "trial,count,certified", "L,r,mean,ci_lo,ci_hi,expected"));

    let mut c = config(ExperimentKind::Hole, &[4.0, 8.0]);
    c.r = Some(0.3);
    cases.push((
        c,
        "l,trial,verdict,margin",
        "L,L^{n+1},p_hat,ci_lo,ci_hi,log_p",
    ));

    let mut c = config(ExperimentKind::LargeDev, &[5.0, 10.0]);
    c.psi = Some(mollified);
    c.delta = Some(0.5);
    c.quadrature = Quadrature::Coarse;
    cases.push((
        c,
        "l,trial,fluctuation,exceeds",
        "L,L^{n+1},p_hat,ci_lo,ci_hi,log_p",
    ));

    let mut c = config(ExperimentKind::Variance, &[10.0, 20.0]);
    c.psi = Some(PsiSpec::Bump { s: 0.7, k: 4 });
    c.trials = 20;
    cases.push((
        c,
        "l,trial,i_value,fluctuation,quad_error,refined_circles",
        "L,L_times_var,asymptote",
    ));

    let mut c = config(ExperimentKind::Normality, &[20.0]);
    c.psi = Some(mollified);
    cases.push((
        c,
        "l,trial,i_value,fluctuation,quad_error,refined_circles",
        "rank,normal_quantile,standardised",
    ));

    let mut c = config(ExperimentKind::Certificate, &[4.0]);
    c.r = Some(0.3);
    c.trials = 20;
    cases.push((
        c,
        "l,trial,hole,min_modulus",
        "L,c,certificate_log_p,holes,min_modulus",
    ));

    for (cfg, trials_header, plot_header) in cases {
        let dir = tmp.path().join(cfg.kind.name());
        let out = run(&cfg, &dir).unwrap_or_else(|e| panic!("{}: {e}", cfg.kind.name()));
        assert_eq!(
            header(&dir.join(TRIALS_FILE)),
            trials_header,
            "{}",
            cfg.kind.name()
        );
        assert_eq!(
            header(&dir.join(PLOT_FILE)),
            plot_header,
            "{}",
            cfg.kind.name()
        );
        let rows = std::fs::read_to_string(dir.join(TRIALS_FILE))
            .unwrap()
            .lines()
            .count()
            - 1;
        assert_eq!(
            rows as u64,
            cfg.trials * cfg.intensities().len() as u64,
            "{}",
            cfg.kind.name()
        );
        assert!(out.checksums.contains_key(SUMMARY_FILE));
        assert!(dir.join(MANIFEST_FILE).is_file());
    }

    let zeros = std::fs::read_to_string(tmp.path().join("intensity").join(ZEROS_FILE)).unwrap();
    assert_eq!(zeros.lines().count(), 100);
    for line in zeros.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["trial"].is_u64() && v["count"].is_u64() && v["certainty"].is_string());
    }
}

#[test]
fn numbers_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::LargeDev, &[5.0]);
    c.psi = Some(PsiSpec::Mollified { s: 0.5, eta: 0.1 });
    c.delta = Some(0.5);
    c.trials = 5;
    run(&c, tmp.path()).unwrap();
    let text = std::fs::read_to_string(tmp.path().join(TRIALS_FILE)).unwrap();
    let field = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .to_string();
    let mantissa = field
        .split('e')
        .next()
        .unwrap()
        .trim_start_matches('-')
        .replace('.', "");
    assert_eq!(mantissa.len(), 17, "{field}");
    let x: f64 = field.parse().unwrap();
    assert_eq!(format!("{x:.16e}"), field);
}

#[test]
fn rerun_reproduces_data_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Hole, &[4.0, 8.0, 12.0]);
    c.r = Some(0.3);
    c.trials = 300;
    c.certificates = true;
    let a = run(&c, &tmp.path().join("a")).unwrap();
    c.workers = 3;
    let b = run(&c, &tmp.path().join("b")).unwrap();
    assert_eq!(a.checksums, b.checksums);
    let hash = |d: &str| {
        let m: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(tmp.path().join(d).join(MANIFEST_FILE)).unwrap(),
        )
        .unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash("a"), hash("b"));

    c.seed += 1;
    let other = run(&c, &tmp.path().join("c")).unwrap();
    assert_ne!(other.checksums[TRIALS_FILE], a.checksums[TRIALS_FILE]);
}

#[test]
fn plotdata_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Hole, &[4.0, 8.0]);
    c.r = Some(0.3);
    run(&c, tmp.path()).unwrap();
    let before = std::fs::read(tmp.path().join(PLOT_FILE)).unwrap();
    emit_plotdata(tmp.path()).unwrap();
    assert_eq!(std::fs::read(tmp.path().join(PLOT_FILE)).unwrap(), before);
}

#[test]
fn missing_run_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let err = emit_plotdata(tmp.path()).unwrap_err();
    assert_ne!(err.exit_code(), 0);
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn coefficient_dump_round_trip() {
    let s = sample(2, 3.5, 6, 9, 4).unwrap();
    let mut buf = Vec::new();
    s.write_coefficients_csv(&mut buf).unwrap();
    let dump = read_coefficients_csv(buf.as_slice()).unwrap();
    assert_eq!((dump.n, dump.degree, dump.seed, dump.trial), (2, 6, 9, 4));
    assert_eq!(dump.l, 3.5);
    let flat: Vec<_> = (0..=6).flat_map(|m| s.layer(m).to_vec()).collect();
    assert_eq!(dump.coeffs, flat);
}
