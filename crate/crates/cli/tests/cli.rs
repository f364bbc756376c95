use hifie::FactorScheme;
use hifie_cli::{
    emit_report, run_experiment, write_report, CliError, CustomConfig, Example, ExperimentConfig, Format, Oracle,
    ReportRow,
};

fn config(example: Example, n: &[usize], eps: f64, schemes: &[FactorScheme]) -> ExperimentConfig {
    ExperimentConfig {
        example,
        n: n.to_vec(),
        eps,
        schemes: schemes.to_vec(),
        seed: 11,
        occupancy: Some(16),
        ..ExperimentConfig::default()
    }
}

fn sample_row(scheme: &str, n: usize) -> ReportRow {
    ReportRow {
        scheme: scheme.into(),
        n,
        eps: 1e-6,
        s_l: 10,
        t_f: 0.5,
        m_f: 1024,
        t_a: 0.01,
        t_s: 0.01,
        e_a: Some(1e-7),
        e_s: None,
        n_i: Some(3),
        peak_memory: None,
    }
}

fn csv_string(rows: &[ReportRow]) -> String {
    let mut buf = Vec::new();
    write_report(rows, Format::Csv, &ExperimentConfig::default(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn one_row_csv_has_header_and_one_line() {
    let text = csv_string(&[sample_row("hifie", 4096)]);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "scheme,N,eps,s_L,t_f,m_f,t_a,t_s,e_a,e_s,n_i,peak_memory");
    assert!(lines[1].starts_with("hifie,4096,"));
}

#[test]
fn empty_report_is_an_error() {
    let mut buf = Vec::new();
    let err = write_report(&[], Format::Json, &ExperimentConfig::default(), &mut buf).unwrap_err();
    assert!(matches!(err, CliError::EmptyReport));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    assert!(emit_report(&[], Format::Csv, &ExperimentConfig::default(), &path).is_err());
    assert!(!path.exists());
}

#[test]
fn json_report_echoes_config_and_version() {
    let cfg = config(Example::Ex2, &[32], 1e-4, &[FactorScheme::HifieX]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/out.json");
    emit_report(&[sample_row("hifie_x", 1024)], Format::Json, &cfg, &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["version"], hifie::VERSION);
    assert_eq!(v["config"]["example"], "ex2");
    assert_eq!(v["config"]["schemes"][0], "hifie_x");
    assert_eq!(v["rows"][0]["N"], 1024);
    assert!(v["rows"][0]["e_s"].is_null());
}

#[test]
fn rows_are_scheme_major() {
    let mut cfg = config(Example::Ex1, &[16, 32], 1e-3, &[FactorScheme::Rskelf, FactorScheme::Hifie]);
    cfg.oracle = Oracle::None;
    let rows = run_experiment(&cfg).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.scheme.as_str(), r.n)).collect();
    assert_eq!(keys, [("rskelf", 256), ("rskelf", 1024), ("hifie", 256), ("hifie", 1024)]);
    assert!(rows.iter().all(|r| r.e_a.is_none() && r.n_i.is_none()));
    assert!(rows.iter().all(|r| r.t_f >= 0.0 && r.m_f > 0 && r.s_l > 0));
    let text = csv_string(&rows);
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn identity_problem() {
    let mut cfg = config(Example::Custom, &[16], 1e-6, &[FactorScheme::Hifie]);
    cfg.custom = CustomConfig {
        dim: 2,
        a: 1.0,
        b: 0.0,
        c: 0.0,
    };
    cfg.oracle = Oracle::Dense;
    let rows = run_experiment(&cfg).unwrap();
    assert!(rows[0].e_a.unwrap() <= 1e-14);
    assert_eq!(rows[0].n_i, Some(1));
}

#[test]
fn ex1_hifie_accuracy_and_iterations() {
    let mut cfg = config(Example::Ex1, &[64], 1e-6, &[FactorScheme::Hifie]);
    cfg.occupancy = None;
    cfg.oracle = Oracle::Dense;
    let row = &run_experiment(&cfg).unwrap()[0];
    assert!(row.e_a.unwrap() <= 1e-5, "e_a = {:?}", row.e_a);
    assert!(row.n_i.unwrap() <= 4, "n_i = {:?}", row.n_i);
}

#[test]
fn ex2_second_kind_variant_is_more_accurate() {
    let cfg = config(Example::Ex2, &[32], 1e-6, &[FactorScheme::Hifie, FactorScheme::HifieX]);
    let rows = run_experiment(&cfg).unwrap();
    assert!(rows[1].e_a.unwrap() < rows[0].e_a.unwrap());
}

#[test]
fn reruns_are_reproducible() {
    let cfg = config(Example::Ex3, &[16], 1e-5, &[FactorScheme::HifieX]);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.s_l, x.e_a, x.e_s, x.n_i), (y.s_l, y.e_a, y.e_s, y.n_i));
    }
}

#[test]
fn config_file_round_trip_and_validation() {
    let text = r#"
        example = "ex5"
        n = 8
        eps = 1e-3
        scheme = "hifie-x"
        skip = ["1/2"]
        oracle = "none"
        format = "json"

        [custom]
        dim = 3
    "#;
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    assert_eq!(cfg.n, [8]);
    assert_eq!(cfg.schemes, [FactorScheme::HifieX]);
    assert_eq!(cfg.format, Format::Json);
    assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);

    assert!(ExperimentConfig::from_toml_str("nn = 3").is_err());
    assert!(ExperimentConfig::from_toml_str("scheme = \"lu\"").is_err());
    let mut bad = cfg.clone();
    bad.eps = 0.0;
    assert!(bad.validate().is_err());
    bad.eps = 1e-3;
    bad.skip = vec!["x".into()];
    assert!(bad.validate().is_err());
}

#[test]
fn module_errors_carry_context() {
    let mut cfg = config(Example::Ex1, &[16], 1e-3, &[FactorScheme::Hifie]);
    cfg.skip = vec!["1".into()];
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, CliError::Module { .. }));
    assert!(err.to_string().contains("ex1 n = 16"), "{err}");
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.format = Format::Json;
    std::env::set_var(hifie_cli::OUT_DIR_ENV, dir.path());
    assert_eq!(cfg.output_path(), Some(dir.path().join("ex1.json")));
    cfg.out = Some("x.csv".into());
    assert_eq!(cfg.output_path(), Some("x.csv".into()));
    std::env::remove_var(hifie_cli::OUT_DIR_ENV);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hifie");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let ok = std::process::Command::new(bin)
        .args(["--example", "ex1", "--n", "16", "--eps", "1e-3", "--scheme", "rskelf,hifie", "--oracle", "fft"])
        .args(["--occupancy", "16", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(ok.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);

    let bad = std::process::Command::new(bin)
        .args(["--example", "ex1", "--n", "16", "--eps", "2"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("eps"));
}
