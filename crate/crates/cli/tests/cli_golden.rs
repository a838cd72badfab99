//! Golden-file and exit-code tests driving the actual binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_copimp"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

struct TinyCase {
    dir: tempfile::TempDir,
}

impl TinyCase {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = "\
site,age,score,ms
a,31.5,1,x
a,,0,y
a,12,1,z
a,47,0,x
b,29,1,
b,55,,y
b,33,1,z
b,,0,x
b,41,1,y
b,38,0,z
";
        let schema = r#"{"cluster":"site","columns":[
            {"name":"age","kind":"continuous"},
            {"name":"score","kind":"binary"},
            {"name":"ms","kind":"nominal","levels":["x","y","z"]}]}"#;
        fs::write(dir.path().join("data.csv"), data).unwrap();
        fs::write(dir.path().join("schema.json"), schema).unwrap();
        TinyCase { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

#[test]
fn version_flag_works() {
    let out = run_ok(&["--version"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")), "{text}");
}

#[test]
fn usage_error_exits_2() {
    // Missing required --schema.
    let out = bin().args(["impute", "--data", "x.csv", "--out", "y"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("--schema"), "{text}");

    let out = bin().arg("not-a-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_error_exits_1_with_context() {
    let case = TinyCase::new();
    let out = bin()
        .args([
            "impute",
            "--data",
            &case.s("nope.csv"),
            "--schema",
            &case.s("schema.json"),
            "--out",
            &case.s("out"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("error:"), "{text}");
    assert!(text.contains("nope.csv"), "{text}");
}

#[test]
fn bad_cell_reports_row_and_column() {
    let case = TinyCase::new();
    fs::write(case.path("bad.csv"), "site,age,score,ms\na,oops,1,x\na,2,0,y\n").unwrap();
    let out = bin()
        .args([
            "impute",
            "--data",
            &case.s("bad.csv"),
            "--schema",
            &case.s("schema.json"),
            "--out",
            &case.s("out"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("row 2"), "{text}");
    assert!(text.contains("age"), "{text}");
}

#[test]
fn simulate_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let make_args = |out: &str| {
        vec![
            "simulate".to_string(),
            "--clusters".into(),
            "4".into(),
            "--size".into(),
            "25".into(),
            "--rho".into(),
            "1.0".into(),
            "--missing".into(),
            "0.2".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            dir.path().join(out).display().to_string(),
        ]
    };
    let a: Vec<String> = make_args("a");
    let b: Vec<String> = make_args("b");
    run_ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    run_ok(&b.iter().map(String::as_str).collect::<Vec<_>>());
    for f in ["truth.csv", "observed.csv", "mask.csv", "truth-params.json", "schema.json"] {
        assert_eq!(
            read(&dir.path().join("a").join(f)),
            read(&dir.path().join("b").join(f)),
            "{f} differs between identical runs"
        );
    }
    // X5 complete, others partially missing.
    let mask = fs::read_to_string(dir.path().join("a/mask.csv")).unwrap();
    let lines: Vec<&str> = mask.lines().collect();
    assert_eq!(lines[0], "X1,X2,X3,X4,X5");
    assert_eq!(lines.len(), 101);
    assert!(lines[1..].iter().all(|l| l.ends_with(",1")));
    assert!(mask.contains('0'));
}

#[test]
fn impute_writes_complete_files_and_manifest() {
    let case = TinyCase::new();
    run_ok(&[
        "impute",
        "--data",
        &case.s("data.csv"),
        "--schema",
        &case.s("schema.json"),
        "--m",
        "3",
        "--burnin",
        "20",
        "--iter-thin",
        "5",
        "--seed",
        "5",
        "--out",
        &case.s("imp"),
    ]);
    for k in 1..=3 {
        let text = fs::read_to_string(case.path(&format!("imp/imp_00{k}.csv"))).unwrap();
        assert!(text.starts_with("site,age,score,ms\n"));
        for line in text.lines().skip(1) {
            assert!(!line.split(',').any(|cell| cell.is_empty()), "empty cell in: {line}");
        }
        assert_eq!(text.lines().count(), 11);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(case.path("imp/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "impute");
    assert_eq!(manifest["config"]["m"], 3);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|v| v == "trace.csv"));
    let trace = fs::read_to_string(case.path("imp/trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,parameter,value\n"));
}

#[test]
fn impute_rerun_is_byte_identical() {
    let case = TinyCase::new();
    for out in ["r1", "r2"] {
        run_ok(&[
            "impute",
            "--data",
            &case.s("data.csv"),
            "--schema",
            &case.s("schema.json"),
            "--m",
            "2",
            "--burnin",
            "15",
            "--iter-thin",
            "3",
            "--seed",
            "21",
            "--out",
            &case.s(out),
        ]);
    }
    for f in ["imp_001.csv", "imp_002.csv", "trace.csv"] {
        assert_eq!(read(&case.path("r1").join(f)), read(&case.path("r2").join(f)), "{f}");
    }
}

#[test]
fn impute_config_file_precedence() {
    let case = TinyCase::new();
    fs::write(case.path("cfg.json"), r#"{"m": 2, "burnin": 15, "iter_thin": 3, "seed": 77}"#)
        .unwrap();
    // Flag --m 4 overrides the config's m = 2; everything else comes from
    // the file.
    run_ok(&[
        "impute",
        "--data",
        &case.s("data.csv"),
        "--schema",
        &case.s("schema.json"),
        "--config",
        &case.s("cfg.json"),
        "--m",
        "4",
        "--out",
        &case.s("cfgout"),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(case.path("cfgout/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["m"], 4);
    assert_eq!(manifest["config"]["burnin"], 15);
    assert_eq!(manifest["config"]["seed"], 77);
    assert!(case.path("cfgout/imp_004.csv").exists());
}

#[test]
fn impute_multi_chain_merges_deterministically() {
    let case = TinyCase::new();
    for out in ["c1", "c2"] {
        run_ok(&[
            "impute",
            "--data",
            &case.s("data.csv"),
            "--schema",
            &case.s("schema.json"),
            "--m",
            "4",
            "--burnin",
            "15",
            "--iter-thin",
            "3",
            "--seed",
            "3",
            "--chains",
            "2",
            "--out",
            &case.s(out),
        ]);
    }
    for f in ["imp_001.csv", "imp_004.csv", "trace_c1.csv", "trace_c2.csv"] {
        assert_eq!(read(&case.path("c1").join(f)), read(&case.path("c2").join(f)), "{f}");
    }
}

#[test]
fn pool_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    fs::write(
        &est,
        "estimand,imputation_index,estimate,variance\n\
         mu,1,1,0.5\nmu,2,2,0.5\nmu,3,3,0.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(&["pool", "--estimates", &est.display().to_string(), "--out", &out.display().to_string()]);
    let text = fs::read_to_string(out.join("pooled.csv")).unwrap();
    assert_eq!(
        text,
        "estimand,m,q_bar,B,W_bar,T,df\nmu,3,2,1,0.5,1.8333333333333333,3.78125\n"
    );
}

#[test]
fn metrics_and_diagnose_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).display().to_string();
    run_ok(&[
        "simulate", "--clusters", "5", "--size", "30", "--rho", "1.0", "--missing", "0.25",
        "--seed", "12", "--out", &p("sim"),
    ]);
    run_ok(&[
        "impute",
        "--data", &p("sim/observed.csv"),
        "--schema", &p("sim/schema.json"),
        "--m", "4", "--burnin", "40", "--iter-thin", "8", "--seed", "2",
        "--out", &p("imp"),
    ]);
    run_ok(&[
        "metrics",
        "--truth", &p("sim/truth.csv"),
        "--schema", &p("sim/schema.json"),
        "--mask", &p("sim/mask.csv"),
        "--imputed-dir", &p("imp"),
        "--seed", "8",
        "--out", &p("met"),
    ]);
    let metrics = fs::read_to_string(dir.path().join("met/metrics.csv")).unwrap();
    assert!(metrics.starts_with("variable,method,metric,n_missing,value\n"));
    assert!(metrics.contains("X1,copula,euclidean"));
    assert!(metrics.contains("X3,marginal_draw,misclassification"));
    let means = fs::read_to_string(dir.path().join("met/means.csv")).unwrap();
    assert!(means.starts_with(
        "variable,truth_mean,complete_case_mean,copula_pooled_mean,marginal_pooled_mean\n"
    ));

    run_ok(&[
        "diagnose",
        "--trace", &p("imp/trace.csv"),
        "--data", &p("sim/observed.csv"),
        "--schema", &p("sim/schema.json"),
        "--imputed-dir", &p("imp"),
        "--out", &p("diag"),
    ]);
    let rhat = fs::read_to_string(dir.path().join("diag/rhat.csv")).unwrap();
    assert!(rhat.starts_with("parameter,split_rhat\n"));
    assert!(rhat.contains("probit_exhausted"));
    assert!(dir.path().join("diag/overlay_continuous.csv").exists());
    assert!(dir.path().join("diag/overlay_categorical.csv").exists());
    for sub in ["sim", "imp", "met", "diag"] {
        assert!(dir.path().join(sub).join("manifest.json").exists(), "{sub} manifest");
    }
}
