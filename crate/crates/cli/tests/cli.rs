use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hiersparse_cli::config::{parse_json, FitConfig};
use hiersparse_cli::output::digest;
use hiersparse_core::solvers::soft_threshold;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hiersparse"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// Data rows of a table, comment lines and the header removed.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    reader.headers().unwrap().iter().map(str::to_string).collect()
}

fn comments(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().take_while(|l| l.starts_with('#')).map(str::to_string).collect()
}

const TOY: &str = "y,x1,x2\n1.0,0.5,2.0\n2.5,1.0,0.1\n-0.3,-0.7,0.2\n";

const REGRESSION: &str = "y,a,b,c,d\n\
    3.1,1.0,0.2,-0.5,0.3\n\
    -1.9,-0.8,0.1,0.4,-0.2\n\
    4.2,1.5,-0.3,0.1,0.9\n\
    0.4,0.1,0.8,-1.2,0.5\n\
    -2.7,-1.1,-0.6,0.3,-0.4\n\
    1.6,0.6,0.4,0.9,-1.0\n\
    -0.8,-0.2,-1.1,0.2,0.7\n\
    2.2,0.9,0.5,-0.7,0.1\n\
    -3.3,-1.4,0.2,0.6,-0.8\n\
    0.9,0.3,-0.9,-0.1,0.6\n";

#[test]
fn huge_weights_give_all_zero_coefficients() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", TOY);
    put(dir.path(), "c.json", r#"{"model":"linear","prior":{"a":1000,"b":1e-6}}"#);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("fit.csv");
    assert_eq!(header(&out), ["index", "name", "estimate", "weight_final", "in_support"]);
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    for (j, row) in r.iter().enumerate() {
        assert_eq!(row[0], (j + 1).to_string());
        assert_eq!(row[1], format!("x{}", j + 1));
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[4], "false");
    }
    assert!(dir.path().join("fit.csv.trace.csv").exists());
    assert!(dir.path().join("fit.csv.manifest.json").exists());
}

#[test]
fn nonpositive_scale_is_rejected() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", TOY);
    put(dir.path(), "c.json", r#"{"model":"linear","prior":{"a":2,"b":0}}"#);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("strictly positive"), "{}", stderr(&o));
}

#[test]
fn override_outside_the_dimension_is_rejected() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", TOY);
    put(dir.path(), "c.json", r#"{"model":"linear","prior":{"a":2,"b":0.1,"overrides":{"3":[2,2]}}}"#);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("override index 3"), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_give_located_diagnostics() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "ok.json", r#"{"model":"linear","prior":{"a":2,"b":0.1}}"#);
    put(dir.path(), "bad.csv", "y,x\n1,2\n3,oops\n");
    let o = run(&["fit", "--config", "ok.json", "--data", "bad.csv", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.csv:3:2"), "{}", stderr(&o));

    put(dir.path(), "d.csv", TOY);
    put(dir.path(), "bad.json", "{\n  \"model\": \"linear\",\n  \"prior\": {\"a\": 2, \"b\": }\n}");
    let o = run(&["fit", "--config", "bad.json", "--data", "d.csv", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.json:3:"), "{}", stderr(&o));

    put(dir.path(), "typo.json", r#"{"model":"linear","prior":{"a":2,"b":0.1},"solvr":{}}"#);
    let o = run(&["fit", "--config", "typo.json", "--data", "d.csv", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("solvr"));

    let o = run(&["fit", "--config", "missing.json", "--data", "d.csv", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 1);

    let o = run(&["fit", "--config", "ok.json", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 1);
    let o = run(&["frobnicate"], dir.path());
    assert_eq!(code(&o), 1);
    let o = run(&["--help"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn repeated_fits_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", REGRESSION);
    put(dir.path(), "c.json", r#"{"model":"linear","prior":{"a":2,"b":0.5},"noise":{"kind":"fixed","variance":0.5}}"#);
    let files = ["fit.csv", "fit.csv.trace.csv", "fit.csv.manifest.json"];
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first: Vec<Vec<u8>> = files.iter().map(|f| fs::read(dir.path().join(f)).unwrap()).collect();
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv", "--threads", "3"], dir.path());
    assert_eq!(code(&o), 0);
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(&fs::read(dir.path().join(f)).unwrap(), bytes, "{f}");
    }
    // something was selected, and the support column agrees with the estimates
    let r = rows(&dir.path().join("fit.csv"));
    assert!(r.iter().any(|row| row[4] == "true"));
    for row in &r {
        assert_eq!(row[4] == "true", row[2].parse::<f64>().unwrap() != 0.0);
    }
}

#[test]
fn coefficient_file_matches_the_library_fit_exactly() {
    let dir = TempDir::new().unwrap();
    let data = put(dir.path(), "d.csv", REGRESSION);
    let cfg_text = r#"{"model":"linear","prior":{"a":3,"b":1.0},"init":"least_squares"}"#;
    put(dir.path(), "c.json", cfg_text);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let cfg: FitConfig = parse_json(cfg_text, "c").unwrap();
    let table = hiersparse_cli::data::read_table(&data).unwrap();
    let problem = hiersparse_cli::commands::build_problem(&cfg, &table).unwrap();
    let fit = hiersparse_cli::commands::run_fit(&cfg, &problem).unwrap();
    let beta = fit.estimate.coefficients().unwrap();
    for (j, row) in rows(&dir.path().join("fit.csv")).iter().enumerate() {
        assert_eq!(row[2].parse::<f64>().unwrap(), beta[j] + 0.0);
    }
    let trace = rows(&dir.path().join("fit.csv.trace.csv"));
    assert_eq!(trace.len(), fit.objective_trace.len());
    for (row, v) in trace.iter().zip(&fit.objective_trace) {
        assert_eq!(row[1].parse::<f64>().unwrap(), *v);
    }
}

#[test]
fn capped_fit_exits_two_with_outputs() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", REGRESSION);
    put(dir.path(), "c.json", r#"{"model":"linear","prior":{"a":2,"b":0.5},"solver":{"outer_max_iter":1}}"#);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv"], dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
    assert_eq!(rows(&dir.path().join("fit.csv")).len(), 4);
    assert!(dir.path().join("fit.csv.manifest.json").exists());
}

#[test]
fn manifest_digest_is_recomputable_and_headers_carry_it() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", REGRESSION);
    let text = r#"{"model":"linear","prior":{"a":2,"b":0.5},"seed":5}"#;
    put(dir.path(), "c.json", text);
    let o = run(&["fit", "--config", "c.json", "--data", "d.csv", "--out", "fit.csv", "--seed", "9"], dir.path());
    assert_eq!(code(&o), 0);
    let mut cfg: FitConfig = parse_json(text, "c").unwrap();
    cfg.seed = 9;
    let want = digest(&cfg).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_digest"], want.as_str());
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["command"], "fit");
    assert_eq!(manifest["outputs"], serde_json::json!(["fit.csv", "fit.csv.trace.csv"]));
    for f in ["fit.csv", "fit.csv.trace.csv"] {
        let c = comments(&dir.path().join(f));
        assert!(c.contains(&format!("# config_digest: sha256:{want}")), "{f}: {c:?}");
        assert!(c.contains(&"# seed: 9".to_string()));
        assert!(c.iter().any(|l| l.starts_with("# generator: chacha20")));
    }
}

#[test]
fn grouped_logistic_and_precision_fits_run() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "d.csv", REGRESSION);
    put(dir.path(), "g.json", r#"{"model":"linear","prior":{"a":2,"b":0.5,"groups":[[1,2],[3,4]]}}"#);
    let o = run(&["fit", "--config", "g.json", "--data", "d.csv", "--out", "g.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("g.csv"));
    assert_eq!(r.len(), 4);
    // members of a group share the weight
    assert_eq!(r[0][3], r[1][3]);
    assert_eq!(r[2][3], r[3][3]);

    put(dir.path(), "bad.json", r#"{"model":"linear","prior":{"a":2,"b":0.5,"groups":[[1,2],[2,3,4]]}}"#);
    let o = run(&["fit", "--config", "bad.json", "--data", "d.csv", "--out", "g.csv"], dir.path());
    assert_eq!(code(&o), 1);

    let labels = "y,a,b\n1,0.5,-0.2\n-1,-0.7,0.1\n1,1.2,0.4\n-1,-0.3,-0.9\n1,0.8,0.3\n-1,-1.1,0.6\n1,0.2,-0.5\n-1,0.1,0.2\n";
    put(dir.path(), "l.csv", labels);
    put(dir.path(), "l.json", r#"{"model":"logistic","prior":{"a":2,"b":1},"jeffreys":true}"#);
    let o = run(&["fit", "--config", "l.json", "--data", "l.csv", "--out", "l.out"], dir.path());
    assert!(matches!(code(&o), 0 | 2), "{}", stderr(&o));
    assert_eq!(rows(&dir.path().join("l.out")).len(), 2);
    // labels outside {-1, +1}
    let o = run(&["fit", "--config", "l.json", "--data", "d.csv", "--out", "l.out"], dir.path());
    assert_eq!(code(&o), 1);

    put(dir.path(), "p.json", r#"{"model":"precision","prior":{"a":1,"b":0.1}}"#);
    let o = run(&["fit", "--config", "p.json", "--data", "d.csv", "--out", "p.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("p.csv"));
    // 5 variables, packed upper triangle
    assert_eq!(r.len(), 15);
    assert_eq!(r[0][1], "y:y");
    assert_eq!(r[1][1], "y:a");
    assert_eq!(r[0][4], "true");
}

#[test]
fn simulate_preset_emits_one_row_per_setting() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "s.json", r#"{"preset":"hal-linear-delta1","seed":11}"#);
    let o = run(&["simulate", "--config", "s.json", "--out", "s.csv", "--reps", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("s.csv");
    assert_eq!(header(&out), ["n", "setting", "avg_error", "pct_correct", "avg_fp", "avg_fn", "nonconverged", "R", "seed"]);
    let r = rows(&out);
    assert_eq!(r.len(), 6);
    let settings: Vec<(&str, &str)> = r.iter().map(|row| (row[0].as_str(), row[1].as_str())).collect();
    assert_eq!(
        settings,
        [("40", "(1,0.1)"), ("40", "(2,0.1)"), ("40", "(2,0.05)"), ("80", "(1,0.1)"), ("80", "(2,0.1)"), ("80", "(2,0.05)")]
    );
    for row in &r {
        assert_eq!(row[7], "3");
        assert_eq!(row[8], "11");
        let pct: f64 = row[3].parse().unwrap();
        assert!((0.0..=100.0).contains(&pct));
    }
}

#[test]
fn single_replication_smoke_config() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"label":"smoke","model":"linear","n":30,"beta":[2,0,-1],"noise":{"kind":"fixed","delta":1},
                 "method":{"kind":"hierarchical","a":2,"b":0.1},"reps":1,"seed":2}"#;
    put(dir.path(), "one.json", cfg);
    let o = run(&["simulate", "--config", "one.json", "--out", "one.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("one.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!((r[0][0].as_str(), r[0][1].as_str(), r[0][7].as_str(), r[0][8].as_str()), ("30", "smoke", "1", "2"));

    // reps missing entirely is a validation error
    put(dir.path(), "zero.json", &cfg.replace("\"reps\":1,", ""));
    let o = run(&["simulate", "--config", "zero.json", "--out", "z.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("reps"));
}

#[test]
fn simulate_twice_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "s.json", r#"{"preset":"hal-ggm","reps":4}"#);
    let a = run(&["simulate", "--config", "s.json", "--out", "a.csv", "--seed", "7"], dir.path());
    let b = run(&["simulate", "--config", "s.json", "--out", "b.csv", "--seed", "7", "--threads", "1"], dir.path());
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
    let c = run(&["simulate", "--config", "s.json", "--out", "c.csv", "--seed", "8"], dir.path());
    assert_eq!(code(&c), 0);
    assert_ne!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn unknown_preset_lists_the_available_ones() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "s.json", r#"{"preset":"table-99"}"#);
    let o = run(&["simulate", "--config", "s.json", "--out", "s.csv"], dir.path());
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(msg.contains("table-99") && msg.contains("hal-linear-delta1") && msg.contains("lasso-ggm"), "{msg}");
}

#[test]
fn threshold_curve_for_the_lasso_is_the_soft_threshold() {
    let dir = TempDir::new().unwrap();
    put(
        dir.path(),
        "c.json",
        r#"{"kind":"threshold","prior":{"family":"lasso","weight":1},"grid":{"start":-3,"stop":3,"points":7}}"#,
    );
    let o = run(&["curves", "--config", "c.json", "--out", "t.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("t.csv");
    assert_eq!(header(&out), ["z", "beta_hat"]);
    let r = rows(&out);
    assert_eq!(r.len(), 7);
    for (k, row) in r.iter().enumerate() {
        let z: f64 = row[0].parse().unwrap();
        assert_eq!(z, k as f64 - 3.0);
        assert_eq!(row[1].parse::<f64>().unwrap(), soft_threshold(z, 1.0));
    }
}

#[test]
fn contour_origin_value() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (2.0_f64, 0.1_f64);
    put(
        dir.path(),
        "c.json",
        r#"{"kind":"contour","prior":{"family":"hal","a":2,"b":0.1},"grid":{"start":-1,"stop":1,"points":5}}"#,
    );
    let o = run(&["curves", "--config", "c.json", "--out", "k.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("k.csv");
    assert_eq!(header(&out), ["beta1", "beta2", "neg_log_density"]);
    let r = rows(&out);
    assert_eq!(r.len(), 25);
    let origin = r.iter().find(|row| row[0].parse::<f64>().unwrap() == 0.0 && row[1].parse::<f64>().unwrap() == 0.0).unwrap();
    let v: f64 = origin[2].parse().unwrap();
    assert!((v + 2.0 * (a / (2.0 * b)).ln()).abs() < 1e-12);
}

#[test]
fn curve_input_errors() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "empty.json", r#"{"kind":"threshold","prior":{"family":"hal","a":2,"b":0.1},"grid":{"start":0,"stop":1,"points":0}}"#);
    let o = run(&["curves", "--config", "empty.json", "--out", "e.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("at least one point"));
    put(dir.path(), "fam.json", r#"{"kind":"threshold","prior":{"family":"horseshoe","a":2},"grid":{"start":0,"stop":1,"points":3}}"#);
    let o = run(&["curves", "--config", "fam.json", "--out", "e.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("horseshoe"));
    assert!(!dir.path().join("e.csv").exists());
}
