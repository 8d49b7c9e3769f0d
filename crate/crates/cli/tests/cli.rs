use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wavprod(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavprod"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = wavprod(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["--seed", "11", "--out", "a", "gen", "--count", "3"],
        dir.path(),
    );
    ok(
        &["--seed", "11", "--out", "b", "gen", "--count", "3"],
        dir.path(),
    );
    ok(
        &["--seed", "12", "--out", "c", "gen", "--count", "3"],
        dir.path(),
    );
    let read = |d: &str| std::fs::read(dir.path().join(d).join("item_00002.gfn")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let manifest = json_file(&dir.path().join("a/manifest.json"));
    assert_eq!(manifest["items"].as_array().unwrap().len(), 3);
}

#[test]
fn split_writes_pieces_and_exact_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--out", "c", "gen", "--count", "2"], dir.path());
    ok(
        &[
            "split",
            "--f",
            "c/item_00000.gfn",
            "--g",
            "c/item_00001.gfn",
            "--j0",
            "2",
            "--fold-coarse",
            "pi2",
            "--out-prefix",
            "s",
        ],
        dir.path(),
    );
    for part in ["pi1", "pi2", "pi3", "coarse"] {
        assert!(dir.path().join(format!("s_{part}.gfn")).exists());
    }
    let report = json_file(&dir.path().join("s_report.json"));
    assert!(report["residuals"]["split"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["fold_coarse"], Value::Bool(true));
    assert_eq!(report["norms"]["coarse"]["linf"].as_f64().unwrap(), 0.0);
}

#[test]
fn norms_and_atoms_reports() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["--out", "c", "gen", "--kind", "atom", "--count", "1"],
        dir.path(),
    );
    ok(
        &[
            "norms",
            "--in",
            "c/item_00000.gfn",
            "--norms",
            "l1,h1,llog",
            "--report",
            "n.json",
        ],
        dir.path(),
    );
    let norms = json_file(&dir.path().join("n.json"));
    let names: Vec<&str> = norms
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["norm"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["l1", "h1", "llog"]);

    ok(
        &["atoms", "--in", "c/item_00000.gfn", "--report", "a.json"],
        dir.path(),
    );
    let atoms = json_file(&dir.path().join("a.json"));
    assert!(atoms["ratio"].as_f64().unwrap() >= 1.0 - 1e-12);
    assert!(!atoms["atoms"].as_array().unwrap().is_empty());
}

#[test]
fn divcurl_report_has_fixed_keys() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "--out",
            "p",
            "gen",
            "--kind",
            "band-limited-potential",
            "--dims",
            "2",
            "--count",
            "1",
        ],
        dir.path(),
    );
    ok(
        &[
            "divcurl",
            "--u",
            "p/item_00000_u.gfn",
            "--v",
            "p/item_00000_v.gfn",
            "--report",
            "d.json",
        ],
        dir.path(),
    );
    let report = json_file(&dir.path().join("d.json"));
    let mut keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "bmo_plus_G",
            "curl_residual",
            "div_residual",
            "h1_F",
            "hlog",
            "integral_FG",
            "ratio",
            "riesz_identity_residual"
        ]
    );
    assert!(report["riesz_identity_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn holder_and_transform() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--out", "c", "gen", "--count", "1"], dir.path());
    ok(
        &[
            "--out",
            "g",
            "gen",
            "--kind",
            "bmo-log-exemplar",
            "--count",
            "1",
        ],
        dir.path(),
    );
    let out = ok(
        &[
            "holder",
            "--f",
            "c/item_00000.gfn",
            "--g",
            "g/item_00000.gfn",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["ratio"].as_f64().unwrap().is_finite());

    let out = ok(
        &[
            "transform",
            "--in",
            "c/item_00000.gfn",
            "--level",
            "4",
            "--part",
            "q",
            "--projection",
            "q.gfn",
        ],
        dir.path(),
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["reconstruction_residual"].as_f64().unwrap() <= 1e-10);
    assert!(dir.path().join("q.gfn").exists());
}

#[test]
fn selfcheck_reports_perturbed_filter() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavprod(
        &[
            "selfcheck",
            "--criterion",
            "1",
            "--perturb",
            "0=1e-3",
            "--report",
            "s.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 1"));
    let summary = json_file(&dir.path().join("s.json"));
    let checks = summary["criteria"][0]["checks"].as_array().unwrap();
    let orth = checks
        .iter()
        .find(|c| c["name"] == "orthogonality")
        .unwrap();
    assert_eq!(orth["passed"], Value::Bool(false));
}

#[test]
fn selfcheck_tightened_tolerance_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavprod(
        &[
            "selfcheck",
            "--criterion",
            "1",
            "--tolerance",
            "reconstruction=1e-16",
            "--report",
            "s.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let summary = json_file(&dir.path().join("s.json"));
    let rec = summary["criteria"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "reconstruction")
        .unwrap()
        .clone();
    assert_eq!(rec["tolerance"].as_f64(), Some(1e-16));
    assert!(rec["measured"].as_f64().unwrap() > 1e-16);
}

#[test]
fn selfcheck_single_criterion_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["selfcheck", "--criterion", "6"], dir.path());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn config_is_validated_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"seed": 1, "colour": "red"}"#,
    )
    .unwrap();
    let out = wavprod(&["--config", "bad.json", "gen"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"seed": 1, "J": 6, "corpus_size": 2}"#,
    )
    .unwrap();
    ok(
        &["--config", "cfg.json", "--seed", "5", "--out", "x", "gen"],
        dir.path(),
    );
    let manifest = json_file(&dir.path().join("x/manifest.json"));
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["spec"]["J"], 6);
    assert_eq!(manifest["items"].as_array().unwrap().len(), 2);

    let out = wavprod(&["--filter", "db42", "gen"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
