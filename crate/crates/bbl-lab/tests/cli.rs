//! Black-box runs of the compiled binary: exit codes, emitted files,
//! determinism across repeated invocations and thread counts, and the
//! shape of the three output formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bbl-lab"))
}

static DIR_COUNTER: AtomicU32 = AtomicU32::new(0);

fn scratch_dir(tag: &str) -> PathBuf {
    let n = DIR_COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "bbl-lab-cli-{}-{tag}-{n}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL_SUITE: &str = r#"{
  "schema": 1,
  "scenarios": [
    {
      "name": "squares",
      "kind": "bm",
      "bodies": [
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        [[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]
      ],
      "p": 1.0,
      "lambda": 0.5,
      "quad_tol": 1e-6,
      "seed": 0
    },
    {
      "name": "torsion-pair",
      "kind": "bm_tau",
      "bodies": [
        [[-1.0, -0.6], [1.0, -0.6], [1.0, 0.6], [-1.0, 0.6]],
        [[-0.7, -0.7], [0.7, -0.7], [0.7, 0.7], [-0.7, 0.7]]
      ],
      "p": 1.0,
      "lambda": 0.5,
      "mesh_h": 0.08,
      "quad_tol": 1e-6,
      "seed": 0
    }
  ]
}"#;

fn write_suite(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("suite.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_verify(suite: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("verify")
        .arg(suite)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn verify_passes_and_emits_all_formats() {
    let dir = scratch_dir("pass");
    let suite = write_suite(&dir, SMALL_SUITE);
    let out = dir.join("out");
    let res = run_verify(&suite, &out, &[]);
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(res.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("PASS"), "stdout: {stdout}");
    for name in ["reports.json", "reports.csv", "reports.svg"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("reports.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    let reports = json["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert!(r["outcome"]["ok"].is_object(), "report {r}");
    }

    let csv = std::fs::read_to_string(out.join("reports.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("name,kind,seed,"));
    let columns = header.split(',').count();
    for line in lines {
        assert_eq!(line.split(',').count(), columns, "ragged row: {line}");
    }
}

#[test]
fn verify_is_deterministic_across_runs_and_jobs() {
    let dir = scratch_dir("det");
    let suite = write_suite(&dir, SMALL_SUITE);
    let (out1, out2, out3) = (dir.join("o1"), dir.join("o2"), dir.join("o3"));
    assert!(run_verify(&suite, &out1, &[]).status.success());
    assert!(run_verify(&suite, &out2, &["--jobs", "3"]).status.success());
    let mut env_run = bin();
    env_run
        .arg("verify")
        .arg(&suite)
        .arg("--out")
        .arg(&out3)
        .env("BBL_LAB_JOBS", "2");
    assert!(env_run.output().unwrap().status.success());

    for name in ["reports.json", "reports.csv", "reports.svg"] {
        let bytes = std::fs::read(out1.join(name)).unwrap();
        assert_eq!(bytes, std::fs::read(out2.join(name)).unwrap(), "{name} differs");
        assert_eq!(bytes, std::fs::read(out3.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn verify_exits_nonzero_when_a_scenario_errors() {
    // mesh_h = 0.9 parses fine but trips the solver's coarseness guard
    // (h must stay below a quarter of the diameter) at run time.
    let broken = SMALL_SUITE.replace("\"mesh_h\": 0.08", "\"mesh_h\": 0.9");
    let dir = scratch_dir("err");
    let suite = write_suite(&dir, &broken);
    let res = run_verify(&suite, &dir.join("out"), &[]);
    assert_eq!(res.status.code(), Some(1));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("ERROR"), "stdout: {stdout}");
    // The passing scenario still emits; the error is per-row, not fatal.
    assert!(stdout.contains("PASS"), "stdout: {stdout}");
}

#[test]
fn verify_rejects_out_of_range_lambda_with_context() {
    let bad = SMALL_SUITE.replace("\"lambda\": 0.5", "\"lambda\": 1.5");
    let dir = scratch_dir("lambda");
    let suite = write_suite(&dir, &bad);
    let res = run_verify(&suite, &dir.join("out"), &[]);
    assert!(!res.status.success());
    let stderr = String::from_utf8(res.stderr).unwrap();
    assert!(stderr.contains("lambda"), "stderr: {stderr}");
    assert!(stderr.contains("squares"), "stderr: {stderr}");
}

#[test]
fn random_suite_emits_a_parsable_suite() {
    let res = bin()
        .args(["random-suite", "--kind", "bm", "--count", "3", "--seed", "7"])
        .output()
        .unwrap();
    assert!(res.status.success());
    let json: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["scenarios"].as_array().unwrap().len(), 3);
    for s in json["scenarios"].as_array().unwrap() {
        assert_eq!(s["kind"], "bm");
    }
}

#[test]
fn constants_prints_the_bundle() {
    let res = bin()
        .args(["constants", "--p", "1.0", "--lambda", "0.5"])
        .output()
        .unwrap();
    assert!(res.status.success());
    let json: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    for key in ["beta", "delta", "eta", "omega_groemer", "b_threshold"] {
        let value = json[key].as_f64().unwrap_or_else(|| panic!("{key} missing"));
        assert!(value > 0.0, "{key} = {value}");
    }
}

/// Schema-free XML sanity scan: tags balance, attributes are quoted,
/// and text content never carries a raw '<' or '&'.
fn check_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text.trim_start();
    if let Some(after) = rest.strip_prefix("<?xml") {
        rest = after.split_once("?>").expect("unterminated prolog").1;
    }
    while let Some(pos) = rest.find('<') {
        let before = &rest[..pos];
        assert!(!before.contains('&') || before.contains("&#") || before.contains("&amp;")
            || before.contains("&lt;") || before.contains("&gt;") || before.contains("&quot;"),
            "raw ampersand in text: {before:?}");
        rest = &rest[pos + 1..];
        let end = rest.find('>').expect("unterminated tag");
        let tag = &rest[..end];
        rest = &rest[end + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("stray </{name}>"));
            assert_eq!(open, name, "mismatched close");
            continue;
        }
        let self_closing = tag.ends_with('/');
        let body = tag.trim_end_matches('/');
        let name = body.split_whitespace().next().expect("empty tag").to_string();
        // Attribute scan: every '=' outside quotes must be followed by
        // a quoted value.
        let attrs = &body[name.len()..];
        let mut chars = attrs.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '=' {
                assert_eq!(chars.next(), Some('"'), "unquoted attribute in <{body}>");
                for q in chars.by_ref() {
                    if q == '"' {
                        break;
                    }
                }
            }
        }
        if !self_closing {
            stack.push(name);
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

#[test]
fn svg_output_is_well_formed() {
    let dir = scratch_dir("svg");
    let suite = write_suite(&dir, SMALL_SUITE);
    let out = dir.join("out");
    assert!(run_verify(&suite, &out, &["--formats", "svg"]).status.success());
    assert!(!out.join("reports.json").exists(), "json not requested");
    let svg = std::fs::read_to_string(out.join("reports.svg")).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    check_xml(&svg);
    assert!(svg.contains("<svg"), "missing svg root");
}
