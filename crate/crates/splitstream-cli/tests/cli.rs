//! End-to-end tests of the binary: output formats, byte reproducibility,
//! exit codes, and schema conformance of the JSON artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_splitstream")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(bin());
    cmd.current_dir(dir).args(args).env_remove("SPLITSTREAM_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("splitstream-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("law37.json"),
        r#"{"branches":[{"g":2,"prob":1.0,"weights":[0.3,0.7]}]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("sym.json"),
        r#"{"branches":[{"g":2,"prob":1.0,"weights":[0.5,0.5]}]}"#,
    )
    .unwrap();
    std::fs::write(dir.join("msym.json"), r#"{"atoms":[{"w":0.5,"q":1.0}]}"#).unwrap();
    dir
}

// ---------------------------------------------------------------------------
// Minimal JSON Schema checker covering the subset the shipped schemas use:
// type, required, properties, items, enum.

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn check_schema(value: &serde_json::Value, schema: &serde_json::Value, at: &str) -> Vec<String> {
    let mut errors = Vec::new();
    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            errors.push(format!("{at}: {value} not in {allowed:?}"));
        }
        return errors;
    }
    if let Some(ty) = schema.get("type").and_then(|t| t.as_str()) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "number" => value.is_number(),
            "integer" => value.as_f64().is_some_and(|f| f.fract() == 0.0),
            other => {
                errors.push(format!("{at}: unsupported schema type {other}"));
                true
            }
        };
        if !ok {
            errors.push(format!("{at}: expected {ty}, got {value}"));
            return errors;
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap();
            if value.get(key).is_none() {
                errors.push(format!("{at}: missing required field {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                errors.extend(check_schema(v, sub, &format!("{at}.{key}")));
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                errors.extend(check_schema(v, items, &format!("{at}[{i}]")));
            }
        }
    }
    errors
}

fn assert_schema(text: &str, schema_file: &str) -> serde_json::Value {
    let value: serde_json::Value = serde_json::from_str(text).expect("valid JSON output");
    let schema_text = std::fs::read_to_string(schema_dir().join(schema_file)).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&schema_text).unwrap();
    let errors = check_schema(&value, &schema, "$");
    assert!(errors.is_empty(), "schema violations: {errors:?}");
    value
}

// ---------------------------------------------------------------------------

#[test]
fn derive_measure_prints_atoms_csv() {
    let dir = workdir("derive");
    let run = run_in(&dir, &["derive-measure", "--law", "law37.json"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert!(lines[0].starts_with("# splitstream v0.1.0 cmd=derive-measure seed=0 config="));
    assert_eq!(lines[1], "w,q");
    assert_eq!(lines[2], "0.3,0.3");
    assert_eq!(lines[3], "0.7,0.7");
    assert!(lines[4].starts_with("# mean_g=2 "));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = workdir("rerun");
    for args in [
        vec!["derive-measure", "--law", "law37.json"],
        vec![
            "solve",
            "--measure",
            "msym.json",
            "--lambda",
            "0.2",
            "--d",
            "2",
            "--seed",
            "3",
        ],
        vec![
            "simulate",
            "--law",
            "sym.json",
            "--arrivals",
            "poisson:0.2",
            "--n",
            "8",
            "--d",
            "2",
            "--trials",
            "2000",
            "--seed",
            "1",
            "--budget",
            "1e6",
        ],
    ] {
        let a = run_in(&dir, &args, &[]);
        let b = run_in(&dir, &args, &[]);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "args: {args:?}");
    }
}

#[test]
fn check_reports_delta_and_span() {
    let dir = workdir("check");
    let run = run_in(&dir, &["check", "--law", "law37.json"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(lines[1], "delta,h2_value,span,mean_abs_log_w");
    let cells: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(cells[0], "0.7");
    assert_eq!(cells[2], "absent");

    let run = run_in(&dir, &["check", "--measure", "msym.json"], &[]);
    let lines: Vec<&str> = run.stdout.lines().collect();
    let cells: Vec<&str> = lines[2].split(',').collect();
    let span: f64 = cells[2].parse().unwrap();
    assert!((span - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn xinf_reports_closed_form_for_binary() {
    let dir = workdir("xinf");
    let run = run_in(
        &dir,
        &[
            "xinf",
            "--measure",
            "msym.json",
            "--s",
            "0.5",
            "--samples",
            "1000",
            "--seed",
            "7",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let last = run.stdout.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    let est: f64 = cells[0].parse().unwrap();
    let closed: f64 = cells[2].parse().unwrap();
    assert!((closed - (-1.0f64).exp()).abs() < 1e-12);
    assert!((est - closed).abs() < 1e-8);
}

#[test]
fn solve_output_matches_schema_and_static_constants() {
    let dir = workdir("solve");
    let run = run_in(
        &dir,
        &[
            "solve",
            "--measure",
            "msym.json",
            "--lambda",
            "0",
            "--d",
            "2",
            "--seed",
            "3",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let value = assert_schema(&run.stdout, "solve-output.schema.json");
    let c = value["c"].as_array().unwrap();
    assert!((c[0].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((c[1].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(value["c_inf"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn solve_near_critical_fails_cleanly() {
    let dir = workdir("solvecrit");
    // Locate the critical rate tightly, then ask for constants exactly
    // there: the conditioning floor must refuse the solve.
    let run = run_in(
        &dir,
        &[
            "lambda-c",
            "--measure",
            "msym.json",
            "--d",
            "2",
            "--bracket",
            "0.05:0.5",
            "--tol",
            "1e-12",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let root = run
        .stdout
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();
    let run = run_in(
        &dir,
        &["solve", "--measure", "msym.json", "--lambda", &root, "--d", "2"],
        &[],
    );
    assert_eq!(run.code, 2, "expected near-singular failure at lambda_c = {root}");
    assert!(run.stderr.contains("near-singular"), "{}", run.stderr);
}

#[test]
fn mean_size_at_one_item_is_one() {
    let dir = workdir("meansize");
    let run = run_in(
        &dir,
        &[
            "mean-size",
            "--measure",
            "msym.json",
            "--lambda",
            "0.1",
            "--d",
            "2",
            "--n-grid",
            "1",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let last = run.stdout.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    assert_eq!(cells[0], "1");
    let v: f64 = cells[1].parse().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn lambda_c_without_sign_change_exits_two() {
    let dir = workdir("lambdac");
    let run = run_in(
        &dir,
        &[
            "lambda-c",
            "--measure",
            "msym.json",
            "--d",
            "2",
            "--bracket",
            "0.01:0.05",
        ],
        &[],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("no sign change"), "{}", run.stderr);
}

#[test]
fn malformed_law_exits_two_before_compute() {
    let dir = workdir("badlaw");
    std::fs::write(
        dir.join("bad.json"),
        r#"{"branches":[{"g":2,"prob":0.5,"weights":[0.3,0.7]}]}"#,
    )
    .unwrap();
    let run = run_in(
        &dir,
        &[
            "simulate",
            "--law",
            "bad.json",
            "--n",
            "4",
            "--trials",
            "10",
        ],
        &[],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("probabilities sum"), "{}", run.stderr);
}

#[test]
fn unknown_flag_exits_two() {
    let dir = workdir("badflag");
    let run = run_in(&dir, &["check", "--measure", "msym.json", "--bogus"], &[]);
    assert_eq!(run.code, 2);
}

#[test]
fn env_seed_is_the_default() {
    let dir = workdir("envseed");
    let run = run_in(
        &dir,
        &["derive-measure", "--law", "law37.json"],
        &[("SPLITSTREAM_SEED", "9")],
    );
    assert!(run.stdout.contains("seed=9"), "{}", run.stdout);
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = workdir("config");
    std::fs::write(
        dir.join("exp.json"),
        r#"{"measure": "msym.json", "d": 2, "seed": 5}"#,
    )
    .unwrap();
    let run = run_in(
        &dir,
        &["check", "--config", "exp.json"],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let run = run_in(
        &dir,
        &[
            "xinf",
            "--config",
            "exp.json",
            "--s",
            "0",
            "--samples",
            "10",
        ],
        &[],
    );
    assert!(run.stdout.contains("seed=5"), "{}", run.stdout);
    let run = run_in(
        &dir,
        &[
            "xinf",
            "--config",
            "exp.json",
            "--s",
            "0",
            "--samples",
            "10",
            "--seed",
            "6",
        ],
        &[],
    );
    assert!(run.stdout.contains("seed=6"), "{}", run.stdout);

    // A config referencing a missing file is a config error.
    std::fs::write(dir.join("broken.json"), r#"{"measure": "nope.json"}"#).unwrap();
    let run = run_in(&dir, &["check", "--config", "broken.json"], &[]);
    assert_eq!(run.code, 2);
}

#[test]
fn validate_subset_passes_and_reports() {
    let dir = workdir("validate");
    let run = run_in(
        &dir,
        &[
            "validate",
            "--only",
            "fluctuation-mean",
            "--out",
            "report.json",
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{} {}", run.stdout, run.stderr);
    assert!(run.stdout.contains("PASS  fluctuation-mean"), "{}", run.stdout);
    assert!(run.stdout.contains("passed 1, failed 0, skipped 0"));
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let value = assert_schema(&report, "validate-report.schema.json");
    assert_eq!(value["passed"], serde_json::Value::Bool(true));
}

#[test]
fn validate_rejects_unknown_criterion() {
    let dir = workdir("validate2");
    let run = run_in(&dir, &["validate", "--only", "nonsense"], &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("unknown criterion"));
}
