//! End-to-end runs of the `metaudit` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn metaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metaudit"))
        .args(args)
        .env("METAUDIT_NO_COLOR", "1")
        .output()
        .expect("spawn metaudit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const EFFECTS_HEADER: &str = "study_id,label,ratio,ci_low,ci_high,level,ns\n";

#[test]
fn space_on_bundled_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = metaudit(&["space", "--input", s(&data("nawrot_counts.csv")), "--output", s(dir.path()), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("spaces.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    assert!(csv.starts_with("study_id,outcomes,predictors,lags,covariates,space1,space2,space3\n"));
    assert!(csv.contains("12 Barnett,7,4,1,13,28,8192,229376\n"));
    assert!(csv.contains("42 Mann,21,4,7,9,588,512,301056\n"));
    assert!(csv.contains("43 Peters,1,7,2,5,14,32,448\n"));
    let doc = read_json(&dir.path().join("space_summary.json"));
    assert_eq!(doc["schema"], "metaudit/1");
    assert_eq!(doc["space_summary"]["space3"]["median"].as_f64(), Some(6784.0));
    assert_eq!(doc["covariate_tally"]["counts"]["Age"].as_u64(), Some(12));
}

#[test]
fn empty_counts_names_missing_header() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", "");
    let out = metaudit(&["space", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("missing header"), "{err}");
    assert!(err.contains("study_id,outcomes,predictors,lags,covariates"), "{err}");
}

#[test]
fn bad_counts_value_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "bad.csv",
        "study_id,outcomes,predictors,lags,covariates\na,1,2,3,4\nb,1,x,3,4\n",
    );
    let out = metaudit(&["space", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("predictors"), "{err}");
}

#[test]
fn too_many_covariates_is_overflow() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "big.csv",
        "study_id,outcomes,predictors,lags,covariates\nok,1,1,1,3\nhuge-study,1,1,1,63\n",
    );
    let out = metaudit(&["space", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("huge-study"), "{}", stderr(&out));
}

#[test]
fn audit_bundled_effects() {
    let dir = tempfile::tempdir().unwrap();
    let out = metaudit(&[
        "audit",
        "--input",
        s(&data("synthetic_effects.csv")),
        "--counts",
        s(&data("nawrot_counts.csv")),
        "--output",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("report.json"));
    assert_eq!(doc["plot"]["n"].as_u64(), Some(12));
    assert_eq!(doc["plot"]["excluded_ns_count"].as_u64(), Some(2));
    assert_eq!(doc["multiplicity"]["tests"].as_u64(), Some(6784));
    for key in ["inputs_digest", "spaces", "space_summary", "pvalues", "plot", "tests", "multiplicity", "notes"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), md);
    let plot_csv = fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    assert!(plot_csv.starts_with("rank,p,reference\n"));
    assert_eq!(plot_csv.lines().count(), 13);
}

#[test]
fn audit_without_counts_marks_multiplicity_absent() {
    let dir = tempfile::tempdir().unwrap();
    let out = metaudit(&["audit", "--input", s(&data("synthetic_effects.csv")), "--output", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("report.json"));
    assert_eq!(doc["multiplicity"]["status"], "absent");
    assert!(doc["spaces"].is_null());
}

#[test]
fn single_record_is_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "one.csv", &format!("{EFFECTS_HEADER}a,x,1.2,1.1,1.3,,0\n"));
    let out = metaudit(&["audit", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("o/report.json"));
    for test in ["uniformity", "bilinearity", "hockey_stick"] {
        assert_eq!(doc["tests"][test]["status"], "insufficient data", "{test}");
    }
}

#[test]
fn all_not_significant_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ns.csv", &format!("{EFFECTS_HEADER}a,,,,,,1\nb,,,,,,1\n"));
    let out = metaudit(&["audit", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = metaudit(&["plot", "--input", s(&input), "--output", s(&dir.path().join("p.svg"))]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn bad_effects_rows_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "a,x,1.2,1.3,1.1,,0\n",
        "a,x,-1,0.9,1.1,,0\n",
        "a,x,1.2,1.1,1.3,,2\n",
        "a,x,1.2,1.1,1.3,,0\na,y,1.2,1.1,1.3,,0\n",
    ] {
        let input = write(dir.path(), "bad.csv", &format!("{EFFECTS_HEADER}{body}"));
        let out = metaudit(&["audit", "--input", s(&input), "--output", s(&dir.path().join("o"))]);
        assert_eq!(code(&out), 2, "{body}: {}", stderr(&out));
        assert!(stderr(&out).contains("line 2") || stderr(&out).contains("line 3"), "{}", stderr(&out));
    }
}

#[test]
fn three_record_svg_structure() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "three.csv",
        &format!("{EFFECTS_HEADER}a,,1.2,1.1,1.3,,0\nb,,1.01,0.9,1.12,,0\nc,,1.05,0.95,1.16,0.95,0\n"),
    );
    let svg_path = dir.path().join("out.svg");
    let out = metaudit(&["plot", "--input", s(&input), "--output", s(&svg_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(svg_path).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
    assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    assert!(svg.contains(r#"viewBox="0 0 800 600""#));
}

#[test]
fn bundled_svg_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("out.svg");
    let out = metaudit(&["plot", "--input", s(&data("synthetic_effects.csv")), "--output", s(&svg_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/synthetic_effects.svg");
    assert_eq!(fs::read(svg_path).unwrap(), fs::read(golden).unwrap());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = metaudit(&["simulate", "--k", "1", "--replicates", "1000", "--seed", "7", "--output", s(out_dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["simulation.csv", "summary.json", "effects.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let doc = read_json(&a.join("summary.json"));
    assert_eq!(doc["config"]["seed"].as_u64(), Some(7));
    assert_eq!(doc["config"]["tests_per_study"].as_u64(), Some(1));
}

#[test]
fn simulate_rejects_unit_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let out = metaudit(&["simulate", "--correlation", "1.0", "--output", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("correlation must be < 1"), "{}", stderr(&out));
}

#[test]
fn simulate_config_file_and_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "sim.conf", "k = 3\nreplicates = 50\nseed = 11\n");
    let out = metaudit(&["simulate", "--config", s(&conf), "--seed", "12", "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("o/summary.json"));
    assert_eq!(doc["config"]["tests_per_study"].as_u64(), Some(3));
    assert_eq!(doc["config"]["seed"].as_u64(), Some(12));

    let bad = write(dir.path(), "bad.conf", "tests = 3\n");
    let out = metaudit(&["simulate", "--config", s(&bad), "--output", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tests"), "{}", stderr(&out));
}

#[test]
fn simulate_publication_rate_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = metaudit(&["simulate", "--k", "10", "--replicates", "100000", "--seed", "42", "--output", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("summary.json"));
    let rate = doc["publication_rate"].as_f64().unwrap();
    let expected = 1.0 - 0.95f64.powi(10);
    assert!((rate - expected).abs() <= 0.01, "{rate}");
}

#[test]
fn usage_errors_exit_2() {
    let out = metaudit(&["space"]);
    assert_eq!(code(&out), 2);
    let out = metaudit(&["nonsense"]);
    assert_eq!(code(&out), 2);
    let out = metaudit(&["audit", "--input", "/nonexistent/x.csv", "--output", "/tmp/unused"]);
    assert_eq!(code(&out), 2);
}

/// Re-serialising parsed JSON gives back the same bytes.
fn assert_json_round_trip(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(metaudit::output::to_json_string(&value), text, "{}", path.display());
}

/// Re-writing parsed CSV gives back the same bytes.
fn assert_csv_round_trip(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| {
            r.unwrap()
                .iter()
                .map(|field| match field.parse::<f64>() {
                    Ok(x) if field.contains('.') || field.contains('e') => metaudit::output::fmt_float(x),
                    _ => field.to_owned(),
                })
                .collect()
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    assert_eq!(metaudit::output::csv_string(&header_refs, &rows), text, "{}", path.display());
}

#[test]
fn outputs_round_trip_and_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec!["space".into(), "--input".into(), s(&data("nawrot_counts.csv")).into()],
        vec![
            "audit".into(),
            "--input".into(),
            s(&data("synthetic_effects.csv")).into(),
            "--counts".into(),
            s(&data("nawrot_counts.csv")).into(),
        ],
        vec!["simulate".into(), "--k".into(), "5".into(), "--replicates".into(), "300".into(), "--seed".into(), "3".into()],
    ];
    for (i, base) in runs.iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let mut args: Vec<&str> = base.iter().map(String::as_str).collect();
        args.extend(["--output", s(&out_dir)]);
        assert_eq!(code(&metaudit(&args)), 0);
        let mut first: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| {
                let bytes = fs::read(&p).unwrap();
                (p, bytes)
            })
            .collect();
        first.sort();
        assert_eq!(code(&metaudit(&args)), 0);
        for (path, bytes) in &first {
            assert_eq!(&fs::read(path).unwrap(), bytes, "{} changed on rerun", path.display());
            match path.extension().and_then(|e| e.to_str()) {
                Some("json") => assert_json_round_trip(path),
                Some("csv") => assert_csv_round_trip(path),
                _ => {}
            }
        }
    }
}
