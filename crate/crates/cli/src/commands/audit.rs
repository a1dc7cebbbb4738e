use std::collections::HashMap;

use metaudit_core::audit::{
    audit, AuditReport, Diagnostic, DiagnosticStatus, HockeyStickFit, MIN_BILINEARITY_POINTS,
    MIN_HOCKEY_STICK_POINTS, MIN_UNIFORMITY_POINTS,
};
use metaudit_core::stats::TestResult;
use serde_json::{json, Map, Value};

use super::{digest_entry, load_spaces, spaces_json, CommandOutput, SEARCH_SPACE_NOTE};
use crate::cli::{AuditArgs, Format};
use crate::input::{parse_effects, Source};
use crate::markdown;
use crate::output::{csv_string, ensure_dir, fmt_float, to_json_string, write_file, SCHEMA};
use crate::CliError;

pub(crate) const UNIFORMITY_NOTE: &str = "Uniformity uses the one-sample Kolmogorov-Smirnov test against U(0,1) on the numeric p-values.";
pub(crate) const BILINEARITY_NOTE: &str = "Bilinearity is a reconstruction: OLS of sorted p on rank and rank squared, with the t-test of the squared term (df = n - 3). Small p indicates curvature such as a hockey stick.";
pub(crate) const CONVERSION_NOTE: &str = "P-values are two-sided, computed on the log-ratio scale from each confidence interval.";

fn status_label(status: DiagnosticStatus) -> &'static str {
    match status {
        DiagnosticStatus::Ok => "ok",
        DiagnosticStatus::InsufficientData => "insufficient data",
    }
}

pub(crate) fn test_json(diag: &Diagnostic<TestResult>, alpha: f64, needed: usize) -> Value {
    let mut obj = Map::new();
    obj.insert("status".into(), json!(status_label(diag.status)));
    obj.insert("min_points".into(), json!(needed));
    if let Some(r) = &diag.result {
        obj.insert("method".into(), json!(r.method));
        obj.insert("statistic".into(), json!(r.statistic));
        obj.insert("p_value".into(), json!(r.p_value));
        obj.insert("df".into(), json!(r.df));
    }
    let verdict = match diag.rejects(alpha) {
        Some(true) => json!("reject"),
        Some(false) => json!("no evidence"),
        None => Value::Null,
    };
    obj.insert("verdict".into(), verdict);
    Value::Object(obj)
}

pub(crate) fn hockey_json(diag: &Diagnostic<HockeyStickFit>, needed: usize) -> Value {
    let mut obj = Map::new();
    obj.insert("status".into(), json!(status_label(diag.status)));
    obj.insert("min_points".into(), json!(needed));
    if let Some(h) = &diag.result {
        obj.insert("breakpoint".into(), json!(h.breakpoint));
        obj.insert("left_intercept".into(), json!(h.left_intercept));
        obj.insert("left_slope".into(), json!(h.left_slope));
        obj.insert("right_intercept".into(), json!(h.right_intercept));
        obj.insert("right_slope".into(), json!(h.right_slope));
        obj.insert("sse".into(), json!(h.sse));
        obj.insert("single_line_sse".into(), json!(h.single_line_sse));
    }
    Value::Object(obj)
}

pub(crate) fn plot_rows(report: &AuditReport) -> Vec<Vec<String>> {
    report
        .plot
        .points
        .iter()
        .zip(&report.plot.reference_line)
        .map(|(p, r)| vec![p.rank.to_string(), fmt_float(p.p), fmt_float(r.p)])
        .collect()
}

pub(crate) fn audit_notes(report: &AuditReport, with_counts: bool) -> Vec<String> {
    let mut notes = vec![
        CONVERSION_NOTE.to_owned(),
        format!(
            "{} record(s) reported only as not significant were excluded from the plot and tests.",
            report.plot.excluded_ns_count
        ),
        UNIFORMITY_NOTE.to_owned(),
        BILINEARITY_NOTE.to_owned(),
    ];
    if with_counts {
        notes.push(SEARCH_SPACE_NOTE.to_owned());
        notes.push("The Bonferroni divisor is the median space 3, rounded to the nearest integer.".to_owned());
    }
    notes
}

/// Writes `report.json`, `plot.csv` and `report.md` into the output directory.
pub fn cmd_audit(args: &AuditArgs) -> Result<CommandOutput, CliError> {
    let effects = Source::read(&args.input)?;
    let records = parse_effects(&effects)?;
    let spaces = args.counts.as_deref().map(load_spaces).transpose()?;
    let report = audit(&records, spaces.as_ref().map(|s| &s.summary), args.alpha)?;
    let labels: HashMap<&str, &str> = records
        .iter()
        .map(|r| (r.study_id.as_str(), r.label.as_str()))
        .collect();

    let mut digest = Map::new();
    digest.insert("effects".into(), digest_entry(&effects));
    if let Some(s) = &spaces {
        digest.insert("counts".into(), digest_entry(&s.source));
    }
    let pvalues: Vec<Value> = report
        .pvalues
        .iter()
        .map(|r| {
            json!({
                "study_id": r.study_id,
                "label": labels.get(r.study_id.as_str()).copied().unwrap_or(""),
                "p": r.p,
                "rank": r.rank,
            })
        })
        .collect();
    let multiplicity = match &report.multiplicity {
        Some(m) => {
            let mut obj = Map::new();
            obj.insert("status".into(), json!("ok"));
            if let Value::Object(fields) = json!(m) {
                obj.extend(fields);
            }
            Value::Object(obj)
        }
        None => json!({ "status": "absent" }),
    };
    let notes = audit_notes(&report, spaces.is_some());
    let doc = json!({
        "schema": SCHEMA,
        "inputs_digest": Value::Object(digest),
        "alpha": report.alpha,
        "spaces": spaces.as_ref().map(spaces_json),
        "space_summary": spaces.as_ref().map(|s| s.summary),
        "pvalues": pvalues,
        "plot": report.plot,
        "tests": {
            "uniformity": test_json(&report.uniformity, report.alpha, MIN_UNIFORMITY_POINTS),
            "bilinearity": test_json(&report.bilinearity, report.alpha, MIN_BILINEARITY_POINTS),
            "hockey_stick": hockey_json(&report.hockey_stick, MIN_HOCKEY_STICK_POINTS),
        },
        "multiplicity": multiplicity,
        "notes": notes,
    });

    let json_text = to_json_string(&doc);
    let csv_text = csv_string(&["rank", "p", "reference"], &plot_rows(&report));
    let md_text = markdown::audit_report(&report, &labels, &notes);

    ensure_dir(&args.output)?;
    let json_path = args.output.join("report.json");
    let csv_path = args.output.join("plot.csv");
    let md_path = args.output.join("report.md");
    write_file(&json_path, &json_text)?;
    write_file(&csv_path, &csv_text)?;
    write_file(&md_path, &md_text)?;

    let stdout = match args.format {
        Format::Json => json_text,
        Format::Csv => csv_text,
        Format::Md => md_text,
    };
    Ok(CommandOutput {
        stdout,
        files: vec![json_path, csv_path, md_path],
    })
}
