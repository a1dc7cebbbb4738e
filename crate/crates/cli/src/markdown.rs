//! Markdown renderings of command results for terminal or file output.

use std::collections::HashMap;
use std::fmt::Write;

use metaudit_core::audit::{AuditReport, Diagnostic, DiagnosticStatus};
use metaudit_core::search_space::{CovariateTally, SearchSpace, SpaceSummary, StudyCounts};
use metaudit_core::stats::TestResult;
use serde_json::Value;

use crate::output::fmt_float;

/// Short human-readable number: integers stay exact, others get at most 4 decimals.
fn short(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.3e}")
    } else {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", " --- |".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out.push('\n');
}

fn notes_section(out: &mut String, notes: &[String]) {
    out.push_str("## Notes\n\n");
    for n in notes {
        let _ = writeln!(out, "- {n}");
    }
}

fn summary_rows(summary: &SpaceSummary) -> Vec<Vec<String>> {
    [("Space 1", &summary.space1), ("Space 2", &summary.space2), ("Space 3", &summary.space3)]
        .iter()
        .map(|(name, col)| {
            let mut row = vec![(*name).to_owned()];
            row.extend(col.as_array().iter().map(|&v| short(v)));
            row
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 6] = ["", "min", "Q1", "median", "Q3", "max"];

pub fn space_report(
    studies: &[StudyCounts],
    spaces: &[SearchSpace],
    summary: &SpaceSummary,
    tally: &CovariateTally,
    notes: &[String],
) -> String {
    let mut out = String::from("# Analysis search spaces\n\n");
    let rows: Vec<Vec<String>> = studies
        .iter()
        .zip(spaces)
        .map(|(c, s)| {
            vec![
                c.study_id.clone(),
                c.outcomes.to_string(),
                c.predictors.to_string(),
                c.lags.to_string(),
                c.covariates.to_string(),
                s.space1.to_string(),
                s.space2.to_string(),
                s.space3.to_string(),
            ]
        })
        .collect();
    table(
        &mut out,
        &["study", "outcomes", "predictors", "lags", "covariates", "space 1", "space 2", "space 3"],
        &rows,
    );
    out.push_str("## Summary\n\n");
    table(&mut out, &SUMMARY_HEADER, &summary_rows(summary));
    if !tally.counts.is_empty() {
        out.push_str("## Covariates named\n\n");
        let rows: Vec<Vec<String>> = tally
            .counts
            .iter()
            .map(|(name, n)| vec![name.clone(), n.to_string()])
            .collect();
        table(&mut out, &["covariate", "studies"], &rows);
    }
    notes_section(&mut out, notes);
    out
}

fn test_row(name: &str, diag: &Diagnostic<TestResult>, alpha: f64) -> Vec<String> {
    let (stat, p) = match &diag.result {
        Some(r) => (short(r.statistic), short(r.p_value)),
        None => ("-".to_owned(), "-".to_owned()),
    };
    let verdict = match (diag.status, diag.rejects(alpha)) {
        (DiagnosticStatus::InsufficientData, _) => "insufficient data".to_owned(),
        (_, Some(true)) => "reject".to_owned(),
        _ => "no evidence".to_owned(),
    };
    vec![name.to_owned(), stat, p, verdict]
}

pub fn audit_report(report: &AuditReport, labels: &HashMap<&str, &str>, notes: &[String]) -> String {
    let mut out = String::from("# P-value audit\n\n");
    let _ = writeln!(
        out,
        "{} numeric p-values, {} excluded as not significant, alpha = {}.\n",
        report.plot.n,
        report.plot.excluded_ns_count,
        short(report.alpha)
    );
    let rows: Vec<Vec<String>> = report
        .pvalues
        .iter()
        .zip(&report.plot.reference_line)
        .map(|(r, reference)| {
            vec![
                r.rank.to_string(),
                r.study_id.clone(),
                labels.get(r.study_id.as_str()).copied().unwrap_or("").to_owned(),
                short(r.p),
                short(reference.p),
            ]
        })
        .collect();
    table(&mut out, &["rank", "study", "label", "p", "uniform reference"], &rows);

    out.push_str("## Tests\n\n");
    table(
        &mut out,
        &["test", "statistic", "p-value", "verdict"],
        &[
            test_row("uniformity (KS)", &report.uniformity, report.alpha),
            test_row("bilinearity (quadratic term)", &report.bilinearity, report.alpha),
        ],
    );
    match &report.hockey_stick.result {
        Some(h) => {
            let _ = writeln!(
                out,
                "Two-segment fit: break after rank {}, left slope {}, right slope {} (SSE {} vs {} for one line).\n",
                h.breakpoint,
                short(h.left_slope),
                short(h.right_slope),
                short(h.sse),
                short(h.single_line_sse)
            );
        }
        None => out.push_str("Two-segment fit: insufficient data.\n\n"),
    }

    if let Some(m) = &report.multiplicity {
        out.push_str("## Multiplicity\n\n");
        table(
            &mut out,
            &["median space 3", "tests", "adjusted alpha", "significant (raw)", "significant (adjusted)"],
            &[vec![
                short(m.median_space3),
                m.report.tests.to_string(),
                fmt_float(m.report.adjusted_alpha),
                m.report.n_significant_raw.to_string(),
                m.report.n_significant_adjusted.to_string(),
            ]],
        );
    }
    notes_section(&mut out, notes);
    out
}

pub fn simulate_report(
    config: &Value,
    publication_rate: f64,
    n_published: usize,
    extras: &[(&str, String)],
    notes: &[String],
) -> String {
    let mut out = String::from("# Selection simulation\n\n");
    let mut rows: Vec<Vec<String>> = Vec::new();
    if let Value::Object(map) = config {
        for (k, v) in map {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            rows.push(vec![k.clone(), shown]);
        }
    }
    table(&mut out, &["setting", "value"], &rows);
    let mut results = vec![
        vec!["publication_rate".to_owned(), fmt_float(publication_rate)],
        vec!["n_published".to_owned(), n_published.to_string()],
    ];
    for (name, value) in extras {
        let shown = if value.is_empty() { "-".to_owned() } else { value.clone() };
        results.push(vec![(*name).to_owned(), shown]);
    }
    table(&mut out, &["result", "value"], &results);
    notes_section(&mut out, notes);
    out
}
