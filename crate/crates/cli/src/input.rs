//! Parsers for the counts and effects CSV files.
//!
//! Both formats allow `#` comment lines and surrounding whitespace. Header
//! names are matched case-insensitively; any other header is rejected.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use metaudit_core::audit::{p_from_ratio_ci, EffectRecord, DEFAULT_CONFIDENCE_LEVEL};
use metaudit_core::search_space::StudyCounts;

use crate::CliError;

pub const COUNTS_HEADER: [&str; 6] = [
    "study_id",
    "outcomes",
    "predictors",
    "lags",
    "covariates",
    "covariate_names",
];

pub const EFFECTS_HEADER: [&str; 7] = [
    "study_id", "label", "ratio", "ci_low", "ci_high", "level", "ns",
];

/// File contents plus its path, kept for digests and diagnostics.
pub struct Source {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Source {
            path: path.to_path_buf(),
            bytes,
        })
    }

    pub fn name(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

fn parse_error(source: &Source, line: Option<u64>, column: Option<&str>, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: source.path.clone(),
        line,
        column: column.map(str::to_owned),
        message: message.into(),
    }
}

/// Reads all records; the first one is the header.
fn records(source: &Source) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source.bytes.as_slice());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line());
            parse_error(source, line, None, e.to_string())
        })?;
        // Skip blank lines.
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

fn line_of(rec: &csv::StringRecord) -> Option<u64> {
    rec.position().map(|p| p.line())
}

fn check_header(
    source: &Source,
    header: Option<&csv::StringRecord>,
    required: &[&str],
    optional: &[&str],
) -> Result<usize, CliError> {
    let expected = required
        .iter()
        .chain(optional)
        .copied()
        .collect::<Vec<_>>()
        .join(",");
    let Some(header) = header else {
        return Err(parse_error(
            source,
            None,
            None,
            format!("missing header: expected `{expected}`"),
        ));
    };
    let got: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    let matches = |n: usize| {
        got.len() == n
            && got
                .iter()
                .zip(required.iter().chain(optional))
                .all(|(g, e)| g == e)
    };
    if matches(required.len()) {
        Ok(required.len())
    } else if !optional.is_empty() && matches(required.len() + optional.len()) {
        Ok(required.len() + optional.len())
    } else {
        Err(parse_error(
            source,
            line_of(header),
            None,
            format!(
                "bad header `{}`: expected `{expected}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ))
    }
}

fn check_width(source: &Source, rec: &csv::StringRecord, width: usize) -> Result<(), CliError> {
    if rec.len() != width {
        return Err(parse_error(
            source,
            line_of(rec),
            None,
            format!("expected {width} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

fn check_unique<'a>(
    source: &Source,
    seen: &mut HashSet<String>,
    rec: &csv::StringRecord,
    id: &'a str,
) -> Result<&'a str, CliError> {
    if id.is_empty() {
        return Err(parse_error(source, line_of(rec), Some("study_id"), "empty study_id"));
    }
    if !seen.insert(id.to_owned()) {
        return Err(parse_error(
            source,
            line_of(rec),
            Some("study_id"),
            format!("duplicate study_id `{id}`"),
        ));
    }
    Ok(id)
}

/// Parses a counts file into validated-syntax [`StudyCounts`].
///
/// Range checks (zero counts, covariate limit, name count) are left to
/// `compute_spaces` so that overflow can be reported separately.
pub fn parse_counts(source: &Source) -> Result<Vec<StudyCounts>, CliError> {
    let recs = records(source)?;
    let width = check_header(source, recs.first(), &COUNTS_HEADER[..5], &COUNTS_HEADER[5..])?;
    let mut seen = HashSet::new();
    let mut studies = Vec::with_capacity(recs.len().saturating_sub(1));
    for rec in recs.iter().skip(1) {
        check_width(source, rec, width)?;
        let id = check_unique(source, &mut seen, rec, &rec[0])?;
        let int = |col: usize| {
            rec[col].parse::<u32>().map_err(|_| {
                parse_error(
                    source,
                    line_of(rec),
                    Some(COUNTS_HEADER[col]),
                    format!("expected a nonnegative integer, got `{}`", &rec[col]),
                )
            })
        };
        let mut counts = StudyCounts::new(id, int(1)?, int(2)?, int(3)?, int(4)?);
        if width == 6 {
            let names: Vec<String> = rec[5]
                .split(';')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(str::to_owned)
                .collect();
            if !names.is_empty() || counts.covariates == 0 {
                counts.covariate_names = Some(names);
            }
        }
        studies.push(counts);
    }
    Ok(studies)
}

/// Parses an effects file. Numeric rows are checked with the same rules
/// used for p-value conversion so errors carry a line number.
pub fn parse_effects(source: &Source) -> Result<Vec<EffectRecord>, CliError> {
    let recs = records(source)?;
    let width = check_header(source, recs.first(), &EFFECTS_HEADER, &[])?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(recs.len().saturating_sub(1));
    for rec in recs.iter().skip(1) {
        check_width(source, rec, width)?;
        let id = check_unique(source, &mut seen, rec, &rec[0])?;
        let label = &rec[1];
        let ns = match &rec[6] {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_error(
                    source,
                    line_of(rec),
                    Some("ns"),
                    format!("expected 0 or 1, got `{other}`"),
                ))
            }
        };
        if ns {
            out.push(EffectRecord::not_significant(id, label));
            continue;
        }
        let number = |col: usize| {
            let text = &rec[col];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
                _ => Err(parse_error(
                    source,
                    line_of(rec),
                    Some(EFFECTS_HEADER[col]),
                    format!("expected a positive number, got `{text}`"),
                )),
            }
        };
        let level = if rec[5].is_empty() {
            DEFAULT_CONFIDENCE_LEVEL
        } else {
            number(5)?
        };
        let record = EffectRecord::interval(id, label, number(2)?, number(3)?, number(4)?).with_level(level);
        p_from_ratio_ci(&record).map_err(|e| parse_error(source, line_of(rec), None, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}
