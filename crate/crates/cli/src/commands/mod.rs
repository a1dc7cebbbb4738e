mod audit;
mod plot;
mod simulate;
mod space;

use std::path::{Path, PathBuf};

use metaudit_core::search_space::{
    compute_spaces, covariate_tally, summarize_spaces, CovariateTally, SearchSpace, SpaceSummary,
    StudyCounts,
};
use serde_json::{json, Value};

use crate::input::{parse_counts, Source};
use crate::output::fmt_float;
use crate::CliError;

pub use audit::cmd_audit;
pub use plot::cmd_plot;
pub use simulate::{cmd_simulate, resolve_config, SimSettings};
pub use space::cmd_space;

/// What a command printed and which files it wrote.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

pub(crate) struct LoadedSpaces {
    pub source: Source,
    pub studies: Vec<StudyCounts>,
    pub spaces: Vec<SearchSpace>,
    pub summary: SpaceSummary,
    pub tally: CovariateTally,
}

pub(crate) fn load_spaces(path: &Path) -> Result<LoadedSpaces, CliError> {
    let source = Source::read(path)?;
    let studies = parse_counts(&source)?;
    if studies.is_empty() {
        return Err(CliError::Empty(format!("{} has no study rows", path.display())));
    }
    let spaces = studies
        .iter()
        .map(compute_spaces)
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_spaces(&spaces)?;
    let tally = covariate_tally(&studies);
    Ok(LoadedSpaces {
        source,
        studies,
        spaces,
        summary,
        tally,
    })
}

pub(crate) fn digest_entry(source: &Source) -> Value {
    json!({
        "file": source.name(),
        "sha256": crate::output::sha256_hex(&source.bytes),
    })
}

pub(crate) fn spaces_json(loaded: &LoadedSpaces) -> Value {
    Value::Array(
        loaded
            .studies
            .iter()
            .zip(&loaded.spaces)
            .map(|(c, s)| {
                json!({
                    "study_id": c.study_id,
                    "outcomes": c.outcomes,
                    "predictors": c.predictors,
                    "lags": c.lags,
                    "covariates": c.covariates,
                    "space1": s.space1,
                    "space2": s.space2,
                    "space3": s.space3,
                })
            })
            .collect(),
    )
}

pub(crate) fn spaces_rows(loaded: &LoadedSpaces) -> Vec<Vec<String>> {
    loaded
        .studies
        .iter()
        .zip(&loaded.spaces)
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
        .collect()
}

pub(crate) const SPACES_HEADER: [&str; 8] = [
    "study_id",
    "outcomes",
    "predictors",
    "lags",
    "covariates",
    "space1",
    "space2",
    "space3",
];

pub(crate) const SEARCH_SPACE_NOTE: &str = "Search spaces are lower bounds: space 2 ignores covariate interactions, and covariates a study never names cannot be counted.";

pub(crate) fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}
