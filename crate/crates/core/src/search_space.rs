//! Counting the analyses available to the author of an observational study.
//!
//! A study that examines `outcomes × predictors × lags` questions, each of
//! which can be adjusted by any subset of `covariates`, offers
//!
//! - space 1 = outcomes · predictors · lags questions,
//! - space 2 = 2^covariates covariate-inclusion models,
//! - space 3 = space 1 · space 2 analyses in total.
//!
//! Interactions between covariates are ignored, and covariates an author
//! never mentions cannot be counted, so all three are lower bounds.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::stats::{quantile_type6, StatError};

/// 2^63 still fits in a u64, but the product with space 1 almost never
/// would; anything above this is rejected up front.
pub const MAX_COVARIATES: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("study {study_id}: {field} must be at least 1")]
    ZeroCount {
        study_id: String,
        field: &'static str,
    },
    #[error("study {study_id}: {covariates} covariates exceeds the limit of {MAX_COVARIATES}")]
    TooManyCovariates { study_id: String, covariates: u32 },
    #[error("study {study_id}: search space overflows 64-bit arithmetic")]
    Overflow { study_id: String },
    #[error("study {study_id}: {found} covariate names listed for {expected} covariates")]
    NameCountMismatch {
        study_id: String,
        expected: u32,
        found: usize,
    },
    #[error("no studies to summarize")]
    Empty,
}

impl SpaceError {
    pub fn is_overflow(&self) -> bool {
        matches!(
            self,
            SpaceError::Overflow { .. } | SpaceError::TooManyCovariates { .. }
        )
    }
}

/// Variable counts tallied from one study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyCounts {
    pub study_id: String,
    pub outcomes: u32,
    pub predictors: u32,
    /// Number of lag configurations tested, with the same-day exposure
    /// counting as one. This is not the largest lag index: a study that
    /// tests lags 0, 1 and 2 has `lags = 3`.
    pub lags: u32,
    pub covariates: u32,
    pub covariate_names: Option<Vec<String>>,
}

impl StudyCounts {
    pub fn new(
        study_id: impl Into<String>,
        outcomes: u32,
        predictors: u32,
        lags: u32,
        covariates: u32,
    ) -> Self {
        StudyCounts {
            study_id: study_id.into(),
            outcomes,
            predictors,
            lags,
            covariates,
            covariate_names: None,
        }
    }

    pub fn with_covariate_names<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.covariate_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        for (field, value) in [
            ("outcomes", self.outcomes),
            ("predictors", self.predictors),
            ("lags", self.lags),
        ] {
            if value == 0 {
                return Err(SpaceError::ZeroCount {
                    study_id: self.study_id.clone(),
                    field,
                });
            }
        }
        if self.covariates > MAX_COVARIATES {
            return Err(SpaceError::TooManyCovariates {
                study_id: self.study_id.clone(),
                covariates: self.covariates,
            });
        }
        if let Some(names) = &self.covariate_names {
            if names.len() != self.covariates as usize {
                return Err(SpaceError::NameCountMismatch {
                    study_id: self.study_id.clone(),
                    expected: self.covariates,
                    found: names.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    /// Questions at issue.
    pub space1: u64,
    /// Covariate-inclusion models.
    pub space2: u64,
    /// Total analyses.
    pub space3: u64,
}

pub fn compute_spaces(counts: &StudyCounts) -> Result<SearchSpace, SpaceError> {
    counts.validate()?;
    let overflow = || SpaceError::Overflow {
        study_id: counts.study_id.clone(),
    };
    let space1 = u64::from(counts.outcomes)
        .checked_mul(u64::from(counts.predictors))
        .and_then(|v| v.checked_mul(u64::from(counts.lags)))
        .ok_or_else(overflow)?;
    let space2 = 1u64 << counts.covariates;
    let space3 = space1.checked_mul(space2).ok_or_else(overflow)?;
    Ok(SearchSpace {
        space1,
        space2,
        space3,
    })
}

/// Five-number summary of one space column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub minimum: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub upper_quartile: f64,
    pub maximum: f64,
}

impl ColumnSummary {
    fn of(values: &[f64]) -> Result<Self, StatError> {
        Ok(ColumnSummary {
            minimum: quantile_type6(values, 0.0)?,
            lower_quartile: quantile_type6(values, 0.25)?,
            median: quantile_type6(values, 0.5)?,
            upper_quartile: quantile_type6(values, 0.75)?,
            maximum: quantile_type6(values, 1.0)?,
        })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.minimum,
            self.lower_quartile,
            self.median,
            self.upper_quartile,
            self.maximum,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceSummary {
    pub space1: ColumnSummary,
    pub space2: ColumnSummary,
    pub space3: ColumnSummary,
}

/// Min, type-6 quartiles and max of each space column.
pub fn summarize_spaces(spaces: &[SearchSpace]) -> Result<SpaceSummary, SpaceError> {
    if spaces.is_empty() {
        return Err(SpaceError::Empty);
    }
    let column = |f: fn(&SearchSpace) -> u64| {
        let values: Vec<f64> = spaces.iter().map(|s| f(s) as f64).collect();
        // Inputs are nonempty and finite, so the quantiles cannot fail.
        ColumnSummary::of(&values).expect("quantiles of a nonempty finite column")
    };
    Ok(SpaceSummary {
        space1: column(|s| s.space1),
        space2: column(|s| s.space2),
        space3: column(|s| s.space3),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CovariateTally {
    /// Number of studies naming each covariate.
    pub counts: BTreeMap<String, usize>,
    /// Studies that carried no covariate names.
    pub skipped: Vec<String>,
}

/// Counts how many studies name each covariate.
///
/// Names are trimmed and otherwise compared exactly, so `T`, `mT` and `AT`
/// stay distinct.
pub fn covariate_tally(studies: &[StudyCounts]) -> CovariateTally {
    let mut tally = CovariateTally::default();
    for study in studies {
        let Some(names) = &study.covariate_names else {
            tally.skipped.push(study.study_id.clone());
            continue;
        };
        let unique: BTreeSet<&str> = names
            .iter()
            .map(|n| n.trim())
            .filter(|n| !n.is_empty())
            .collect();
        for name in unique {
            *tally.counts.entry(name.to_owned()).or_insert(0) += 1;
        }
    }
    tally
}
