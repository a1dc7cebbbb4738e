//! Audit of reported ratio statistics.
//!
//! Each study's ratio and confidence interval is turned into a two-sided
//! p-value on the log scale. The p-values are ranked into a p-value plot
//! and checked three ways: a KS test against the uniform distribution
//! (no effect anywhere), a quadratic-in-rank regression (curvature, the
//! signature of a flat run of tiny p-values followed by a uniform run) and
//! a two-segment line fit that locates the bend.

mod convert;
mod diagnostics;
mod multiplicity;
mod plot;

use serde::Serialize;
use thiserror::Error;

use crate::search_space::SpaceSummary;
use crate::stats::{StatError, TestResult};

pub use convert::p_from_ratio_ci;
pub use diagnostics::{
    bilinearity_test, hockey_stick_fit, quadratic_fit, uniformity_test, HockeyStickFit,
    MIN_BILINEARITY_POINTS, MIN_HOCKEY_STICK_POINTS, MIN_UNIFORMITY_POINTS,
};
pub use multiplicity::{multiplicity_report, Multiplicity};
pub use plot::{build_pvalue_plot, rank_pvalues, PValuePlot, PValueRecord, PlotPoint, RankedPValues};

pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.95;

/// Smallest p-value ever reported.
pub const P_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("no effect records")]
    Empty,
    #[error("all {count} records are flagged not significant")]
    AllNotSignificant { count: usize },
    #[error("record {study_id} is flagged not significant and has no interval")]
    NotSignificant { study_id: String },
    #[error("record {study_id}: ratio and interval bounds must be positive and finite")]
    NonPositive { study_id: String },
    #[error("record {study_id}: degenerate interval ({ci_low} to {ci_high})")]
    DegenerateInterval {
        study_id: String,
        ci_low: f64,
        ci_high: f64,
    },
    #[error("record {study_id}: ratio {ratio} lies outside its interval")]
    RatioOutsideInterval { study_id: String, ratio: f64 },
    #[error("record {study_id}: confidence level {level} must lie in (0.5, 1)")]
    InvalidLevel { study_id: String, level: f64 },
    #[error("{test} needs at least {needed} points, got {found}")]
    InsufficientPoints {
        test: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("significance level {alpha} must lie in (0, 1)")]
    InvalidAlpha { alpha: f64 },
    #[error("number of tests must be at least 1")]
    ZeroTests,
    #[error(transparent)]
    Stat(#[from] StatError),
}

/// What a study reported for its headline effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimate {
    Interval {
        ratio: f64,
        ci_low: f64,
        ci_high: f64,
        confidence_level: f64,
    },
    /// Reported only as "not significant", without numbers.
    NotSignificant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectRecord {
    pub study_id: String,
    pub label: String,
    pub estimate: Estimate,
}

impl EffectRecord {
    pub fn interval(
        study_id: impl Into<String>,
        label: impl Into<String>,
        ratio: f64,
        ci_low: f64,
        ci_high: f64,
    ) -> Self {
        EffectRecord {
            study_id: study_id.into(),
            label: label.into(),
            estimate: Estimate::Interval {
                ratio,
                ci_low,
                ci_high,
                confidence_level: DEFAULT_CONFIDENCE_LEVEL,
            },
        }
    }

    pub fn not_significant(study_id: impl Into<String>, label: impl Into<String>) -> Self {
        EffectRecord {
            study_id: study_id.into(),
            label: label.into(),
            estimate: Estimate::NotSignificant,
        }
    }

    /// Replaces the confidence level; no effect on not-significant records.
    pub fn with_level(mut self, level: f64) -> Self {
        if let Estimate::Interval {
            confidence_level, ..
        } = &mut self.estimate
        {
            *confidence_level = level;
        }
        self
    }

    pub fn is_not_significant(&self) -> bool {
        matches!(self.estimate, Estimate::NotSignificant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticStatus {
    Ok,
    InsufficientData,
}

/// A diagnostic that may have been skipped for lack of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic<T> {
    pub status: DiagnosticStatus,
    pub result: Option<T>,
}

impl<T> Diagnostic<T> {
    fn ok(result: T) -> Self {
        Diagnostic {
            status: DiagnosticStatus::Ok,
            result: Some(result),
        }
    }

    fn insufficient(result: Option<T>) -> Self {
        Diagnostic {
            status: DiagnosticStatus::InsufficientData,
            result,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == DiagnosticStatus::Ok
    }
}

impl Diagnostic<TestResult> {
    /// `Some(true)` when the test ran and rejects at `alpha`.
    pub fn rejects(&self, alpha: f64) -> Option<bool> {
        match (&self.status, &self.result) {
            (DiagnosticStatus::Ok, Some(r)) => Some(r.p_value < alpha),
            _ => None,
        }
    }
}

/// The three plot diagnostics, each possibly skipped for lack of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotDiagnostics {
    pub uniformity: Diagnostic<TestResult>,
    pub bilinearity: Diagnostic<TestResult>,
    pub hockey_stick: Diagnostic<HockeyStickFit>,
}

/// Runs the uniformity, bilinearity and hockey-stick diagnostics.
///
/// The KS statistic is always reported; with fewer than
/// [`MIN_UNIFORMITY_POINTS`] points its verdict is marked insufficient.
pub fn diagnose(plot: &PValuePlot) -> Result<PlotDiagnostics, AuditError> {
    let uniformity_result = uniformity_test(plot)?;
    let uniformity = if plot.n >= MIN_UNIFORMITY_POINTS {
        Diagnostic::ok(uniformity_result)
    } else {
        Diagnostic::insufficient(Some(uniformity_result))
    };
    let bilinearity = match bilinearity_test(plot) {
        Ok(r) => Diagnostic::ok(r),
        Err(AuditError::InsufficientPoints { .. }) => Diagnostic::insufficient(None),
        Err(e) => return Err(e),
    };
    let hockey_stick = match hockey_stick_fit(plot) {
        Ok(r) => Diagnostic::ok(r),
        Err(AuditError::InsufficientPoints { .. }) => Diagnostic::insufficient(None),
        Err(e) => return Err(e),
    };
    Ok(PlotDiagnostics {
        uniformity,
        bilinearity,
        hockey_stick,
    })
}

/// Bonferroni view using a study-level search space as the number of tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicitySection {
    pub median_space3: f64,
    #[serde(flatten)]
    pub report: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub pvalues: Vec<PValueRecord>,
    pub plot: PValuePlot,
    pub uniformity: Diagnostic<TestResult>,
    pub bilinearity: Diagnostic<TestResult>,
    pub hockey_stick: Diagnostic<HockeyStickFit>,
    pub multiplicity: Option<MultiplicitySection>,
}

/// Runs the full pipeline over `records`.
///
/// Diagnostics that need more points than are available are marked
/// [`DiagnosticStatus::InsufficientData`] rather than failing the audit.
/// When `spaces` is given, its median space 3 (rounded to the nearest
/// integer, at least 1) is the number of tests for the Bonferroni section.
pub fn audit(
    records: &[EffectRecord],
    spaces: Option<&SpaceSummary>,
    alpha: f64,
) -> Result<AuditReport, AuditError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AuditError::InvalidAlpha { alpha });
    }
    let ranked = rank_pvalues(records)?;
    let plot = PValuePlot::from_ranked(&ranked);

    let PlotDiagnostics {
        uniformity,
        bilinearity,
        hockey_stick,
    } = diagnose(&plot)?;

    let multiplicity = match spaces {
        Some(summary) => {
            let median = summary.space3.median;
            let m = (median.round() as u64).max(1);
            let ps: Vec<f64> = ranked.records.iter().map(|r| r.p).collect();
            Some(MultiplicitySection {
                median_space3: median,
                report: multiplicity_report(&ps, alpha, m)?,
            })
        }
        None => None,
    };

    Ok(AuditReport {
        alpha,
        pvalues: ranked.records,
        plot,
        uniformity,
        bilinearity,
        hockey_stick,
        multiplicity,
    })
}
