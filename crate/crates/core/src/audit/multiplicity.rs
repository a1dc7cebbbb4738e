use serde::Serialize;

use super::AuditError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplicity {
    pub alpha: f64,
    pub tests: u64,
    pub adjusted_alpha: f64,
    pub n_significant_raw: usize,
    pub n_significant_adjusted: usize,
}

/// Bonferroni threshold alpha/m and how many p-values fall strictly below
/// each threshold.
pub fn multiplicity_report(pvalues: &[f64], alpha: f64, m: u64) -> Result<Multiplicity, AuditError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AuditError::InvalidAlpha { alpha });
    }
    if m == 0 {
        return Err(AuditError::ZeroTests);
    }
    let adjusted_alpha = alpha / m as f64;
    Ok(Multiplicity {
        alpha,
        tests: m,
        adjusted_alpha,
        n_significant_raw: pvalues.iter().filter(|&&p| p < alpha).count(),
        n_significant_adjusted: pvalues.iter().filter(|&&p| p < adjusted_alpha).count(),
    })
}
