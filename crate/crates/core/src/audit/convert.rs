use super::{AuditError, EffectRecord, Estimate, P_FLOOR};
use crate::stats::{normal_sf_unchecked, std_normal_quantile};

/// Two-sided p-value for a ratio statistic from its confidence interval.
///
/// The interval is taken to be symmetric on the log scale, so
/// se = (ln hi − ln lo) / (2z) with z the normal critical value for the
/// record's confidence level, and p = 2·(1 − Φ(|ln ratio| / se)).
/// The result is clamped to [1e-300, 1].
pub fn p_from_ratio_ci(record: &EffectRecord) -> Result<f64, AuditError> {
    let id = || record.study_id.clone();
    let Estimate::Interval {
        ratio,
        ci_low,
        ci_high,
        confidence_level,
    } = record.estimate
    else {
        return Err(AuditError::NotSignificant { study_id: id() });
    };

    if !(confidence_level > 0.5 && confidence_level < 1.0) {
        return Err(AuditError::InvalidLevel {
            study_id: id(),
            level: confidence_level,
        });
    }
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !(positive(ratio) && positive(ci_low) && positive(ci_high)) {
        return Err(AuditError::NonPositive { study_id: id() });
    }
    if ci_low >= ci_high {
        return Err(AuditError::DegenerateInterval {
            study_id: id(),
            ci_low,
            ci_high,
        });
    }
    if ratio < ci_low || ratio > ci_high {
        return Err(AuditError::RatioOutsideInterval {
            study_id: id(),
            ratio,
        });
    }

    let z_crit = std_normal_quantile(0.5 * (1.0 + confidence_level))?;
    let se = (ci_high.ln() - ci_low.ln()) / (2.0 * z_crit);
    let statistic = ratio.ln() / se;
    let p = 2.0 * normal_sf_unchecked(statistic.abs());
    Ok(p.clamp(P_FLOOR, 1.0))
}
