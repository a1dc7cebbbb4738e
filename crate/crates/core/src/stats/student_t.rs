use super::special::regularized_incomplete_beta;
use super::StatError;

/// Upper tail P(T > t) of Student's t with `df` degrees of freedom.
///
/// Uses P(|T| > |t|) = I_{df/(df+t²)}(df/2, 1/2).
pub fn student_t_sf(t: f64, df: f64) -> Result<f64, StatError> {
    if !t.is_finite() {
        return Err(StatError::NonFinite { value: t });
    }
    if df.is_nan() || df < 1.0 {
        return Err(StatError::InvalidDegreesOfFreedom { df });
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
    Ok(if t > 0.0 { tail } else { 1.0 - tail })
}
