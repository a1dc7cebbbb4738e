use super::StatError;

/// Sample quantile with (n+1)-position linear interpolation (Hyndman–Fan type 6).
///
/// Position h = (n+1)·p is clamped to [1, n]; the result interpolates
/// between the order statistics either side of h.
pub fn quantile_type6(values: &[f64], p: f64) -> Result<f64, StatError> {
    if values.is_empty() {
        return Err(StatError::EmptyInput);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(StatError::ProbabilityOutOfRange { value: p });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatError::NonFinite { value: bad });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let h = ((n + 1) as f64 * p).clamp(1.0, n as f64);
    let lo = h.floor() as usize;
    if lo >= n {
        return Ok(sorted[n - 1]);
    }
    let frac = h - lo as f64;
    let (a, b) = (sorted[lo - 1], sorted[lo]);
    Ok(a + frac * (b - a))
}
