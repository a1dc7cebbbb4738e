use serde::Serialize;

use super::{AuditError, PValuePlot};
use crate::stats::{ks_uniform_test, ols_fit, Design, OlsFit, TestMethod, TestResult};

/// Below this the KS verdict is reported as insufficient data.
pub const MIN_UNIFORMITY_POINTS: usize = 5;
pub const MIN_BILINEARITY_POINTS: usize = 4;
pub const MIN_HOCKEY_STICK_POINTS: usize = 6;

/// KS test of the plotted p-values against U(0,1).
///
/// Always computed when the plot has at least one point; callers decide
/// how to treat fewer than [`MIN_UNIFORMITY_POINTS`].
pub fn uniformity_test(plot: &PValuePlot) -> Result<TestResult, AuditError> {
    if plot.n == 0 {
        return Err(AuditError::InsufficientPoints {
            test: "uniformity test",
            needed: 1,
            found: 0,
        });
    }
    Ok(ks_uniform_test(&plot.pvalues())?)
}

/// OLS of sorted p on {1, rank, rank²}.
///
/// Ranks are centred before squaring. That leaves the rank² coefficient and
/// its t statistic unchanged and keeps the design well conditioned; the
/// intercept and linear coefficients refer to the centred rank.
pub fn quadratic_fit(plot: &PValuePlot) -> Result<OlsFit, AuditError> {
    if plot.n < MIN_BILINEARITY_POINTS {
        return Err(AuditError::InsufficientPoints {
            test: "bilinearity test",
            needed: MIN_BILINEARITY_POINTS,
            found: plot.n,
        });
    }
    let centre = (plot.n + 1) as f64 / 2.0;
    let xs: Vec<f64> = plot.ranks().iter().map(|r| r - centre).collect();
    Ok(ols_fit(&Design::polynomial(&xs, 2), &plot.pvalues())?)
}

/// t-test on the quadratic term of [`quadratic_fit`], df = n − 3.
pub fn bilinearity_test(plot: &PValuePlot) -> Result<TestResult, AuditError> {
    let fit = quadratic_fit(plot)?;
    Ok(TestResult {
        statistic: fit.t_statistics[2],
        p_value: fit.p_values[2],
        df: Some(fit.df as f64),
        method: TestMethod::QuadraticOls,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HockeyStickFit {
    /// Last rank of the left segment.
    pub breakpoint: usize,
    pub left_intercept: f64,
    pub left_slope: f64,
    pub right_intercept: f64,
    pub right_slope: f64,
    /// Combined SSE of the two segment fits.
    pub sse: f64,
    /// SSE of one line through all points.
    pub single_line_sse: f64,
}

struct Line {
    intercept: f64,
    slope: f64,
    sse: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>();
    // Guard against a negative rounding residue in degenerate fits.
    let sse = sse.min(syy).max(0.0);
    Line {
        intercept,
        slope,
        sse,
    }
}

/// Exhaustive two-segment least-squares fit over breakpoints 2..=n−2.
///
/// SSEs within 1e-12 of the total sum of squares count as ties and go to
/// the smaller breakpoint.
pub fn hockey_stick_fit(plot: &PValuePlot) -> Result<HockeyStickFit, AuditError> {
    let n = plot.n;
    if n < MIN_HOCKEY_STICK_POINTS {
        return Err(AuditError::InsufficientPoints {
            test: "hockey-stick fit",
            needed: MIN_HOCKEY_STICK_POINTS,
            found: n,
        });
    }
    let xs = plot.ranks();
    let ys = plot.pvalues();
    let single = fit_line(&xs, &ys);
    let mean = ys.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let tie_tolerance = 1e-12 * total_ss.max(f64::MIN_POSITIVE);

    let mut best: Option<(usize, Line, Line, f64)> = None;
    for k in 2..=n - 2 {
        let left = fit_line(&xs[..k], &ys[..k]);
        let right = fit_line(&xs[k..], &ys[k..]);
        let sse = left.sse + right.sse;
        let better = match &best {
            None => true,
            Some((_, _, _, best_sse)) => sse < best_sse - tie_tolerance,
        };
        if better {
            best = Some((k, left, right, sse));
        }
    }
    let (breakpoint, left, right, sse) = best.expect("n >= 6 gives at least one breakpoint");
    Ok(HockeyStickFit {
        breakpoint,
        left_intercept: left.intercept,
        left_slope: left.slope,
        right_intercept: right.intercept,
        right_slope: right.slope,
        sse: sse.min(single.sse),
        single_line_sse: single.sse,
    })
}
