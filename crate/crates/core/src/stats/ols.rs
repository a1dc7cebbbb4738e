//! Ordinary least squares through a Householder QR factorization.

use super::student_t::student_t_sf;
use super::StatError;

/// Dense n × k design matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, StatError> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(StatError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Design {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Polynomial design `[1, x, x², …, x^degree]` for each x.
    pub fn polynomial(xs: &[f64], degree: usize) -> Self {
        let cols = degree + 1;
        let mut data = Vec::with_capacity(xs.len() * cols);
        for &x in xs {
            let mut v = 1.0;
            for _ in 0..cols {
                data.push(v);
                v *= x;
            }
        }
        Design {
            rows: xs.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_statistics: Vec<f64>,
    /// Two-sided, against Student-t with `df` degrees of freedom.
    pub p_values: Vec<f64>,
    pub df: usize,
    pub residual_sum_squares: f64,
    /// RSS / (n − k). Snapped to zero when the fit is exact to rounding.
    pub residual_variance: f64,
}

impl OlsFit {
    pub fn fitted(&self, design: &Design, row: usize) -> f64 {
        (0..design.cols())
            .map(|j| design.get(row, j) * self.coefficients[j])
            .sum()
    }
}

/// Fits `response ≈ design · β` by least squares.
///
/// When the residuals are at the rounding floor the fit is treated as exact:
/// standard errors are zero and each coefficient is reported with t = 0,
/// p = 1 if its contribution is negligible, t = ±∞, p = 0 otherwise.
pub fn ols_fit(design: &Design, response: &[f64]) -> Result<OlsFit, StatError> {
    let n = design.rows();
    let k = design.cols();
    if response.len() != n {
        return Err(StatError::DimensionMismatch {
            expected: n,
            found: response.len(),
        });
    }
    if n <= k {
        return Err(StatError::TooFewObservations { n, k });
    }
    if let Some(&bad) = design
        .data
        .iter()
        .chain(response.iter())
        .find(|v| !v.is_finite())
    {
        return Err(StatError::NonFinite { value: bad });
    }

    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..n).map(|i| design.get(i, j)).collect())
        .collect();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut qty = response.to_vec();

    for j in 0..k {
        let alpha = norm(&a[j][j..]);
        if col_norms[j] == 0.0 || alpha <= 1e-10 * col_norms[j] {
            return Err(StatError::RankDeficient { column: j });
        }
        let alpha = if a[j][j] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            let reflect = |col: &mut [f64]| {
                let dot: f64 = v.iter().zip(col.iter()).map(|(x, y)| x * y).sum();
                let s = 2.0 * dot / vnorm2;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            };
            for col in a.iter_mut().skip(j) {
                reflect(&mut col[j..]);
            }
            reflect(&mut qty[j..]);
        }
    }

    // Back substitution R β = (Qᵀy)[..k]; R[i][j] lives in a[j][i].
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in i + 1..k {
            s -= a[j][i] * beta[j];
        }
        beta[i] = s / a[i][i];
    }

    // R⁻¹, upper triangular.
    let mut rinv = vec![vec![0.0; k]; k];
    for col in 0..k {
        rinv[col][col] = 1.0 / a[col][col];
        for i in (0..col).rev() {
            let mut s = 0.0;
            for m in i + 1..=col {
                s += a[m][i] * rinv[m][col];
            }
            rinv[i][col] = -s / a[i][i];
        }
    }
    let unscaled_var: Vec<f64> = (0..k)
        .map(|j| (j..k).map(|m| rinv[j][m] * rinv[j][m]).sum())
        .collect();

    let rss: f64 = (0..n)
        .map(|i| {
            let fitted: f64 = (0..k).map(|j| design.get(i, j) * beta[j]).sum();
            let r = response[i] - fitted;
            r * r
        })
        .sum();
    let y_norm2: f64 = response.iter().map(|y| y * y).sum();
    let df = n - k;
    let noise_floor = n as f64 * (16.0 * f64::EPSILON).powi(2) * y_norm2;
    let exact = rss <= noise_floor;
    let residual_variance = if exact { 0.0 } else { rss / df as f64 };

    let y_norm = y_norm2.sqrt();
    let mut standard_errors = Vec::with_capacity(k);
    let mut t_statistics = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for j in 0..k {
        let se = (residual_variance * unscaled_var[j]).sqrt();
        let (t, p) = if exact {
            if beta[j].abs() * col_norms[j] <= 1e-9 * y_norm {
                (0.0, 1.0)
            } else {
                (f64::INFINITY.copysign(beta[j]), 0.0)
            }
        } else {
            let t = beta[j] / se;
            let p = (2.0 * student_t_sf(t.abs(), df as f64)?).min(1.0);
            (t, p)
        };
        standard_errors.push(se);
        t_statistics.push(t);
        p_values.push(p);
    }

    Ok(OlsFit {
        coefficients: beta,
        standard_errors,
        t_statistics,
        p_values,
        df,
        residual_sum_squares: rss,
        residual_variance,
    })
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}
