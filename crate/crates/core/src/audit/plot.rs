use std::cmp::Ordering;

use serde::Serialize;

use super::{p_from_ratio_ci, AuditError, EffectRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueRecord {
    pub study_id: String,
    pub p: f64,
    /// 1-based position after sorting by (p, study_id).
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPValues {
    pub records: Vec<PValueRecord>,
    pub excluded_ns: usize,
}

/// Converts every numeric record to a p-value and ranks them ascending.
///
/// Not-significant records are dropped and counted. Ties in p are broken
/// by study id so the order never depends on input order.
pub fn rank_pvalues(records: &[EffectRecord]) -> Result<RankedPValues, AuditError> {
    if records.is_empty() {
        return Err(AuditError::Empty);
    }
    let mut converted = Vec::with_capacity(records.len());
    let mut excluded_ns = 0;
    for record in records {
        if record.is_not_significant() {
            excluded_ns += 1;
            continue;
        }
        converted.push((p_from_ratio_ci(record)?, record.study_id.as_str()));
    }
    if converted.is_empty() {
        return Err(AuditError::AllNotSignificant { count: excluded_ns });
    }
    converted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let records = converted
        .into_iter()
        .enumerate()
        .map(|(i, (p, id))| PValueRecord {
            study_id: id.to_owned(),
            p,
            rank: i + 1,
        })
        .collect();
    Ok(RankedPValues {
        records,
        excluded_ns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotPoint {
    pub rank: usize,
    pub p: f64,
}

/// Ranked p-values against the integers, with the uniform reference
/// i/(n+1) (the expected i-th order statistic of n uniforms).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValuePlot {
    pub points: Vec<PlotPoint>,
    pub reference_line: Vec<PlotPoint>,
    pub excluded_ns_count: usize,
    pub n: usize,
}

impl PValuePlot {
    pub fn from_ranked(ranked: &RankedPValues) -> Self {
        let ps: Vec<f64> = ranked.records.iter().map(|r| r.p).collect();
        Self::from_sorted(&ps, ranked.excluded_ns)
    }

    /// Builds a plot from bare p-values (sorted here).
    pub fn from_pvalues(pvalues: &[f64]) -> Self {
        let mut ps = pvalues.to_vec();
        ps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Self::from_sorted(&ps, 0)
    }

    fn from_sorted(ps: &[f64], excluded_ns_count: usize) -> Self {
        let n = ps.len();
        let points = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| PlotPoint { rank: i + 1, p })
            .collect();
        let reference_line = (1..=n)
            .map(|rank| PlotPoint {
                rank,
                p: rank as f64 / (n + 1) as f64,
            })
            .collect();
        PValuePlot {
            points,
            reference_line,
            excluded_ns_count,
            n,
        }
    }

    pub fn pvalues(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.p).collect()
    }

    pub fn ranks(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.rank as f64).collect()
    }
}

pub fn build_pvalue_plot(records: &[EffectRecord]) -> Result<PValuePlot, AuditError> {
    Ok(PValuePlot::from_ranked(&rank_pvalues(records)?))
}
