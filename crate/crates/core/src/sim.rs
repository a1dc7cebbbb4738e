//! Monte Carlo model of an analyst who runs K correlated tests per study
//! and reports one of them.
//!
//! Study statistics follow a one-factor model,
//! z_j = δ + √ρ·g + √(1−ρ)·e_j with g and e_j independent N(0,1), and
//! p_j = 2(1 − Φ(|z_j|)). Every replicate draws from its own ChaCha8
//! stream keyed by (seed, replicate index), so results do not depend on
//! how replicates are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::audit::{EffectRecord, PValuePlot, P_FLOOR};
use crate::stats::{normal_sf_unchecked, std_normal_quantile};

/// Upper bound on replicates × tests per study.
pub const MAX_DRAWS: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{field}: {message}")]
    InvalidField {
        field: &'static str,
        message: String,
    },
    #[error("replicates × tests_per_study = {draws} exceeds the cap of {MAX_DRAWS}")]
    ResourceLimit { draws: u128 },
    #[error("no study passed the publication screen")]
    AllCensored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Report the test with the smallest p-value.
    ReportMinP,
    /// Report the first test with p < alpha, or the first test if none is.
    ReportFirstSignificant,
    /// Report a test chosen uniformly at random.
    ReportRandom,
}

impl SelectionRule {
    pub fn label(self) -> &'static str {
        match self {
            SelectionRule::ReportMinP => "report-min-p",
            SelectionRule::ReportFirstSignificant => "report-first-significant",
            SelectionRule::ReportRandom => "report-random",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.trim() {
            "report-min-p" | "min-p" => Some(SelectionRule::ReportMinP),
            "report-first-significant" | "first-significant" => {
                Some(SelectionRule::ReportFirstSignificant)
            }
            "report-random" | "random" => Some(SelectionRule::ReportRandom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    /// Size of the simulated meta-analysis drawn from the published studies.
    pub n_studies: usize,
    /// K, the number of tests available in each study.
    pub tests_per_study: usize,
    /// ρ, equicorrelation among a study's test statistics.
    pub correlation: f64,
    /// δ, mean shift on the z scale.
    pub true_effect: f64,
    pub selection_rule: SelectionRule,
    /// Publication screen.
    pub alpha: f64,
    /// Drop studies whose selected p is not below `alpha`.
    pub censor_at_alpha: bool,
    /// Number of simulated studies.
    pub replicates: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_studies: 14,
            tests_per_study: 1,
            correlation: 0.0,
            true_effect: 0.0,
            selection_rule: SelectionRule::ReportMinP,
            alpha: 0.05,
            censor_at_alpha: false,
            replicates: 1000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |field, message: &str| {
            Err(SimError::InvalidField {
                field,
                message: message.to_owned(),
            })
        };
        if self.n_studies == 0 {
            return invalid("n_studies", "must be at least 1");
        }
        if self.tests_per_study == 0 {
            return invalid("tests_per_study", "must be at least 1");
        }
        if self.replicates == 0 {
            return invalid("replicates", "must be at least 1");
        }
        if self.correlation.is_nan() || self.correlation < 0.0 {
            return invalid("correlation", "correlation must be >= 0");
        }
        if self.correlation >= 1.0 {
            return invalid("correlation", "correlation must be < 1");
        }
        if !self.true_effect.is_finite() {
            return invalid("true_effect", "must be finite");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid("alpha", "must lie in (0, 1)");
        }
        let draws = self.replicates as u128 * self.tests_per_study as u128;
        if draws > u128::from(MAX_DRAWS) {
            return Err(SimError::ResourceLimit { draws });
        }
        Ok(())
    }

    /// The deterministic random stream for one replicate.
    pub fn stream(&self, replicate: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        rng
    }
}

/// The test a study ends up reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectedTest {
    /// 0-based index among the study's K tests.
    pub test_index: usize,
    pub p: f64,
    /// The selected z statistic.
    pub z: f64,
}

fn two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf_unchecked(z.abs())).clamp(P_FLOOR, 1.0)
}

/// Simulates one study's K tests and applies the selection rule.
///
/// `config` is assumed valid.
pub fn simulate_study<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> SelectedTest {
    let shared_weight = config.correlation.sqrt();
    let own_weight = (1.0 - config.correlation).sqrt();
    let shared: f64 = rng.sample(StandardNormal);
    let draw = |rng: &mut R| {
        let e: f64 = rng.sample(StandardNormal);
        config.true_effect + shared_weight * shared + own_weight * e
    };

    match config.selection_rule {
        SelectionRule::ReportMinP => {
            // Smallest two-sided p is largest |z|; compare on |z| so p-values
            // that underflow to the floor do not tie.
            let mut best = (0, draw(rng));
            for j in 1..config.tests_per_study {
                let z = draw(rng);
                if z.abs() > best.1.abs() {
                    best = (j, z);
                }
            }
            SelectedTest {
                test_index: best.0,
                p: two_sided_p(best.1),
                z: best.1,
            }
        }
        SelectionRule::ReportFirstSignificant => {
            let zs: Vec<f64> = (0..config.tests_per_study).map(|_| draw(rng)).collect();
            let chosen = zs
                .iter()
                .position(|&z| two_sided_p(z) < config.alpha)
                .unwrap_or(0);
            SelectedTest {
                test_index: chosen,
                p: two_sided_p(zs[chosen]),
                z: zs[chosen],
            }
        }
        SelectionRule::ReportRandom => {
            let zs: Vec<f64> = (0..config.tests_per_study).map(|_| draw(rng)).collect();
            let chosen = rng.random_range(0..config.tests_per_study);
            SelectedTest {
                test_index: chosen,
                p: two_sided_p(zs[chosen]),
                z: zs[chosen],
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub selected: SelectedTest,
    /// Selected p below alpha.
    pub significant: bool,
}

/// Recomputes a single replicate from its stream.
pub fn replicate_record(config: &SimConfig, replicate: usize) -> ReplicateRecord {
    let selected = simulate_study(config, &mut config.stream(replicate));
    ReplicateRecord {
        replicate,
        selected,
        significant: selected.p < config.alpha,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Reported studies in replicate order: all of them, or only the
    /// significant ones when censoring is on.
    pub published: Vec<ReplicateRecord>,
    /// Fraction of replicates whose selected p is below alpha, whether or
    /// not censoring is applied.
    pub publication_rate: f64,
    /// Mean selected z minus δ over reported studies.
    pub bias: Option<f64>,
    /// Mean selected |z| minus |δ| over reported studies.
    pub absolute_bias: Option<f64>,
    pub mean_abs_estimate: Option<f64>,
}

impl SimResult {
    pub fn reported_pvalues(&self) -> Vec<f64> {
        self.published.iter().map(|r| r.selected.p).collect()
    }

    pub fn selected_estimates(&self) -> Vec<f64> {
        self.published.iter().map(|r| r.selected.z).collect()
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let records: Vec<ReplicateRecord> = (0..config.replicates)
        .into_par_iter()
        .map(|r| replicate_record(config, r))
        .collect();

    // Sequential reduction in replicate order keeps the sums reproducible.
    let significant = records.iter().filter(|r| r.significant).count();
    let published: Vec<ReplicateRecord> = if config.censor_at_alpha {
        records.into_iter().filter(|r| r.significant).collect()
    } else {
        records
    };
    let (mut sum, mut sum_abs) = (0.0, 0.0);
    for r in &published {
        sum += r.selected.z;
        sum_abs += r.selected.z.abs();
    }
    let count = published.len() as f64;
    let (bias, absolute_bias, mean_abs_estimate) = if published.is_empty() {
        (None, None, None)
    } else {
        (
            Some(sum / count - config.true_effect),
            Some(sum_abs / count - config.true_effect.abs()),
            Some(sum_abs / count),
        )
    };
    Ok(SimResult {
        published,
        publication_rate: significant as f64 / config.replicates as f64,
        bias,
        absolute_bias,
        mean_abs_estimate,
    })
}

/// Mean selected estimate minus δ.
pub fn selection_bias(result: &SimResult, config: &SimConfig) -> Result<f64, SimError> {
    if result.published.is_empty() {
        return Err(SimError::AllCensored);
    }
    let mean = result.published.iter().map(|r| r.selected.z).sum::<f64>()
        / result.published.len() as f64;
    Ok(mean - config.true_effect)
}

/// Mean selected |estimate| minus |δ|.
pub fn absolute_selection_bias(result: &SimResult, config: &SimConfig) -> Result<f64, SimError> {
    if result.published.is_empty() {
        return Err(SimError::AllCensored);
    }
    let mean = result.published.iter().map(|r| r.selected.z.abs()).sum::<f64>()
        / result.published.len() as f64;
    Ok(mean - config.true_effect.abs())
}

/// P-value plot of the first `n_studies` reported studies, if any were reported.
pub fn meta_analysis_plot(result: &SimResult, config: &SimConfig) -> Option<PValuePlot> {
    let take = config.n_studies.min(result.published.len());
    if take == 0 {
        return None;
    }
    let ps: Vec<f64> = result.published[..take].iter().map(|r| r.selected.p).collect();
    Some(PValuePlot::from_pvalues(&ps))
}

/// Expresses reported studies as ratio estimates with 95% intervals.
///
/// The selected z becomes ln(ratio) = z·`log_se`, with the interval
/// exp((z ∓ 1.959964…)·`log_se`), so converting back recovers the p-value.
pub fn to_effect_records(result: &SimResult, log_se: f64, id_prefix: &str) -> Vec<EffectRecord> {
    let crit = std_normal_quantile(0.975).expect("0.975 is a valid probability");
    result
        .published
        .iter()
        .map(|r| {
            let z = r.selected.z;
            EffectRecord::interval(
                format!("{id_prefix}{:07}", r.replicate),
                format!("simulated study, test {} selected", r.selected.test_index + 1),
                (z * log_se).exp(),
                ((z - crit) * log_se).exp(),
                ((z + crit) * log_se).exp(),
            )
        })
        .collect()
}
