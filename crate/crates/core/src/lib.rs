//! Reliability auditing for meta-analyses built on observational studies.
//!
//! - [`stats`]: distributions, quantiles, OLS and the KS uniformity test.
//! - [`search_space`]: per-study counts of possible analyses and their summaries.
//! - [`audit`]: ratio/CI to p-value conversion, p-value plots and their diagnostics.
//! - [`sim`]: Monte Carlo model of an analyst selecting results from many tests.

pub mod audit;
pub mod search_space;
pub mod sim;
pub mod stats;
