//! Inferential statistics for skill comparisons: pooled two-sample t,
//! paired t, balanced 2×2 ANOVA and the t/F distribution functions behind
//! their p-values.

pub mod anova;
pub mod dist;
pub mod report;
pub mod special;
pub mod ttest;

use thiserror::Error;

pub use anova::{anova_2x2, Anova2x2Result, Effect};
pub use dist::{f_cdf, f_sf, t_cdf, t_two_tailed_p};
pub use report::{format_p, Report, ReportRow};
pub use ttest::{paired_t, two_group_t, TwoGroupResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degrees of freedom must be >= 1, got {0}")]
    InvalidDf(f64),
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("zero variance with unequal means")]
    DegenerateVariance,
    #[error("cells must all have the same number of observations")]
    Unbalanced,
    #[error("observations must be finite")]
    NonFinite,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("continued fraction did not converge")]
    NoConvergence,
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}
