//! Error types shared across the crate.

use thiserror::Error;

/// One of the four diagnosis margins of the paired table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginKind {
    /// `n_A`, positive diagnoses of test A.
    PositiveA,
    /// `n_B`, positive diagnoses of test B.
    PositiveB,
    /// `nbar_A`, negative diagnoses of test A.
    NegativeA,
    /// `nbar_B`, negative diagnoses of test B.
    NegativeB,
}

impl std::fmt::Display for MarginKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MarginKind::PositiveA => "n_A",
            MarginKind::PositiveB => "n_B",
            MarginKind::NegativeA => "nbar_A",
            MarginKind::NegativeB => "nbar_B",
        };
        f.write_str(s)
    }
}

/// One of the four predictive values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictiveValueKind {
    PositiveA,
    PositiveB,
    NegativeA,
    NegativeB,
}

impl std::fmt::Display for PredictiveValueKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PredictiveValueKind::PositiveA => "PPV_A",
            PredictiveValueKind::PositiveB => "PPV_B",
            PredictiveValueKind::NegativeA => "NPV_A",
            PredictiveValueKind::NegativeB => "NPV_B",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("margin {0} is empty: the corresponding predictive value is undefined")]
    EmptyMargin(MarginKind),

    #[error(
        "{0} is zero: ratio-scale inference is undefined (enable zero substitution to proceed)"
    )]
    ZeroPredictiveValue(PredictiveValueKind),

    #[error("variance of {0} is zero: the statistic is undefined")]
    ZeroVariance(&'static str),

    #[error("covariance matrix is singular (det = {det:e}, tolerance = {tol:e}): the global statistic is undefined for this table")]
    SingularMatrix { det: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid margin: {0}")]
    InvalidMargin(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
