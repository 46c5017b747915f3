use thiserror::Error;

use crate::state::CaseLabel;

/// Errors raised by state validation, case routing and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude a{index} = {value} is negative")]
    NegativeAmplitude { index: usize, value: f64 },

    #[error("phase mu = {0} lies outside [0, pi]")]
    MuOutOfRange(f64),

    #[error("amplitudes are not normalized: sum of squares = {sum_sq} (tolerance {tol:e})")]
    NotNormalized { sum_sq: f64, tol: f64 },

    #[error("a0 = {0} is not above the zero tolerance")]
    A0Zero(f64),

    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("value {value} outside the domain of {what}")]
    DomainError { what: &'static str, value: f64 },

    #[error("candidate generation for {requested:?} called on a {actual:?} state")]
    CaseMismatch { requested: CaseLabel, actual: CaseLabel },

    #[error(
        "no closed-form optimum for the general case (all amplitudes and sin(mu) nonzero); use the numeric optimizer"
    )]
    UnsupportedGeneralCase,

    #[error("message qubit is not normalized: |alpha|^2 + |beta|^2 = {0}")]
    MessageNotNormalized(f64),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
