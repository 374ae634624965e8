use thiserror::Error;

pub type Result<T> = std::result::Result<T, MoeError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoeError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    /// Probability mass beyond the cutoff exceeds the accepted budget.
    #[error("truncation budget exceeded: tail bound {tail_bound:e} > {limit:e} at dim {dim}")]
    Truncation {
        tail_bound: f64,
        limit: f64,
        dim: usize,
    },

    #[error("negative probability {value:e} at photon number {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("entropy {target} unreachable: {reason}")]
    EntropyUnreachable { target: f64, reason: String },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("dimension {dim} exceeds the limit {limit} of {what}")]
    DimensionLimit {
        what: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("ratio sequence cannot be normalized: {0}")]
    Unnormalizable(String),

    #[error("constraint re-projection failed: {0}")]
    Projection(String),
}

impl MoeError {
    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        MoeError::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    /// True for errors caused by an insufficient photon-number cutoff.
    pub fn is_truncation(&self) -> bool {
        matches!(self, MoeError::Truncation { .. })
    }
}
