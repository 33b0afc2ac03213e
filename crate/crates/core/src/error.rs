use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spin index {index} out of range for {count} spins")]
    SpinIndex { index: usize, count: usize },

    #[error("Fock cutoff {cutoff} too small: tail weight {tail:e} exceeds {threshold:e}")]
    Truncation { cutoff: usize, tail: f64, threshold: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("Hamiltonian is not Hermitian at t = {t:e} s (deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },

    #[error("step size underflow at t = {t:e} s (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("trace drift {drift:e} exceeds {limit:e}")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("oracle dimension {dim} exceeds the limit of {limit}")]
    OracleTooLarge { dim: usize, limit: usize },

    #[error("no root in bracket [{lo:e}, {hi:e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrator self-test failed: {0}")]
    IntegratorCheck(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
