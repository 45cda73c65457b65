use thiserror::Error;

pub type Result<T> = std::result::Result<T, GmfgError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GmfgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("transition at step {step}, state {state}, action {action} is not a distribution (row sum {sum})")]
    BadTransition {
        step: usize,
        state: usize,
        action: usize,
        sum: f64,
    },

    #[error("cost {value} at step {step}, state {state}, action {action} lies outside [0, 1]")]
    CostOutOfRange {
        step: usize,
        state: usize,
        action: usize,
        value: f64,
    },

    #[error("regularization weight must be nonnegative and finite, got {0}")]
    InvalidRegularization(f64),

    #[error("step size {eta} with regularization {lambda} violates eta * lambda <= 1")]
    StepTooLarge { eta: f64, lambda: f64 },

    #[error("step size must be positive and finite, got {0}")]
    InvalidStepSize(f64),

    #[error("gradient has a non-finite entry")]
    NonFiniteGradient,

    #[error("policy row is not strictly positive")]
    NonInteriorPolicy,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("value update before any visit was registered for block {block}, step {step}, state {state}")]
    UnregisteredVisit {
        block: usize,
        step: usize,
        state: usize,
    },

    #[error("action {action} has zero probability and no exploration term")]
    ZeroPropensity { action: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
