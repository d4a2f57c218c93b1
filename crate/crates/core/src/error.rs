use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("RK4 step rejected at t = {t} s: intermediate concentration {value} < 0 (dt = {dt} s too large)")]
    StepRejected { t: f64, dt: f64, value: f64 },

    #[error("state space of {states} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("probability normalization drifted by {drift:e} at t = {t} s")]
    NormalizationDrift { t: f64, drift: f64 },

    #[error("step size underflow at t = {t} s (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("polynomial degree ({degree_x}, {degree_y}) exceeds truncation order ({order_x}, {order_y})")]
    TruncationOrder {
        degree_x: usize,
        degree_y: usize,
        order_x: usize,
        order_y: usize,
    },

    #[error("matrix has complex eigenvalues")]
    ComplexEigenvalues,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
