use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p = {0} must exceed 1")]
    BadExponent(f64),

    #[error("parametrization has vanishing speed {speed:e} at t = {t}")]
    ZeroSpeed { t: f64, speed: f64 },

    #[error("curve is not symmetric about the y-axis (residual {residual:e}, tolerance {tol:e})")]
    SymmetryViolation { residual: f64, tol: f64 },

    #[error("curvature is not even about L/2 (residual {residual:e}, tolerance {tol:e})")]
    AsymmetricCurvature { residual: f64, tol: f64 },

    #[error("width profile is not even about L/2 (residual {residual:e}, tolerance {tol:e})")]
    AsymmetricWidth { residual: f64, tol: f64 },

    #[error("width must be positive, found {value} at s = {s}")]
    NonpositiveWidth { s: f64, value: f64 },

    #[error("point (s = {s}, r = {r}) lies outside the domain")]
    OutOfDomain { s: f64, r: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("weight is not even about L/2 (residual {residual:e})")]
    AsymmetricWeight { residual: f64 },

    #[error("weight must be positive, found {value} at index {index}")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("no zero crossing found below mu = {cap:e}")]
    NoCrossing { cap: f64 },

    #[error("integration broke down at s = {s} (mu = {mu})")]
    StiffFailure { s: f64, mu: f64 },

    #[error("no convergence after {iterations} iterations (best value {best})")]
    NonConvergence { iterations: usize, best: f64 },

    #[error("degenerate cell {cell}: metric determinant {det:e}")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    SolveFailure { pivot: usize, value: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("config error at `{key}`: {source}")]
    Expression {
        key: String,
        #[source]
        source: ParseError,
    },

    #[error("config error at `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors raised by a numerical solver rather than by bad input.
    pub fn is_solver_error(&self) -> bool {
        matches!(
            self,
            Error::NoCrossing { .. }
                | Error::StiffFailure { .. }
                | Error::NonConvergence { .. }
                | Error::DegenerateCell { .. }
                | Error::SolveFailure { .. }
        )
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}
