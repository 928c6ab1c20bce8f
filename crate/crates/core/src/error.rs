use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument {value} outside the analytic domain (must exceed {bound})")]
    Domain { value: f64, bound: f64 },

    #[error("problem rejected by class gate: {0}")]
    Gate(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate}, error bound {error}")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("scale function roots are complex for eta = {eta}; evaluate through a tilt instead")]
    ComplexRoots { eta: f64 },

    #[error("Laplace inversion unstable at x = {x}: {coarse} (64 nodes) vs {fine} (128 nodes)")]
    Inversion { x: f64, coarse: f64, fine: f64 },

    #[error("simulation truncated on {rate:.4} of paths (limit {limit})")]
    Truncation { rate: f64, limit: f64 },

    #[error("invalid simulation configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
