use thiserror::Error;

/// Errors raised by model construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CbitclError {
    /// An argument lies outside the effective domain of an exponent.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model parameter violates its family constraints.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Derivative of the branching mechanism requested at an endpoint where it is infinite.
    #[error("derivative of the branching mechanism is unavailable at the endpoint {0}")]
    EndpointDerivativeUnavailable(f64),

    /// A side condition of a theorem-backed routine does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Requested horizon is not below the explosion time of the exponential moment.
    #[error("horizon {horizon} is not below the lifetime {lifetime}")]
    LifetimeExceeded { horizon: f64, lifetime: f64 },

    /// The long-run limit is only defined on the set where chi >= 0.
    #[error("argument {0} is outside the set where chi(u) >= 0")]
    NotInX(f64),

    /// An exponential tilt would leave the supported parametric families.
    #[error("tilt leaves the supported jump families: {0}")]
    FamilyClosure(String),

    /// ODE step size underflow or step budget exhausted.
    #[error("ODE solver did not converge: {0}")]
    Nonconvergence(String),

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Simulation or CLI configuration problem.
    #[error("configuration error: {0}")]
    Config(String),

    /// Random number stream exhausted or misconfigured.
    #[error("rng error: {0}")]
    Rng(String),

    /// A price outside the open no-arbitrage interval was passed to the implied volatility solver.
    #[error("price {price} is outside the no-arbitrage bounds ({lower}, {upper})")]
    OutOfBounds { price: f64, lower: f64, upper: f64 },

    /// Model file parse failure.
    #[error("model file error in [{section}] key `{key}`: {message}")]
    ModelFile {
        section: String,
        key: String,
        message: String,
    },
}

/// Coarse classification used for exit codes and error prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Numeric,
    Config,
}

impl CbitclError {
    pub fn kind(&self) -> ErrorKind {
        use CbitclError::*;
        match self {
            Domain(_)
            | InvalidParameter(_)
            | EndpointDerivativeUnavailable(_)
            | Precondition(_)
            | LifetimeExceeded { .. }
            | NotInX(_)
            | FamilyClosure(_)
            | OutOfBounds { .. } => ErrorKind::Domain,
            Nonconvergence(_) | Quadrature(_) | Rng(_) => ErrorKind::Numeric,
            Config(_) | ModelFile { .. } => ErrorKind::Config,
        }
    }
}

pub type Result<T> = std::result::Result<T, CbitclError>;
