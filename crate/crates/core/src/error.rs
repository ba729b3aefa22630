use thiserror::Error;

/// Errors produced by the estimation and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("copula parameter {theta} is outside the parameter space of the {family} family")]
    ParameterDomain { family: &'static str, theta: f64 },
    #[error("{what}: value {value} is outside the admissible domain")]
    Domain { what: &'static str, value: f64 },
    #[error("{0} requires non-empty input")]
    EmptyInput(&'static str),
    #[error("no observation has positive kernel weight at x = {x0} (bandwidth {bandwidth})")]
    EmptyNeighborhood { x0: f64, bandwidth: f64 },
    #[error("only {found} observations with positive weight at x = {x0}, at least {required} needed")]
    TooFewPoints { x0: f64, found: usize, required: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("{failed} of {total} replicates failed, above the 10% cap")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
