use alloc::string::String;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("x = {x} lies outside the support [{lower}, {upper}]")]
    OutOfSupport { x: f64, lower: f64, upper: f64 },

    #[error("integrand is not finite at x = {x} (value {value})")]
    NonFinite { x: f64, value: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (value {value}, error estimate {error_estimate})"
    )]
    NotConverged {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("exponential integrand overflows for lambda = {lambda}; largest admissible lambda is {lambda_max}")]
    Overflow { lambda: f64, lambda_max: f64 },

    #[error("{what}: the two evaluation routes disagree ({first} vs {second})")]
    RouteDisagreement {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("metric is singular or not positive definite at ({x}, {y})")]
    SingularMetric { x: f64, y: f64 },

    #[error("geodesic integration unstable: relative energy drift {drift} at step {step}; retry with a smaller step")]
    Unstable { drift: f64, step: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
