//! Generalised Fisher information toolkit.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerics:
//!
//! - [`quadrature`]: adaptive Gauss-Kronrod integration, the single integration
//!   authority used everywhere else.
//! - [`distributions`]: parametric densities with analytic scores.
//! - [`hierarchy`]: the scalar hierarchy `I_n`, its generating functional
//!   `I_λ`, the two-parameter form `I_{a,b}` and joint (product) systems.
//! - [`bounds`]: information generating function `Q_q`, Hölder exponent
//!   triples and the generalised Cramér-Rao inequality.
//! - [`divergence`]: Kullback-Leibler divergences, their small-shift limits
//!   and the KL-Hessian route to the Fisher matrix.
//! - [`matrix`]: the matrix hierarchy `[I_n]` and its generating functional.
//! - [`geometry`]: Christoffel symbols, curvature and geodesics of a hierarchy
//!   member used as a metric on the `(μ, σ)` half-plane.
//! - [`special`]: the Gauss hypergeometric series.
//!
//! IO, command-line parsing and file formats live in the companion `fisher`
//! crate.

#![no_std]
// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `num_traits::Float` supplies float math without std; when std is linked
// elsewhere in the graph its inherent methods win and the import goes unused.

extern crate alloc;

pub mod bounds;
pub mod distributions;
pub mod divergence;
mod error;
pub mod geometry;
pub mod hierarchy;
pub mod matrix;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use distributions::{Density, Exponential, Normal, ParameterPoint};
pub use quadrature::{IntegralResult, QuadratureSpec};
