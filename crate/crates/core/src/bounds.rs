//! Information generating function and the Hölder-type generalisation of the
//! Cramér-Rao inequality.
//!
//! For an unbiased estimator `Θ̂` and Hölder conjugates `1/α + 1/β = 1`,
//!
//! ```text
//! Q_q / q ≤ [∫ |Θ̂ - θ|^β p dx]^(1/β) · [∫ (∂ ln p)^α p^(α(q-1)+1) dx]^(1/α)
//! ```
//!
//! With `α = 2n` and `q = (3n-1)/(2n)` the second factor weights by `p^n`,
//! tying the bound to hierarchy order `n`. At `n = 1` it is the ordinary
//! Cramér-Rao inequality.

use alloc::format;

use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::One;

use crate::distributions::{check_param_index, Density};
use crate::hierarchy::integrate_over;
use crate::quadrature::{self, QuadratureSpec};
use crate::{Error, Result};

/// `Q_q = ∫ p^q dx` for `q ≥ 1`.
pub fn info_generating<D: Density + ?Sized>(model: &D, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("information generating function needs q >= 1, got {q}")));
    }
    Ok(integrate_over(model, spec, |x| (q * model.ln_pdf(x)).exp())?.value)
}

/// Exponents `(q, β, α)` paired with hierarchy order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HolderTriple {
    pub order: u32,
    pub q: Ratio<i64>,
    pub beta: Ratio<i64>,
    pub alpha: Ratio<i64>,
}

impl HolderTriple {
    /// `1/α + 1/β == 1`, exactly.
    pub fn conjugate(&self) -> bool {
        self.alpha.recip() + self.beta.recip() == Ratio::one()
    }

    /// Density power `α(q - 1) + 1` carried by the score factor.
    pub fn density_power(&self) -> Ratio<i64> {
        self.alpha * (self.q - Ratio::one()) + Ratio::one()
    }
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(q, β, α) = ((3n-1)/(2n), 2n/(2n-1), 2n)`.
pub fn holder_triple(n: u32) -> Result<HolderTriple> {
    if n < 1 {
        return Err(Error::InvalidParameter("Hölder triple needs order n >= 1".into()));
    }
    let n = n as i64;
    Ok(HolderTriple {
        order: n as u32,
        q: Ratio::new(3 * n - 1, 2 * n),
        beta: Ratio::new(2 * n, 2 * n - 1),
        alpha: Ratio::from_integer(2 * n),
    })
}

/// Estimator entering the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// `Θ̂ = x` from one observation; unbiased for a location parameter.
    Identity,
}

impl Estimator {
    fn value(&self, x: f64) -> f64 {
        match self {
            Estimator::Identity => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub triple: HolderTriple,
    /// `Q_q / q`.
    pub lhs: f64,
    /// Product of the two Hölder factors.
    pub rhs: f64,
    pub margin: f64,
    /// Slack allowed for quadrature error when deciding `holds`.
    pub tolerance: f64,
    pub holds: bool,
    /// `∫ (Θ̂ - θ) p^q dx`, the incomplete q-expectation of the estimator
    /// error. Reported only; it vanishes for estimators symmetric about θ.
    pub q_expectation: f64,
}

/// Evaluates both sides of the generalised Cramér-Rao inequality at order `n`.
///
/// The β-moment uses `|Θ̂ - θ|^β`, which keeps fractional β meaningful.
pub fn verify_bound<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    n: u32,
    estimator: Estimator,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    check_param_index(model, param_index)?;
    let triple = holder_triple(n)?;
    match estimator {
        Estimator::Identity if model.location_index() == Some(param_index) => {}
        Estimator::Identity => {
            return Err(Error::InvalidParameter(format!(
                "identity estimator is not unbiased for parameter '{}' of {}",
                model.parameter_labels()[param_index],
                model.family()
            )))
        }
    }
    let theta = model.parameter_values()[param_index];
    let q = to_f64(triple.q);
    let beta = to_f64(triple.beta);
    let alpha = to_f64(triple.alpha);
    let weight = to_f64(triple.density_power());

    let q_q = integrate_over(model, spec, |x| (q * model.ln_pdf(x)).exp())?;

    // |Θ̂ - θ|^β has a kink at θ: give the quadrature a panel edge there.
    let (lo, hi) = model.support().truncated(spec.trunc_k);
    let err = |x: f64| estimator.value(x) - theta;
    let beta_integrand = |x: f64| err(x).abs().powf(beta) * model.pdf(x);
    let moment = if lo < theta && theta < hi {
        quadrature::integrate_pieces(beta_integrand, &[lo, theta, hi], spec)?
    } else {
        quadrature::integrate_range(beta_integrand, lo, hi, spec)?
    }
    .require_converged()?;

    let score_power = integrate_over(model, spec, |x| {
        model.score_component(x, param_index).powf(alpha) * (weight * model.ln_pdf(x)).exp()
    })?;
    let q_expectation =
        integrate_over(model, spec, |x| err(x) * (q * model.ln_pdf(x)).exp())?.value;

    let lhs = q_q.value / q;
    let rhs = moment.value.powf(1.0 / beta) * score_power.value.powf(1.0 / alpha);
    let lhs_err = q_q.error_estimate / q;
    let rhs_err = rhs
        * (moment.error_estimate / (beta * moment.value)
            + score_power.error_estimate / (alpha * score_power.value));
    let tolerance = lhs_err + rhs_err + 1e-12 * rhs.abs().max(lhs.abs());
    let margin = rhs - lhs;
    Ok(BoundReport {
        triple,
        lhs,
        rhs,
        margin,
        tolerance,
        holds: lhs <= rhs + tolerance,
        q_expectation,
    })
}
