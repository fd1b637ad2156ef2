//! Parametric density families with analytic scores.
//!
//! Every family exposes its log-density, its score (the gradient of the
//! log-density in the parameters) and the derivative of the log-density in
//! `x`. Scores are always analytic; finite differences appear only in tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::{self, QuadratureSpec, Support};
use crate::{Error, Result};

/// Ordered parameter coordinates with their names.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    values: Vec<f64>,
    labels: Vec<String>,
}

impl ParameterPoint {
    pub fn new(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if values.is_empty() || values.len() != labels.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} values for {} labels",
                values.len(),
                labels.len()
            )));
        }
        Ok(Self { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A one-dimensional parametric density `p(x | θ)`.
///
/// The unchecked evaluators (`pdf`, `ln_pdf`, `score_component`, ...) are
/// the quadrature hot path and assume `x` lies in the support; the checked
/// entry points are [`eval_pdf`] and [`eval_score`].
pub trait Density: Send + Sync {
    fn family(&self) -> &'static str;

    fn parameter_labels(&self) -> &'static [&'static str];

    fn parameter_values(&self) -> Vec<f64>;

    /// Same family at new parameter coordinates.
    fn with_params(&self, values: &[f64]) -> Result<Self>
    where
        Self: Sized;

    fn support(&self) -> Support;

    fn ln_pdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `∂ ln p / ∂θ_i` at `x`.
    fn score_component(&self, x: f64, i: usize) -> f64;

    /// `∂ ln p / ∂x`.
    fn dln_pdf_dx(&self, x: f64) -> f64;

    /// Mean of the density (the centre used for central moments).
    fn mean(&self) -> f64;

    /// Index of a parameter that is an unbiased location for a single
    /// observation (`E[x] = θ_i`), if the family has one.
    fn location_index(&self) -> Option<usize> {
        None
    }

    /// Closed form of `∫ (x - mean)^order p^power dx`, when known.
    fn weighted_central_moment_exact(&self, _order: u32, _power: u32) -> Option<f64> {
        None
    }

    fn dim(&self) -> usize {
        self.parameter_labels().len()
    }

    fn parameters(&self) -> ParameterPoint {
        ParameterPoint {
            values: self.parameter_values(),
            labels: self.parameter_labels().iter().map(|s| String::from(*s)).collect(),
        }
    }

    fn score_into(&self, x: f64, out: &mut [f64]) {
        for (i, s) in out.iter_mut().enumerate() {
            *s = self.score_component(x, i);
        }
    }
}

fn check_support<D: Density + ?Sized>(model: &D, x: f64) -> Result<()> {
    let s = model.support();
    if x.is_nan() || !s.contains(x) {
        return Err(Error::OutOfSupport {
            x,
            lower: s.lower,
            upper: s.upper,
        });
    }
    Ok(())
}

pub(crate) fn check_param_index<D: Density + ?Sized>(model: &D, i: usize) -> Result<()> {
    if i >= model.dim() {
        return Err(Error::InvalidParameter(alloc::format!(
            "parameter index {i} out of range for {} ({} parameters)",
            model.family(),
            model.dim()
        )));
    }
    Ok(())
}

/// `p(x | θ)`, with a domain error outside the support.
pub fn eval_pdf<D: Density + ?Sized>(model: &D, x: f64) -> Result<f64> {
    check_support(model, x)?;
    Ok(model.pdf(x))
}

/// The score vector `[∂_1 ln p, …, ∂_N ln p]` at `x`.
pub fn eval_score<D: Density + ?Sized>(model: &D, x: f64) -> Result<Vec<f64>> {
    check_support(model, x)?;
    let mut out = vec![0.0; model.dim()];
    model.score_into(x, &mut out);
    Ok(out)
}

/// `∫ (x - mean)^order p^weight_power dx`.
///
/// The weight `p^weight_power` is used as is, without renormalisation. Uses
/// the family's closed form when it has one, quadrature otherwise.
pub fn central_moment<D: Density + ?Sized>(
    model: &D,
    order: u32,
    weight_power: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if weight_power < 1 {
        return Err(Error::InvalidParameter("weight_power must be at least 1".into()));
    }
    if let Some(v) = model.weighted_central_moment_exact(order, weight_power) {
        return Ok(v);
    }
    central_moment_by_quadrature(model, order, weight_power, spec)
}

/// Quadrature route of [`central_moment`], ignoring any closed form.
pub fn central_moment_by_quadrature<D: Density + ?Sized>(
    model: &D,
    order: u32,
    weight_power: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if weight_power < 1 {
        return Err(Error::InvalidParameter("weight_power must be at least 1".into()));
    }
    let mean = model.mean();
    let n = weight_power as f64;
    let r = quadrature::integrate(
        |x| (x - mean).powi(order as i32) * (n * model.ln_pdf(x)).exp(),
        &model.support(),
        spec,
    )?
    .require_converged()?;
    Ok(r.value)
}

/// Normal family with parameters `θ = (μ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mu: f64,
    sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("mu must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Density for Normal {
    fn family(&self) -> &'static str {
        "normal"
    }

    fn parameter_labels(&self) -> &'static [&'static str] {
        &["mu", "sigma"]
    }

    fn parameter_values(&self) -> Vec<f64> {
        vec![self.mu, self.sigma]
    }

    fn with_params(&self, values: &[f64]) -> Result<Self> {
        match values {
            [mu, sigma] => Normal::new(*mu, *sigma),
            _ => Err(Error::InvalidParameter(alloc::format!(
                "normal takes 2 parameters, got {}",
                values.len()
            ))),
        }
    }

    fn support(&self) -> Support {
        Support::gaussian(self.mu, self.sigma)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - 0.5 * (2.0 * PI).ln()
    }

    fn score_component(&self, x: f64, i: usize) -> f64 {
        let z = x - self.mu;
        let s2 = self.sigma * self.sigma;
        match i {
            0 => z / s2,
            1 => z * z / (s2 * self.sigma) - 1.0 / self.sigma,
            _ => 0.0,
        }
    }

    fn dln_pdf_dx(&self, x: f64) -> f64 {
        -(x - self.mu) / (self.sigma * self.sigma)
    }

    fn mean(&self) -> f64 {
        self.mu
    }

    fn location_index(&self) -> Option<usize> {
        Some(0)
    }

    fn weighted_central_moment_exact(&self, order: u32, power: u32) -> Option<f64> {
        // p^w = (2πσ²)^(-w/2) exp(-w z² / (2σ²))
        let w = power as f64;
        let s2 = self.sigma * self.sigma;
        let prefactor = (2.0 * PI * s2).powf(-0.5 * w);
        quadrature::gaussian_moment(order as i64, 2.0 * s2 / w)
            .ok()
            .map(|m| prefactor * m)
    }
}

/// Exponential family `p(x) = r exp(-r x)` on `[0, ∞)` with the rate as its
/// single parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Density for Exponential {
    fn family(&self) -> &'static str {
        "exponential"
    }

    fn parameter_labels(&self) -> &'static [&'static str] {
        &["rate"]
    }

    fn parameter_values(&self) -> Vec<f64> {
        vec![self.rate]
    }

    fn with_params(&self, values: &[f64]) -> Result<Self> {
        match values {
            [rate] => Exponential::new(*rate),
            _ => Err(Error::InvalidParameter(alloc::format!(
                "exponential takes 1 parameter, got {}",
                values.len()
            ))),
        }
    }

    fn support(&self) -> Support {
        Support::half_line(0.0, self.rate)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.rate.ln() - self.rate * x
    }

    fn score_component(&self, x: f64, i: usize) -> f64 {
        match i {
            0 => 1.0 / self.rate - x,
            _ => 0.0,
        }
    }

    fn dln_pdf_dx(&self, _x: f64) -> f64 {
        -self.rate
    }

    fn mean(&self) -> f64 {
        1.0 / self.rate
    }
}

/// `φ_{n-1} = p^n`, the power-transformed density of hierarchy order `n`.
///
/// Not normalised for `n > 1`: its integral is the information generating
/// function `Q_n`.
#[derive(Debug, Clone, Copy)]
pub struct TransformedDensity<'a, D: ?Sized> {
    base: &'a D,
    power: u32,
}

impl<'a, D: Density + ?Sized> TransformedDensity<'a, D> {
    pub fn new(base: &'a D, power: u32) -> Result<Self> {
        if power < 1 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        Ok(Self { base, power })
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.power == 1 {
            self.base.pdf(x)
        } else {
            self.ln_value(x).exp()
        }
    }

    pub fn ln_value(&self, x: f64) -> f64 {
        self.power as f64 * self.base.ln_pdf(x)
    }

    /// `∂ ln φ / ∂θ_i = n ∂ ln p / ∂θ_i`.
    pub fn score_component(&self, x: f64, i: usize) -> f64 {
        self.power as f64 * self.base.score_component(x, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_pdf_examples() {
        let n = Normal::standard();
        let peak = eval_pdf(&n, 0.0).unwrap();
        assert!((peak - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(eval_pdf(&n, 1.0).unwrap(), eval_pdf(&n, -1.0).unwrap());
        let shifted = Normal::new(2.0, 1.0).unwrap();
        assert_eq!(eval_pdf(&shifted, 2.0).unwrap(), peak);
    }

    #[test]
    fn normal_score_examples() {
        let n = Normal::standard();
        assert_eq!(eval_score(&n, 0.0).unwrap(), vec![0.0, -1.0]);
        assert_eq!(eval_score(&n, 1.0).unwrap(), vec![1.0, 0.0]);
        let m = Normal::new(1.0, 2.0).unwrap();
        let s = eval_score(&m, 3.0).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15);
        assert!(s[1].abs() < 1e-15);
    }

    #[test]
    fn out_of_support_is_domain_error() {
        let e = Exponential::new(1.0).unwrap();
        assert!(matches!(eval_pdf(&e, -0.1), Err(Error::OutOfSupport { .. })));
        assert!(matches!(eval_score(&e, f64::NAN), Err(Error::OutOfSupport { .. })));
        assert!(eval_pdf(&e, 0.0).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Normal::new(0.0, 0.0).is_err());
        assert!(Normal::new(0.0, -1.0).is_err());
        assert!(Normal::new(f64::NAN, 1.0).is_err());
        assert!(Exponential::new(0.0).is_err());
        assert!(Normal::standard().with_params(&[1.0]).is_err());
        assert!(ParameterPoint::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn central_moment_examples() {
        let spec = QuadratureSpec::default();
        let n = Normal::standard();
        assert!((central_moment(&n, 2, 1, &spec).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(central_moment(&n, 1, 1, &spec).unwrap(), 0.0);
        // ∫ z⁴ e^{-z²} dz / (2π) = (3/4)√π / (2π)
        let expected = 3.0 / (8.0 * PI.sqrt());
        assert!((central_moment(&n, 4, 2, &spec).unwrap() - expected).abs() < 1e-15);
        assert!((central_moment_by_quadrature(&n, 4, 2, &spec).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.211_571_1).abs() < 1e-7);
    }

    #[test]
    fn exponential_moments_by_quadrature() {
        let spec = QuadratureSpec::default();
        let e = Exponential::new(2.0).unwrap();
        // variance 1/r², falls back to quadrature
        let v = central_moment(&e, 2, 1, &spec).unwrap();
        assert!((v - 0.25).abs() < 1e-10);
    }

    #[test]
    fn transformed_density_powers() {
        let n = Normal::new(0.3, 1.7).unwrap();
        let t1 = TransformedDensity::new(&n, 1).unwrap();
        assert_eq!(t1.value(0.9), n.pdf(0.9));
        let t3 = TransformedDensity::new(&n, 3).unwrap();
        assert!((t3.value(0.9) - n.pdf(0.9).powi(3)).abs() < 1e-15);
        assert!((t3.score_component(0.9, 1) - 3.0 * n.score_component(0.9, 1)).abs() < 1e-15);
        assert!(TransformedDensity::new(&n, 0).is_err());
    }

    #[test]
    fn parameter_point_labels() {
        let p = Normal::new(1.0, 2.0).unwrap().parameters();
        assert_eq!(p.values(), &[1.0, 2.0]);
        assert_eq!(p.index_of("sigma"), Some(1));
        assert_eq!(p.index_of("rate"), None);
    }
}
