//! Scalar Fisher information hierarchy.
//!
//! For a single estimated parameter θ the hierarchy members are
//!
//! ```text
//! I_n = 4 / 2^(2n) ∫ (∂_θ ln p)^(2n) p^n dx
//!     = 4 / (2n)^(2n) ∫ (∂_θ ln φ)^(2n) φ dx,   φ = p^n
//! ```
//!
//! and they are the Taylor coefficients of the generating functional
//! `I_λ = (4/λ) ∫ (exp(λ q'^2) - 1) dx` with `q = sqrt(p)`:
//! `I_λ = Σ λ^(n-1) I_n / n!`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{check_param_index, Density, TransformedDensity};
use crate::quadrature::{self, IntegralResult, QuadratureSpec};
use crate::{Error, Result};

/// Which of the two equivalent expressions produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `4/2^(2n) ∫ (∂ ln p)^(2n) p^n`.
    RawPower,
    /// `4/(2n)^(2n) ∫ (∂ ln φ)^(2n) φ` with `φ = p^n`.
    PhiTransformed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyResult {
    pub order: u32,
    pub value: f64,
    pub form: Form,
    pub error_estimate: f64,
}

/// Both forms of one hierarchy member and their relative disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyMember {
    pub raw: HierarchyResult,
    pub phi: HierarchyResult,
    pub form_agreement: f64,
}

impl HierarchyMember {
    pub fn order(&self) -> u32 {
        self.raw.order
    }

    pub fn value(&self) -> f64 {
        self.raw.value
    }

    pub fn error_estimate(&self) -> f64 {
        self.raw.error_estimate
    }
}

pub(crate) fn integrate_over<D: Density + ?Sized, F: Fn(f64) -> f64>(
    model: &D,
    spec: &QuadratureSpec,
    f: F,
) -> Result<IntegralResult> {
    quadrature::integrate(f, &model.support(), spec)?.require_converged()
}

fn check_order(n: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("hierarchy order must be at least 1".into()));
    }
    Ok(())
}

/// `∫ (∂_i ln p)^k p^n dx`, the building block of the hierarchy and of the
/// joint-system expansion.
pub fn weighted_score_moment<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    k: u32,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    check_param_index(model, param_index)?;
    let w = n as f64;
    integrate_over(model, spec, |x| {
        model.score_component(x, param_index).powi(k as i32) * (w * model.ln_pdf(x)).exp()
    })
}

/// One hierarchy member evaluated in the requested form.
pub fn fisher_n_form<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    n: u32,
    form: Form,
    spec: &QuadratureSpec,
) -> Result<HierarchyResult> {
    check_order(n)?;
    check_param_index(model, param_index)?;
    let two_n = 2 * n as i32;
    let (prefactor, r) = match form {
        Form::RawPower => (
            4.0 / 2f64.powi(two_n),
            weighted_score_moment(model, param_index, 2 * n, n, spec)?,
        ),
        Form::PhiTransformed => {
            let phi = TransformedDensity::new(model, n)?;
            let r = integrate_over(model, spec, |x| {
                phi.score_component(x, param_index).powi(two_n) * phi.value(x)
            })?;
            (4.0 / (2.0 * n as f64).powi(two_n), r)
        }
    };
    Ok(HierarchyResult {
        order: n,
        value: prefactor * r.value,
        form,
        error_estimate: prefactor * r.error_estimate,
    })
}

/// Hierarchy member `I_n` for parameter `param_index`, evaluated in both
/// forms; the forms must agree within their combined error estimates.
/// `n = 1` is the standard Fisher information.
pub fn fisher_n<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<HierarchyMember> {
    let raw = fisher_n_form(model, param_index, n, Form::RawPower, spec)?;
    let phi = fisher_n_form(model, param_index, n, Form::PhiTransformed, spec)?;
    let diff = (raw.value - phi.value).abs();
    let scale = raw.value.abs().max(phi.value.abs());
    if diff > raw.error_estimate + phi.error_estimate + 1e-13 * scale {
        return Err(Error::RouteDisagreement {
            what: "raw-power vs phi-transformed hierarchy member",
            first: raw.value,
            second: phi.value,
        });
    }
    let form_agreement = if scale > 0.0 { diff / scale } else { 0.0 };
    Ok(HierarchyMember {
        raw,
        phi,
        form_agreement,
    })
}

/// Direct quadrature of the generating functional alongside its series.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunctionalResult {
    pub lambda: f64,
    pub direct: f64,
    pub direct_error: f64,
    /// `partial_sums[k]` is `Σ_{n ≤ k+1} λ^(n-1) I_n / n!`.
    pub partial_sums: Vec<f64>,
    pub n_max: u32,
    /// First omitted series term `λ^N I_(N+1) / (N+1)!`.
    pub tail_bound: f64,
}

impl GeneratingFunctionalResult {
    pub fn series(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    pub fn series_gap(&self) -> f64 {
        (self.direct - self.series()).abs()
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Largest `λ` for which `exp(λ max_x g(x))` stays representable, where `g`
/// is sampled on the truncated support.
pub(crate) fn lambda_ceiling<D: Density + ?Sized, G: Fn(f64) -> f64>(
    model: &D,
    spec: &QuadratureSpec,
    g: G,
) -> f64 {
    const SAMPLES: usize = 4001;
    let (lo, hi) = model.support().truncated(spec.trunc_k);
    let peak = (0..SAMPLES)
        .map(|i| g(lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    if peak > 0.0 {
        700.0 / peak
    } else {
        f64::INFINITY
    }
}

/// One-parameter generalised Fisher information `I_λ` by direct quadrature,
/// with the hierarchy series truncated at `n_max`.
///
/// `q'^2` is evaluated as `p (∂ ln p)^2 / 4`, so no square root of the density
/// is taken. `λ → 0` is served by [`fisher_n`] with `n = 1`.
pub fn fisher_lambda<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    lambda: f64,
    n_max: u32,
    spec: &QuadratureSpec,
) -> Result<GeneratingFunctionalResult> {
    check_param_index(model, param_index)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(alloc::format!("lambda must be positive, got {lambda}")));
    }
    check_order(n_max)?;
    let q_prime_sq = |x: f64| {
        let s = model.score_component(x, param_index);
        0.25 * model.pdf(x) * s * s
    };
    let lambda_max = lambda_ceiling(model, spec, q_prime_sq);
    if lambda > lambda_max {
        return Err(Error::Overflow { lambda, lambda_max });
    }
    let direct = integrate_over(model, spec, |x| (lambda * q_prime_sq(x)).exp_m1())?;
    let scale = 4.0 / lambda;

    let mut partial_sums = Vec::with_capacity(n_max as usize);
    let mut acc = 0.0;
    for n in 1..=n_max {
        let i_n = fisher_n(model, param_index, n, spec)?.value();
        acc += lambda.powi(n as i32 - 1) / factorial(n) * i_n;
        partial_sums.push(acc);
    }
    let next = fisher_n(model, param_index, n_max + 1, spec)?.value();
    let tail_bound = lambda.powi(n_max as i32) / factorial(n_max + 1) * next;

    Ok(GeneratingFunctionalResult {
        lambda,
        direct: scale * direct.value,
        direct_error: scale * direct.error_estimate,
        partial_sums,
        n_max,
        tail_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParamResult {
    pub value: f64,
    pub error_estimate: f64,
    /// `b` is an odd integer, so the integrand changes sign wherever `p'` does.
    pub signed: bool,
}

/// Two-parameter generalised Fisher information `I_{a,b} = ∫ p^a (dp/dx)^b dx`.
///
/// Non-integer `b` is only defined where `dp/dx ≥ 0`; a negative slope then
/// surfaces as a non-finite integrand at that abscissa.
pub fn fisher_two_param<D: Density + ?Sized>(
    model: &D,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<TwoParamResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("exponents must be finite".into()));
    }
    let integer_b = b.fract() == 0.0 && b.abs() < i32::MAX as f64;
    // p^a p'^b = p^(a+b) (d ln p / dx)^b
    let r = integrate_over(model, spec, |x| {
        let slope = model.dln_pdf_dx(x);
        let slope_pow = if integer_b {
            slope.powi(b as i32)
        } else {
            slope.powf(b)
        };
        ((a + b) * model.ln_pdf(x)).exp() * slope_pow
    })?;
    Ok(TwoParamResult {
        value: r.value,
        error_estimate: r.error_estimate,
        signed: integer_b && (b as i64) % 2 != 0,
    })
}

/// Exponent pair `(a, b)` of the two-parameter form identified with `I_n`.
///
/// Substituting into `∫ p^a p'^b` reproduces `∫ p'^(2n) p^(-n)`, i.e.
/// `(a, b) = (-n, 2n)`; the density exponent is negative.
pub fn table_2_map(n: u32) -> Result<(i64, i64)> {
    check_order(n)?;
    Ok((-(n as i64), 2 * n as i64))
}

/// `I_{-n,2n} = (2^(2n) / 4) I_n` for location families.
pub fn two_param_scale(n: u32) -> f64 {
    2f64.powi(2 * n as i32) / 4.0
}

/// One independent subsystem of a joint system: a model and the index of the
/// shared parameter in it, or `None` when the subsystem does not depend on it.
#[derive(Debug, Clone, Copy)]
pub struct Subsystem<'a, D: ?Sized> {
    pub model: &'a D,
    pub param: Option<usize>,
}

impl<'a, D: Density + ?Sized> Subsystem<'a, D> {
    pub fn new(model: &'a D, param: Option<usize>) -> Self {
        Self { model, param }
    }

    /// `[∫ s^k p^n dx for k in 0..=2n]`; entry 0 is `Q_n`.
    fn score_moments(&self, n: u32, spec: &QuadratureSpec) -> Result<Vec<f64>> {
        let w = n as f64;
        let q_n = integrate_over(self.model, spec, |x| (w * self.model.ln_pdf(x)).exp())?.value;
        let mut out = vec![0.0; 2 * n as usize + 1];
        out[0] = q_n;
        if let Some(i) = self.param {
            check_param_index(self.model, i)?;
            for k in 1..=2 * n {
                out[k as usize] = weighted_score_moment(self.model, i, k, n, spec)?.value;
            }
        }
        Ok(out)
    }

    fn score(&self, x: f64) -> f64 {
        self.param.map_or(0.0, |i| self.model.score_component(x, i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointFisherResult {
    pub order: u32,
    /// Binomial expansion over products of one-dimensional integrals.
    pub binomial: f64,
    /// Direct tensor-product quadrature over the product density.
    pub direct: f64,
    /// `I_n(first) + I_n(second)`, what additivity would predict.
    pub additive: f64,
    /// Contribution of the mixed terms `0 < k < 2n` of the expansion.
    pub cross_terms: f64,
    /// For `n = 2` only: `(1/4)[Q_2(p_2) I_2(p_1) + Q_2(p_1) I_2(p_2) + 6 I(p_1) I(p_2)]`
    /// with the standard Fisher information `I`. Reported, never asserted.
    pub compact_second_order: Option<f64>,
}

impl JointFisherResult {
    pub fn non_additivity(&self) -> f64 {
        self.binomial - self.additive
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `I_n` of the product density `p_1(x_1) p_2(x_2)` of two independent
/// subsystems sharing the estimated parameter.
///
/// The binomial expansion of `(s_1 + s_2)^(2n)` is checked against direct
/// two-dimensional quadrature (relative agreement `1e-6`).
pub fn joint_fisher_n<D1: Density + ?Sized, D2: Density + ?Sized>(
    first: Subsystem<'_, D1>,
    second: Subsystem<'_, D2>,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<JointFisherResult> {
    check_order(n)?;
    let m1 = first.score_moments(n, spec)?;
    let m2 = second.score_moments(n, spec)?;
    let two_n = 2 * n;
    let prefactor = 4.0 / 2f64.powi(two_n as i32);

    let term = |k: u32| binomial(two_n, k) * m1[(two_n - k) as usize] * m2[k as usize];
    let ends = term(0) + term(two_n);
    let cross: f64 = (1..two_n).map(term).sum();
    let binomial_value = prefactor * (ends + cross);

    let additive = prefactor * (m1[two_n as usize] + m2[two_n as usize]);

    let w = n as f64;
    let range1 = first.model.support().truncated(spec.trunc_k);
    let range2 = second.model.support().truncated(spec.trunc_k);
    let direct = quadrature::integrate_2d(
        |x1, x2| {
            let s = first.score(x1) + second.score(x2);
            s.powi(two_n as i32) * (w * (first.model.ln_pdf(x1) + second.model.ln_pdf(x2))).exp()
        },
        range1,
        range2,
        spec,
    )?
    .require_converged()?;
    let direct_value = prefactor * direct.value;

    let scale = binomial_value.abs().max(direct_value.abs());
    if (binomial_value - direct_value).abs() > 1e-6 * scale + prefactor * direct.error_estimate {
        return Err(Error::RouteDisagreement {
            what: "binomial joint formula vs direct 2D quadrature",
            first: binomial_value,
            second: direct_value,
        });
    }

    let compact_second_order = if n == 2 {
        let i1_first = standard_fisher(&first, spec)?;
        let i1_second = standard_fisher(&second, spec)?;
        let i2_first = prefactor * m1[4];
        let i2_second = prefactor * m2[4];
        Some(0.25 * (m2[0] * i2_first + m1[0] * i2_second + 6.0 * i1_first * i1_second))
    } else {
        None
    };

    Ok(JointFisherResult {
        order: n,
        binomial: binomial_value,
        direct: direct_value,
        additive,
        cross_terms: prefactor * cross,
        compact_second_order,
    })
}

fn standard_fisher<D: Density + ?Sized>(sub: &Subsystem<'_, D>, spec: &QuadratureSpec) -> Result<f64> {
    match sub.param {
        Some(i) => Ok(fisher_n(sub.model, i, 1, spec)?.value()),
        None => Ok(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Exponential, Normal};
    use core::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn standard_fisher_information_of_normal_location() {
        let i1 = fisher_n(&Normal::standard(), 0, 1, &spec()).unwrap();
        assert!((i1.value() - 1.0).abs() < 1e-12);
        let i1 = fisher_n(&Normal::new(0.0, 2.0).unwrap(), 0, 1, &spec()).unwrap();
        assert!((i1.value() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn second_order_member_of_standard_normal() {
        // (4/2⁴) ∫ z⁴ e^{-z²} dz / (2π) = 3 / (32 √π)
        let i2 = fisher_n(&Normal::standard(), 0, 2, &spec()).unwrap();
        let expected = 3.0 / (32.0 * PI.sqrt());
        assert!((i2.value() - expected).abs() < 1e-12);
        assert!((expected - 0.052_892_8).abs() < 1e-7);
        assert!(i2.form_agreement < 1e-12);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(fisher_n(&Normal::standard(), 0, 0, &spec()).is_err());
        assert!(fisher_n(&Normal::standard(), 2, 1, &spec()).is_err());
    }

    #[test]
    fn generating_functional_small_lambda() {
        let r = fisher_lambda(&Normal::standard(), 0, 1e-6, 1, &spec()).unwrap();
        assert!((r.direct - 1.0).abs() < 1e-5);
    }

    #[test]
    fn generating_functional_matches_series() {
        let r = fisher_lambda(&Normal::standard(), 0, 0.1, 6, &spec()).unwrap();
        assert!(r.series_gap() < 1e-6, "{}", r.series_gap());
        assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.direct >= 1.0);
    }

    #[test]
    fn generating_functional_domain_and_overflow() {
        let n = Normal::standard();
        assert!(matches!(fisher_lambda(&n, 0, 0.0, 4, &spec()), Err(Error::Domain(_))));
        assert!(matches!(fisher_lambda(&n, 0, -1.0, 4, &spec()), Err(Error::Domain(_))));
        let narrow = Normal::new(0.0, 1e-3).unwrap();
        match fisher_lambda(&narrow, 0, 1e4, 4, &spec()) {
            Err(Error::Overflow { lambda_max, .. }) => assert!(lambda_max < 1e4),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn two_param_examples() {
        let n = Normal::standard();
        let v = fisher_two_param(&n, -1.0, 2.0, &spec()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert!(!v.signed);
        let v = fisher_two_param(&n, -2.0, 4.0, &spec()).unwrap();
        let i2 = fisher_n(&n, 0, 2, &spec()).unwrap().value();
        assert!((v.value - 4.0 * i2).abs() < 1e-12);
        assert!((v.value - 0.211_571_1).abs() < 1e-7);
        let v = fisher_two_param(&n, 1.0, 0.0, &spec()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let v = fisher_two_param(&n, 0.0, 1.0, &spec()).unwrap();
        assert!(v.signed);
        assert!(v.value.abs() < 1e-12);
    }

    #[test]
    fn fractional_slope_power_on_negative_slope_fails() {
        let n = Normal::standard();
        assert!(matches!(
            fisher_two_param(&n, 0.0, 0.5, &spec()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn table_two_identification() {
        let n = Normal::new(0.4, 1.3).unwrap();
        for order in 1..=4 {
            let (a, b) = table_2_map(order).unwrap();
            assert_eq!((a, b), (-(order as i64), 2 * order as i64));
            let two = fisher_two_param(&n, a as f64, b as f64, &spec()).unwrap().value;
            let i_n = fisher_n(&n, 0, order, &spec()).unwrap().value();
            assert!((two - two_param_scale(order) * i_n).abs() < 1e-9 * two.abs());
        }
        assert!(table_2_map(0).is_err());
    }

    #[test]
    fn joint_first_order_is_additive() {
        let n = Normal::standard();
        let r = joint_fisher_n(Subsystem::new(&n, Some(0)), Subsystem::new(&n, Some(0)), 1, &spec())
            .unwrap();
        assert!((r.binomial - 2.0).abs() < 1e-10);
        assert!((r.direct - 2.0).abs() < 1e-8);
        assert!(r.compact_second_order.is_none());
    }

    #[test]
    fn joint_second_order_is_not_additive() {
        let n = Normal::standard();
        let r = joint_fisher_n(Subsystem::new(&n, Some(0)), Subsystem::new(&n, Some(0)), 2, &spec())
            .unwrap();
        // (1/4)[2 Q_2 ∫z⁴p² + 6 (∫z²p²)²] = 3 / (16 π)
        assert!((r.binomial - 3.0 / (16.0 * PI)).abs() < 1e-12);
        assert!(r.non_additivity().abs() > 1e-3);
        assert!(((r.binomial - r.direct) / r.binomial).abs() < 1e-6);
    }

    #[test]
    fn parameter_free_subsystem_only_weights() {
        let n = Normal::standard();
        let other = Normal::new(0.5, 0.7).unwrap();
        let r = joint_fisher_n(Subsystem::new(&n, Some(0)), Subsystem::new(&other, None), 2, &spec())
            .unwrap();
        let q2 = 1.0 / (2.0 * PI.sqrt() * 0.7);
        let i2 = fisher_n(&n, 0, 2, &spec()).unwrap().value();
        assert!((r.binomial - q2 * i2).abs() < 1e-12);
        assert_eq!(r.cross_terms, 0.0);
    }

    #[test]
    fn exponential_single_parameter_paths() {
        let e = Exponential::new(1.5).unwrap();
        // I_1 = 1 / r²
        let i1 = fisher_n(&e, 0, 1, &spec()).unwrap();
        assert!((i1.value() - 1.0 / 2.25).abs() < 1e-10);
        let i3 = fisher_n(&e, 0, 3, &spec()).unwrap();
        assert!(i3.value() > 0.0);
        assert!(i3.form_agreement < 1e-10);
    }
}
