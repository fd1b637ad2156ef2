//! Kullback-Leibler divergences and their small-shift expansions.
//!
//! Shifting one parameter by `Δ` gives `D(p_θ ‖ p_{θ+Δ}) ≈ Δ² I_1 / 2`. Two
//! routes are available: the exact shifted density, and the first-order
//! shift `p + Δ ∂_θ p = p (1 + Δ s)` which the two-parameter divergence
//! `D_{q,q'} = ∫ p^q (ln(p / (p + Δ ∂_θ p)))^{q'} dx` is built on.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{check_param_index, Density};
use crate::hierarchy::integrate_over;
use crate::matrix::SymMatrix;
use crate::quadrature::{self, QuadratureSpec, Support};
use crate::{Error, Result};

/// `e^w - 1 - w`, accurate for small `w`.
fn expm1_minus_linear(w: f64) -> f64 {
    if w.abs() < 0.5 {
        let mut term = w;
        let mut sum = 0.0;
        for k in 2..40 {
            term *= w / k as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        w.exp_m1() - w
    }
}

/// `u - ln(1 + u)`, accurate for small `u`.
fn linear_minus_ln1p(u: f64) -> f64 {
    if u.abs() < 0.5 {
        let mut power = u;
        let mut sum = 0.0;
        for k in 2..60 {
            power *= -u;
            let term = -power / k as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        u - u.ln_1p()
    }
}

fn union_range(a: &Support, b: &Support, k: f64) -> (f64, f64) {
    let (a0, a1) = a.truncated(k);
    let (b0, b1) = b.truncated(k);
    (a0.min(b0), a1.max(b1))
}

/// `∫ p ln(p / q) dx`.
///
/// Evaluated as `∫ [q - p - p ln(q/p)] dx`, which has the same value (both
/// densities integrate to one) but a pointwise non-negative integrand with
/// no cancellation for nearby densities. The range covers both truncated
/// supports.
pub fn kl<P: Density + ?Sized, Q: Density + ?Sized>(
    p: &P,
    q: &Q,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (sp, sq) = (p.support(), q.support());
    if !sp.same_set(&sq) {
        return Err(Error::InvalidParameter(format!(
            "supports differ: [{}, {}] vs [{}, {}]",
            sp.lower, sp.upper, sq.lower, sq.upper
        )));
    }
    let (lo, hi) = union_range(&sp, &sq, spec.trunc_k);
    let r = quadrature::integrate_range(
        |x| {
            let (lp, lq) = (p.ln_pdf(x), q.ln_pdf(x));
            let w = lq - lp;
            if w.abs() < 0.5 {
                lp.exp() * expm1_minus_linear(w)
            } else {
                lq.exp() - lp.exp() - lp.exp() * w
            }
        },
        lo,
        hi,
        spec,
    )?
    .require_converged()?;
    Ok(r.value.max(0.0))
}

fn shifted<D: Density>(model: &D, param_index: usize, delta: f64) -> Result<D> {
    let mut theta = model.parameter_values();
    theta[param_index] += delta;
    model.with_params(&theta)
}

/// `D(p ‖ p + Δ ∂_θ p)`, the first-order-shift divergence, evaluated as
/// `∫ p (u - ln(1 + u))` with `u = Δ s` (the linear term integrates to zero).
fn linearized_kl<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_positive_shift(model, param_index, delta, spec)?;
    Ok(integrate_over(model, spec, |x| {
        model.pdf(x) * linear_minus_ln1p(delta * model.score_component(x, param_index))
    })?
    .value)
}

/// Fails with a domain error at the first grid abscissa where
/// `1 + Δ s(x) ≤ 0`, i.e. where `p + Δ ∂_θ p` is not a density.
fn check_positive_shift<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<()> {
    const GRID: usize = 2001;
    let (lo, hi) = model.support().truncated(spec.trunc_k);
    for i in 0..GRID {
        let x = lo + (hi - lo) * i as f64 / (GRID - 1) as f64;
        if !model.support().is_interior(x) {
            continue;
        }
        if !(1.0 + delta * model.score_component(x, param_index) > 0.0) {
            return Err(Error::Domain(format!(
                "p + Δ ∂p is not positive at x = {x} (Δ = {delta})"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlLimitSample {
    pub delta: f64,
    /// Divergence to the exactly shifted density.
    pub exact: f64,
    /// Divergence to the first-order shift `p + Δ ∂_θ p`; `None` when that
    /// shift is not a positive density for this `Δ`.
    pub linearized: Option<f64>,
}

impl KlLimitSample {
    pub fn exact_ratio(&self) -> Option<f64> {
        (self.delta != 0.0).then(|| self.exact / (self.delta * self.delta))
    }

    pub fn linearized_ratio(&self) -> Option<f64> {
        match self.linearized {
            Some(v) if self.delta != 0.0 => Some(v / (self.delta * self.delta)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlLimitReport {
    /// `I_1 / 2`.
    pub limit: f64,
    pub samples: Vec<KlLimitSample>,
    /// Smallest consecutive log-log slope of `|D/Δ² - I_1/2|` against `Δ` on
    /// the first-order-shift route. `None` when fewer than two usable
    /// samples exist or an error is exactly zero.
    pub order: Option<f64>,
    /// Same slope for the exact-shift route (often `None`: for location
    /// shifts of the normal the ratio is exact).
    pub exact_order: Option<f64>,
}

impl KlLimitReport {
    pub fn converged(&self, min_order: f64) -> bool {
        self.order.is_some_and(|o| o >= min_order)
    }
}

fn min_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, e)| !(e > 0.0)) {
        return None;
    }
    points
        .windows(2)
        .map(|w| (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln()))
        .reduce(f64::min)
}

/// `D/Δ²` along a sequence of shifts of parameter `param_index`, with the
/// empirical rate at which it approaches `I_1 / 2`.
///
/// The absolute tolerance is scaled by `Δ²` for each shift so that the ratio
/// keeps the requested accuracy. A shift too large for the first-order
/// density is reported (as `linearized = None`) rather than treated as an
/// error.
pub fn kl_fisher_limit<D: Density>(
    model: &D,
    param_index: usize,
    deltas: &[f64],
    spec: &QuadratureSpec,
) -> Result<KlLimitReport> {
    check_param_index(model, param_index)?;
    let limit = 0.5 * crate::hierarchy::fisher_n(model, param_index, 1, spec)?.value();
    let mut samples = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta == 0.0 {
            samples.push(KlLimitSample {
                delta,
                exact: 0.0,
                linearized: Some(0.0),
            });
            continue;
        }
        let local = spec.scaled_abs_tol(delta * delta);
        let exact = kl(model, &shifted(model, param_index, delta)?, &local)?;
        let linearized = match linearized_kl(model, param_index, delta, &local) {
            Ok(v) => Some(v),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        };
        samples.push(KlLimitSample {
            delta,
            exact,
            linearized,
        });
    }
    let curve = |f: fn(&KlLimitSample) -> Option<f64>| -> Option<f64> {
        let pts: Option<Vec<(f64, f64)>> = samples
            .iter()
            .filter(|s| s.delta != 0.0)
            .map(|s| f(s).map(|r| (s.delta.abs(), (r - limit).abs())))
            .collect();
        min_slope(&pts?)
    };
    let order = curve(KlLimitSample::linearized_ratio);
    let exact_order = curve(KlLimitSample::exact_ratio);
    Ok(KlLimitReport {
        limit,
        samples,
        order,
        exact_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceResult {
    pub value: f64,
    pub error_estimate: f64,
    pub shift: f64,
    pub q: f64,
    pub q_prime: f64,
    /// `(-Δ)^{q'} ∫ p^q s^{q'} dx`, the leading small-shift term (integer
    /// `q'` only).
    pub leading_term: Option<f64>,
}

/// Two-parameter divergence `D_{q,q'} = ∫ p^q (ln(p / (p + Δ ∂_θ p)))^{q'} dx`,
/// evaluated literally with the first-order density shift.
///
/// For `(q, q') = (n, 2n)` the leading term is `Δ^{2n} (2^{2n}/4) I_n`; for a
/// location parameter `∫ p^q s^{q'} = (-1)^{q'} I_{q-q', q'}` links it to the
/// two-parameter Fisher form.
pub fn kl_two_param<D: Density + ?Sized>(
    model: &D,
    q: f64,
    q_prime: f64,
    delta: f64,
    param_index: usize,
    spec: &QuadratureSpec,
) -> Result<DivergenceResult> {
    check_param_index(model, param_index)?;
    if !(q > 0.0 && q_prime > 0.0 && q.is_finite() && q_prime.is_finite()) {
        return Err(Error::Domain(format!("need q > 0 and q' > 0, got ({q}, {q_prime})")));
    }
    let integer = q_prime.fract() == 0.0 && q_prime < i32::MAX as f64;
    let leading_term = if integer {
        let k = q_prime as i32;
        let m = integrate_over(model, spec, |x| {
            model.score_component(x, param_index).powi(k) * (q * model.ln_pdf(x)).exp()
        })?
        .value;
        Some((-delta).powi(k) * m)
    } else {
        None
    };
    if delta == 0.0 {
        return Ok(DivergenceResult {
            value: 0.0,
            error_estimate: 0.0,
            shift: delta,
            q,
            q_prime,
            leading_term,
        });
    }
    check_positive_shift(model, param_index, delta, spec)?;
    if !integer {
        // A fractional power of a negative log-ratio has no real value.
        let (lo, hi) = model.support().truncated(spec.trunc_k);
        for i in 0..=2000 {
            let x = lo + (hi - lo) * i as f64 / 2000.0;
            if model.support().is_interior(x) && delta * model.score_component(x, param_index) > 0.0 {
                return Err(Error::Domain(format!(
                    "log-ratio is negative at x = {x}; fractional q' = {q_prime} is undefined there"
                )));
            }
        }
    }
    let r = integrate_over(model, spec, |x| {
        let log_ratio = -(delta * model.score_component(x, param_index)).ln_1p();
        let powered = if integer {
            log_ratio.powi(q_prime as i32)
        } else {
            log_ratio.powf(q_prime)
        };
        (q * model.ln_pdf(x)).exp() * powered
    })?;
    Ok(DivergenceResult {
        value: r.value,
        error_estimate: r.error_estimate,
        shift: delta,
        q,
        q_prime,
        leading_term,
    })
}

/// Fisher matrix as the Hessian of `θ' ↦ D(p_θ ‖ p_θ')` at `θ' = θ`, by
/// central second differences at steps `h` and `h/2`, Richardson-extrapolated
/// once (the plain `O(h²)` error is visible at small σ).
pub fn fisher_matrix_from_kl<D: Density>(model: &D, spec: &QuadratureSpec, h: f64) -> Result<SymMatrix> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    let local = spec.scaled_abs_tol(0.25 * h * h);
    let theta = model.parameter_values();
    let d = theta.len();
    let div = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut t = theta.clone();
        for &(i, o) in offsets {
            t[i] += o;
        }
        kl(model, &model.with_params(&t)?, &local)
    };
    // second differences at step `s`; D(θ, θ) = 0 drops the centre term
    let hessian_at = |s: f64| -> Result<SymMatrix> {
        let mut m = SymMatrix::zeros(d);
        for i in 0..d {
            m.set(i, i, (div(&[(i, s)])? + div(&[(i, -s)])?) / (s * s));
            for j in i + 1..d {
                let v = div(&[(i, s), (j, s)])? - div(&[(i, s), (j, -s)])?
                    - div(&[(i, -s), (j, s)])?
                    + div(&[(i, -s), (j, -s)])?;
                m.set(i, j, v / (4.0 * s * s));
            }
        }
        Ok(m)
    };
    let (coarse, fine) = (hessian_at(h)?, hessian_at(0.5 * h)?);
    Ok(SymMatrix::from_fn(d, |i, j| (4.0 * fine.get(i, j) - coarse.get(i, j)) / 3.0))
}
