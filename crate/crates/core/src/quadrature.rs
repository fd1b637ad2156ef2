//! Adaptive Gauss-Kronrod quadrature.
//!
//! Every definite integral in the crate goes through [`integrate`] (or one of
//! its variants). The rule pair is the 10-point Gauss / 21-point Kronrod
//! embedding; the panel carrying the largest local error is bisected until
//! the summed error estimate meets `max(abs_tol, rel_tol * |value|)` or the
//! subdivision budget runs out.
//!
//! Unbounded supports are truncated rather than mapped onto a finite
//! interval: every integrand handled here is a polynomial times a density
//! power, so the discarded tails are far below any tolerance in use.

use alloc::vec::Vec;
use core::cell::RefCell;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Tolerances and limits governing a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Truncation multiplier for unbounded supports (`k` standard deviations
    /// for location-scale families).
    pub trunc_k: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            trunc_k: 12.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "tolerances must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol,
                self.rel_tol
            )));
        }
        if !(self.trunc_k >= 6.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "truncation multiplier must be at least 6, got {}",
                self.trunc_k
            )));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::InvalidParameter(alloc::format!(
                "max_subdivisions must be at least 10, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }

    /// Same spec with both tolerances multiplied by `factor`.
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    /// Same spec with only the absolute tolerance multiplied by `factor`.
    ///
    /// Used when the expected magnitude of an integral is known to be small
    /// (for instance `O(Δ²)` divergences).
    pub fn scaled_abs_tol(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                error_estimate: self.error_estimate,
                subdivisions: self.subdivisions_used,
            })
        }
    }
}

/// How an unbounded end of a support is cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Density decays like `exp(-(x - center)^2 / (2 scale^2))`; cut at
    /// `center ± k * scale`.
    Gaussian { center: f64, scale: f64 },
    /// Density decays like `exp(-rate * |x - end|)` away from the finite end;
    /// cut where the log-density has dropped by `k^2 / 2`, matching the
    /// Gaussian rule's depth.
    Exponential { rate: f64 },
}

/// An interval of the real line, possibly unbounded, with its truncation
/// policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub tail: Tail,
}

impl Support {
    /// `(-∞, ∞)` truncated at `±k`.
    pub fn real_line() -> Self {
        Self::gaussian(0.0, 1.0)
    }

    pub fn gaussian(center: f64, scale: f64) -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            tail: Tail::Gaussian { center, scale },
        }
    }

    pub fn half_line(lower: f64, rate: f64) -> Self {
        Self {
            lower,
            upper: f64::INFINITY,
            tail: Tail::Exponential { rate },
        }
    }

    pub fn bounded(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            tail: Tail::Gaussian {
                center: 0.5 * (lower + upper),
                scale: 1.0,
            },
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn is_interior(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    /// Finite integration range after applying the truncation multiplier.
    pub fn truncated(&self, k: f64) -> (f64, f64) {
        let (lo_cut, hi_cut) = match self.tail {
            Tail::Gaussian { center, scale } => (center - k * scale, center + k * scale),
            Tail::Exponential { rate } => {
                let depth = 0.5 * k * k / rate;
                (self.upper - depth, self.lower + depth)
            }
        };
        let lo = if self.lower.is_finite() {
            self.lower
        } else {
            lo_cut
        };
        let hi = if self.upper.is_finite() {
            self.upper
        } else {
            hi_cut
        };
        (lo, hi)
    }

    /// Whether two supports describe the same set (truncation policy ignored).
    pub fn same_set(&self, other: &Support) -> bool {
        self.lower == other.lower && self.upper == other.upper
    }
}

// 21-point Kronrod abscissae on [-1, 1] (non-negative half, descending); the
// odd entries are the 10-point Gauss abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_643_475,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x, value: v })
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = eval(f, center - dx)? + eval(f, center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrates `f` over `support`, truncating unbounded ends at
/// `spec.trunc_k`.
///
/// Non-convergence is reported through `converged = false`; a non-finite
/// integrand value is a hard error naming the abscissa.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    support: &Support,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let (lo, hi) = support.truncated(spec.trunc_k);
    integrate_range(f, lo, hi, spec)
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate_range<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    integrate_pieces(f, &[a, b], spec)
}

/// Integrates over `[breaks[0], breaks[last]]` with the interior points used
/// as initial panel boundaries (kinks of the integrand belong there).
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter("need at least two break points".into()));
    }
    if breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter(
            "break points must be finite and non-decreasing".into(),
        ));
    }

    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            panels.push(gauss_kronrod_21(&f, w[0], w[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(IntegralResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
        });
    }

    let mut subdivisions = 0usize;
    let mut value: f64 = panels.iter().map(|p| p.value).sum();
    let mut error: f64 = panels.iter().map(|p| p.error).sum();
    while error > spec.target(value) {
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-13 * (p.a.abs() + p.b.abs()) {
            // the worst panel cannot be refined any further
            break;
        }
        let left = gauss_kronrod_21(&f, p.a, mid)?;
        let right = gauss_kronrod_21(&f, mid, p.b)?;
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        panels[worst] = left;
        panels.push(right);
        subdivisions += 1;
    }

    // resum in positional order so the result does not depend on running-sum
    // history
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(core::cmp::Ordering::Equal));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Ok(IntegralResult {
        value,
        error_estimate: error,
        subdivisions_used: subdivisions,
        converged: error <= spec.target(value),
    })
}

/// Tensor-product integral of `f(x, y)` over `[x0, x1] × [y0, y1]`.
///
/// Inner integrals run with the absolute tolerance divided by the outer
/// width so the combined error stays within `spec`. Any inner failure aborts
/// the whole integral.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let width = (x1 - x0).abs().max(1.0);
    let inner_spec = spec.scaled_abs_tol(1.0 / width);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let worst_inner = RefCell::new(0.0f64);
    let outer = integrate_range(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match integrate_range(|y| f(x, y), y0, y1, &inner_spec)
                .and_then(IntegralResult::require_converged)
            {
                Ok(r) => {
                    let mut w = worst_inner.borrow_mut();
                    *w = w.max(r.error_estimate);
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        x0,
        x1,
        spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(IntegralResult {
        error_estimate: outer.error_estimate + worst_inner.into_inner() * (x1 - x0).abs(),
        ..outer
    })
}

/// `(m - 1)!!` for even `m ≥ 0` (with `(-1)!! = 1`).
fn odd_double_factorial(m: u32) -> f64 {
    let mut acc = 1.0;
    let mut k = 1;
    while k < m {
        acc *= k as f64;
        k += 2;
    }
    acc
}

/// Closed form of `∫ z^m exp(-z^2 / s) dz` over the real line:
/// `sqrt(π s) (m - 1)!! (s / 2)^(m / 2)` for even `m`, zero for odd `m`.
pub fn gaussian_moment(m: i64, s: f64) -> Result<f64> {
    if m < 0 {
        return Err(Error::Domain(alloc::format!("moment order must be non-negative, got {m}")));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(alloc::format!("width parameter must be positive, got {s}")));
    }
    if m % 2 == 1 {
        return Ok(0.0);
    }
    let m = m as u32;
    Ok((core::f64::consts::PI * s).sqrt() * odd_double_factorial(m) * (0.5 * s).powi((m / 2) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn std_normal(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn normal_pdf_integrates_to_one() {
        let r = integrate(std_normal, &Support::real_line(), &QuadratureSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let r = integrate(|z| z * (-z * z).exp(), &Support::real_line(), &QuadratureSpec::default())
            .unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_of_unit_gaussian_kernel() {
        // d²/da² ∫ exp(-a z²) dz = (3/4) sqrt(π) a^(-5/2), at a = 1
        let r = integrate(|z| z.powi(4) * (-z * z).exp(), &Support::real_line(), &QuadratureSpec::default())
            .unwrap();
        assert!((r.value - 0.75 * PI.sqrt()).abs() < 1e-10);
        assert!((r.value - 1.329_340_388_179_137).abs() < 1e-9);
    }

    #[test]
    fn gaussian_moment_examples() {
        assert!((gaussian_moment(0, 1.0).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gaussian_moment(3, 2.0).unwrap(), 0.0);
        assert!((gaussian_moment(6, 1.0).unwrap() - 15.0 / 8.0 * PI.sqrt()).abs() < 1e-14);
        assert!((gaussian_moment(6, 1.0).unwrap() - 3.323_350_970_447_843).abs() < 1e-12);
        assert!(matches!(gaussian_moment(-2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn non_finite_integrand_names_abscissa() {
        let err = integrate_range(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &QuadratureSpec::default())
            .unwrap_err();
        match err {
            Error::NonFinite { x, .. } => assert!(x > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exhausted_budget_reports_non_convergence() {
        let spec = QuadratureSpec {
            max_subdivisions: 10,
            ..QuadratureSpec::default()
        };
        let r = integrate_range(|x| x.abs().sqrt() * (50.0 * x).sin().abs(), -1.0, 1.0, &spec).unwrap();
        assert!(!r.converged);
        assert!(matches!(r.require_converged(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn spec_validation() {
        let bad = QuadratureSpec {
            trunc_k: 3.0,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            abs_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            max_subdivisions: 5,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn exponential_tail_truncation_depth() {
        let s = Support::half_line(0.0, 2.0);
        let (lo, hi) = s.truncated(12.0);
        assert_eq!(lo, 0.0);
        assert!((hi - 36.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_product_gaussian() {
        let r = integrate_2d(
            |x, y| (-(x * x + y * y)).exp(),
            (-12.0, 12.0),
            (-12.0, 12.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.value - PI).abs() < 1e-9);
    }
}
