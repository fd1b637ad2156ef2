//! Special functions needed by the closed-form geodesic solutions.

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const MAX_TERMS: usize = 100_000;

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `|z| < 1`, summed as a
/// power series until the next term is below `1e-12` of the running sum.
pub fn hypergeometric_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(alloc::format!(
            "2F1 series requires |z| < 1, got {z}"
        )));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(alloc::format!(
            "2F1 undefined for non-positive integer c = {c}"
        )));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() <= 1e-12 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NotConverged {
        value: sum,
        error_estimate: term.abs(),
        subdivisions: MAX_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_at_origin() {
        assert_eq!(hypergeometric_2f1(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn logarithm_identity() {
        // ₂F₁(1,1;2;z) = -ln(1-z)/z
        let v = hypergeometric_2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v - 1.386_294_361_119_89).abs() < 1e-10);
        let v = hypergeometric_2f1(1.0, 1.0, 2.0, -0.8).unwrap();
        assert!((v - libm::log(1.8) / 0.8).abs() < 1e-10);
    }

    #[test]
    fn terminating_series() {
        // a = -2 truncates to a quadratic polynomial
        let z = 0.3;
        let v = hypergeometric_2f1(-2.0, 1.5, 0.5, z).unwrap();
        let exact = 1.0 - 2.0 * 1.5 / 0.5 * z + (-2.0 * -1.0) * (1.5 * 2.5) / (0.5 * 1.5 * 2.0) * z * z;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(hypergeometric_2f1(1.0, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hypergeometric_2f1(1.0, 1.0, 2.0, -1.5), Err(Error::Domain(_))));
        assert!(matches!(hypergeometric_2f1(1.0, 1.0, -3.0, 0.2), Err(Error::Domain(_))));
        assert!(matches!(hypergeometric_2f1(1.0, 1.0, 2.0, f64::NAN), Err(Error::Domain(_))));
    }

    proptest::proptest! {
        #[test]
        fn symmetric_in_numerator_parameters(
            a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.1f64..4.0, z in -0.9f64..0.9
        ) {
            let ab = hypergeometric_2f1(a, b, c, z).unwrap();
            let ba = hypergeometric_2f1(b, a, c, z).unwrap();
            proptest::prop_assert!((ab - ba).abs() <= 1e-10 * ab.abs().max(1.0));
        }
    }
}
