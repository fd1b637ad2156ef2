use fisher_core::divergence::{fisher_matrix_from_kl, kl, kl_fisher_limit};
use fisher_core::matrix::matrix_n;
use fisher_core::{Normal, QuadratureSpec};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn normal_kl(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    (s2 / s1).ln() + (s1 * s1 + (m1 - m2).powi(2)) / (2.0 * s2 * s2) - 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn nonnegative_and_matches_closed_form(
        m1 in -2.0f64..2.0, s1 in 0.5f64..2.0, m2 in -2.0f64..2.0, s2 in 0.5f64..2.0
    ) {
        let (p, q) = (Normal::new(m1, s1).unwrap(), Normal::new(m2, s2).unwrap());
        let d = kl(&p, &q, &spec()).unwrap();
        prop_assert!(d >= 0.0);
        let exact = normal_kl(m1, s1, m2, s2);
        prop_assert!((d - exact).abs() < 1e-9 * exact.max(1.0));
        prop_assert_eq!(kl(&p, &p, &spec()).unwrap(), 0.0);
    }
}

#[test]
fn location_shift_ratio_converges_at_second_order() {
    for sigma in [0.5, 1.0, 2.0] {
        let model = Normal::new(0.0, sigma).unwrap();
        let r = kl_fisher_limit(&model, 0, &[1e-2, 1e-3, 1e-4], &spec()).unwrap();
        assert!(r.converged(1.9), "sigma={sigma}: {r:?}");
        let last = r.samples.last().unwrap();
        assert!((last.exact_ratio().unwrap() - r.limit).abs() < 1e-9 * r.limit);
    }
}

#[test]
fn scale_shift_ratio_converges_at_first_order() {
    // the cubic term of the expansion survives for σ, so D/Δ² - I/2 = O(Δ)
    let model = Normal::new(0.0, 1.3).unwrap();
    let r = kl_fisher_limit(&model, 1, &[1e-2, 1e-3, 1e-4], &spec()).unwrap();
    for order in [r.order.unwrap(), r.exact_order.unwrap()] {
        assert!((order - 1.0).abs() < 0.1, "{r:?}");
    }
    let last = r.samples.last().unwrap();
    assert!((last.exact_ratio().unwrap() - r.limit).abs() < 1e-3 * r.limit);
}

#[test]
fn hessian_route_matches_direct_matrix() {
    let h = 1e-3;
    for sigma in [0.5, 1.0, 2.0] {
        let model = Normal::new(0.3, sigma).unwrap();
        let hess = fisher_matrix_from_kl(&model, &spec(), h).unwrap();
        let direct = matrix_n(&model, 1, &spec()).unwrap().matrix;
        let tol = (10.0 * h * h).max(1e-5);
        assert!(hess.max_abs_diff(&direct) < tol, "sigma={sigma}");
    }
}
