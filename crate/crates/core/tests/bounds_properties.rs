use fisher_core::bounds::{holder_triple, info_generating, verify_bound, Estimator};
use fisher_core::{Normal, QuadratureSpec};
use num_rational::Ratio;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn bound_holds_on_the_grid() {
    for sigma in [0.5, 1.0, 2.0] {
        let model = Normal::new(-0.2, sigma).unwrap();
        for n in 1..=4 {
            let r = verify_bound(&model, 0, n, Estimator::Identity, &spec()).unwrap();
            assert!(r.holds, "n={n} sigma={sigma}: {r:?}");
            assert!(r.margin >= -1e-9);
            if n == 1 {
                assert!((r.lhs - r.rhs).abs() < 1e-8);
                assert!((r.lhs - 1.0).abs() < 1e-10);
            } else {
                assert!(r.margin > 0.0);
            }
        }
    }
}

#[test]
fn generating_function_matches_closed_form() {
    for sigma in [1.0 / (2.0 * std::f64::consts::PI).sqrt(), 0.5, 1.0, 2.0] {
        let model = Normal::new(1.0, sigma).unwrap();
        for q in [1.0, 1.25, 4.0 / 3.0, 11.0 / 8.0, 2.0] {
            let exact = (2.0 * std::f64::consts::PI * sigma * sigma).powf((1.0 - q) / 2.0) / q.sqrt();
            let num = info_generating(&model, q, &spec()).unwrap();
            assert!(((num - exact) / exact).abs() < 1e-9, "q={q} sigma={sigma}");
        }
    }
}

#[test]
fn rational_identities_hold_far_out() {
    for n in 1..=16 {
        let t = holder_triple(n).unwrap();
        assert!(t.conjugate());
        assert_eq!(t.density_power(), Ratio::from_integer(n as i64));
    }
}
