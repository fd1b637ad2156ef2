use fisher_core::distributions::{central_moment, eval_score};
use fisher_core::quadrature::integrate;
use fisher_core::{Density, Exponential, Normal, QuadratureSpec};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn check_normalised_and_centred<D: Density>(model: &D) {
    let total = integrate(|x| model.pdf(x), &model.support(), &spec()).unwrap();
    assert!((total.value - 1.0).abs() < 1e-10);
    for i in 0..model.dim() {
        let mean = integrate(|x| model.score_component(x, i) * model.pdf(x), &model.support(), &spec())
            .unwrap();
        assert!(mean.value.abs() < 1e-10, "score {i} of {}", model.family());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_is_normalised_with_centred_score(mu in -5.0f64..5.0, sigma in 0.2f64..5.0) {
        check_normalised_and_centred(&Normal::new(mu, sigma).unwrap());
    }

    #[test]
    fn exponential_is_normalised_with_centred_score(rate in 0.2f64..5.0) {
        check_normalised_and_centred(&Exponential::new(rate).unwrap());
    }

    #[test]
    fn analytic_score_matches_finite_differences(
        mu in -3.0f64..3.0, sigma in 0.3f64..3.0, z in -4.0f64..4.0
    ) {
        let n = Normal::new(mu, sigma).unwrap();
        let x = mu + z * sigma;
        let s = eval_score(&n, x).unwrap();
        let theta = [mu, sigma];
        for i in 0..2 {
            let h = 1e-5 * theta[i].abs().max(1.0);
            let (mut up, mut down) = (theta, theta);
            up[i] += h;
            down[i] -= h;
            let fd = (n.with_params(&up).unwrap().ln_pdf(x) - n.with_params(&down).unwrap().ln_pdf(x)) / (2.0 * h);
            prop_assert!((fd - s[i]).abs() <= 1e-6 * s[i].abs().max(1.0));
        }
    }

    #[test]
    fn odd_weighted_moments_vanish(sigma in 0.3f64..3.0, order in 0u32..4, weight in 1u32..5) {
        let n = Normal::new(1.5, sigma).unwrap();
        let m = central_moment(&n, 2 * order + 1, weight, &spec()).unwrap();
        prop_assert!(m.abs() < 1e-12);
    }
}
