use fisher_core::hierarchy::{fisher_lambda, fisher_n, joint_fisher_n, Subsystem};
use fisher_core::{Normal, QuadratureSpec};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn both_forms_agree_across_orders_and_scales() {
    for sigma in [0.5, 1.0, 2.0] {
        let model = Normal::new(0.0, sigma).unwrap();
        for n in 1..=4 {
            let m = fisher_n(&model, 0, n, &spec()).unwrap();
            assert!(m.form_agreement < 1e-8, "n={n} sigma={sigma}");
            assert!(m.value() > 0.0);
        }
    }
}

#[test]
fn reference_values_across_scales() {
    // 40-digit quadrature of 4/2^(2n) ∫ z^(2n) p^n / σ^(2n) dx
    let table = [
        (0.5, [4.0, 1.692_568_750_643_27, 0.816_783_548_773_025, 0.416_676_985_818_456]),
        (1.0, [1.0, 0.052_892_773_457_602_2, 0.003_190_560_737_394_63, 0.000_203_455_559_481_668]),
        (2.0, [0.25, 0.001_652_899_170_550_07, 1.246_312_788_044_78e-5, 9.934_353_490_315_83e-8]),
    ];
    for (sigma, values) in table {
        let model = Normal::new(0.4, sigma).unwrap();
        for (k, expected) in values.iter().enumerate() {
            let v = fisher_n(&model, 0, k as u32 + 1, &spec()).unwrap().value();
            assert!(((v - expected) / expected).abs() < 1e-10, "n={} sigma={sigma}", k + 1);
        }
    }
}

#[test]
fn generating_functional_agrees_with_eight_term_series() {
    let model = Normal::standard();
    for lambda in [0.01, 0.1, 0.5] {
        let r = fisher_lambda(&model, 0, lambda, 8, &spec()).unwrap();
        assert!(r.series_gap() < 1e-6, "lambda={lambda}: {}", r.series_gap());
        assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.direct >= 1.0);
        assert!(r.tail_bound < 1e-6);
    }
}

#[test]
fn truncation_gap_shrinks_with_more_terms() {
    let model = Normal::new(0.0, 0.7).unwrap();
    let gaps: Vec<f64> = (1..=6)
        .map(|n| fisher_lambda(&model, 0, 0.5, n, &spec()).unwrap().series_gap())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
}

#[test]
fn scaling_laws() {
    let (a, b) = (Normal::new(0.0, 0.8).unwrap(), Normal::new(0.0, 1.6).unwrap());
    let r1 = fisher_n(&b, 0, 1, &spec()).unwrap().value() / fisher_n(&a, 0, 1, &spec()).unwrap().value();
    let r2 = fisher_n(&b, 0, 2, &spec()).unwrap().value() / fisher_n(&a, 0, 2, &spec()).unwrap().value();
    assert!((r1 - 0.25).abs() < 1e-8);
    assert!((r2 - 1.0 / 32.0).abs() < 1e-8);
}

#[test]
fn joint_second_order_gap_is_large() {
    let n = Normal::standard();
    let joint = joint_fisher_n(Subsystem::new(&n, Some(0)), Subsystem::new(&n, Some(0)), 2, &spec()).unwrap();
    let single = fisher_n(&n, 0, 2, &spec()).unwrap().value();
    assert!((joint.additive - 2.0 * single).abs() < 1e-14);
    assert!((joint.binomial - 2.0 * single).abs() > 1e3 * spec().abs_tol);
    assert!(((joint.binomial - joint.direct) / joint.binomial).abs() < 1e-6);
    assert!(joint.compact_second_order.is_some());
}
