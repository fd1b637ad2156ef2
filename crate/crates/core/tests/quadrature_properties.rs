use fisher_core::quadrature::{gaussian_moment, integrate, integrate_range, Support};
use fisher_core::{Density, Normal, QuadratureSpec};

#[test]
fn matches_closed_form_gaussian_moments() {
    let spec = QuadratureSpec::default();
    for s in [0.5, 1.0, 2.0, 4.0] {
        let support = Support::gaussian(0.0, (s / 2.0f64).sqrt());
        for m in (0..=10).step_by(2) {
            let exact = gaussian_moment(m, s).unwrap();
            let num = integrate(|z| z.powi(m as i32) * (-z * z / s).exp(), &support, &spec).unwrap();
            assert!(num.converged);
            assert!(((num.value - exact) / exact).abs() < 1e-9, "m={m} s={s}");
        }
    }
}

#[test]
fn tighter_tolerance_never_loosens_the_estimate() {
    let f = |z: f64| z.powi(8) * (-z * z).exp();
    let mut spec = QuadratureSpec::default().scaled_tolerances(1e2);
    let mut previous = f64::INFINITY;
    for _ in 0..4 {
        let r = integrate_range(f, -12.0, 12.0, &spec).unwrap();
        assert!(r.converged);
        assert!(r.error_estimate <= previous);
        previous = r.error_estimate;
        spec = spec.scaled_tolerances(0.5);
    }
}

#[test]
fn truncation_depth_is_immaterial() {
    let n = Normal::new(0.3, 0.8).unwrap();
    let shallow = QuadratureSpec::default();
    let deep = QuadratureSpec { trunc_k: 16.0, ..shallow };
    let integrand = |x: f64| n.score_component(x, 1).powi(4) * (2.0 * n.ln_pdf(x)).exp();
    let a = integrate(integrand, &n.support(), &shallow).unwrap().value;
    let b = integrate(integrand, &n.support(), &deep).unwrap().value;
    assert!(((a - b) / a).abs() < 1e-12);
}
