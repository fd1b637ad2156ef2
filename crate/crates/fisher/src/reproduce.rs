//! Regression run over every closed-form result the toolkit reproduces.
//!
//! Claims are grouped by acceptance criterion (1–12); each claim compares
//! one computed quantity against its reference at a fixed tolerance.

use std::fmt;

use fisher_core::bounds::{holder_triple, verify_bound, Estimator};
use fisher_core::distributions::{central_moment, central_moment_by_quadrature};
use fisher_core::divergence::{fisher_matrix_from_kl, kl_fisher_limit};
use fisher_core::geometry::{
    conic_fit, curvature, first_integral_check, geodesic, i2_constants, implicit_solution_check,
    DiagonalPowerMetric, MetricField, NumericMetric,
};
use fisher_core::hierarchy::{
    fisher_lambda, fisher_n, fisher_n_form, joint_fisher_n, weighted_score_moment, Form, Subsystem,
};
use fisher_core::matrix::{matrix_n, score_outer_product, SymMatrix};
use fisher_core::quadrature::{gaussian_moment, integrate, Support};
use fisher_core::{Exponential, Normal, QuadratureSpec};
use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::Value;

use crate::commands::KL_HESSIAN_STEP;
use crate::output::{Document, IntoField};
use crate::record;

const SIGMAS: [f64; 3] = [0.5, 1.0, 2.0];

/// How `computed` is judged against `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|computed - expected| ≤ tolerance`.
    Absolute,
    /// `|computed - expected| ≤ tolerance · |expected|`.
    Relative,
    /// `computed ≥ expected - tolerance`.
    AtLeast,
    /// `computed ≤ expected + tolerance`.
    AtMost,
    /// Exact equality (rational or symbolic values).
    Exact,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Absolute => "absolute",
            Comparison::Relative => "relative",
            Comparison::AtLeast => "at_least",
            Comparison::AtMost => "at_most",
            Comparison::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub id: String,
    pub criterion: u8,
    /// Where the reference value comes from.
    pub source: &'static str,
    pub comparison: Comparison,
    pub expected: Value,
    pub computed: Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Claim {
    fn numeric(
        criterion: u8,
        id: impl Into<String>,
        source: &'static str,
        comparison: Comparison,
        expected: f64,
        computed: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match comparison {
            Comparison::Absolute => (computed - expected).abs() <= tolerance,
            Comparison::Relative => (computed - expected).abs() <= tolerance * expected.abs(),
            Comparison::AtLeast => computed >= expected - tolerance,
            Comparison::AtMost => computed <= expected + tolerance,
            Comparison::Exact => computed == expected,
        };
        Self {
            id: format!("C{criterion}.{}", id.into()),
            criterion,
            source,
            comparison,
            expected: expected.into_field(),
            computed: computed.into_field(),
            tolerance,
            pass,
        }
    }

    fn exact(criterion: u8, id: impl Into<String>, source: &'static str, expected: String, computed: String) -> Self {
        Self {
            id: format!("C{criterion}.{}", id.into()),
            criterion,
            source,
            comparison: Comparison::Exact,
            pass: expected == computed,
            expected: Value::from(expected),
            computed: Value::from(computed),
            tolerance: 0.0,
        }
    }

    /// A criterion whose computation itself failed.
    fn failed(criterion: u8, err: &fisher_core::Error) -> Self {
        Self {
            id: format!("C{criterion}.computation"),
            criterion,
            source: "computation error",
            comparison: Comparison::Exact,
            expected: Value::from("ok"),
            computed: Value::from(err.to_string()),
            tolerance: 0.0,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionReport {
    pub claims: Vec<Claim>,
}

impl ReproductionReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| !c.pass)
    }

    pub fn criterion(&self, n: u8) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(move |c| c.criterion == n)
    }

    pub fn to_document(&self) -> Document {
        let records = self
            .claims
            .iter()
            .map(|c| {
                let mut r = record! {
                    "id" => c.id.as_str(),
                    "criterion" => c.criterion as u32,
                    "source" => c.source,
                    "comparison" => c.comparison.to_string(),
                };
                r.insert("expected".into(), c.expected.clone());
                r.insert("computed".into(), c.computed.clone());
                r.extend(record! {"tolerance" => c.tolerance, "pass" => c.pass});
                r
            })
            .collect();
        let failed = self.failures().count();
        Document::new("reproduce").table("claims", records).table(
            "summary",
            vec![record! {
                "claims" => self.claims.len(),
                "passed" => self.claims.len() - failed,
                "failed" => failed,
            }],
        )
    }
}

type Check = fn(&QuadratureSpec) -> fisher_core::Result<Vec<Claim>>;

const CHECKS: [Check; 12] = [
    standard_information,
    second_order_scalar,
    form_equivalence,
    generating_functional,
    holder_table,
    generalised_cramer_rao,
    non_additivity,
    kl_limit,
    matrix_closed_forms,
    curvature_claims,
    geodesic_claims,
    property_suites,
];

/// Runs every claim; criteria are evaluated in parallel and reported in order.
pub fn run(spec: &QuadratureSpec) -> ReproductionReport {
    let claims = CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, check)| check(spec).unwrap_or_else(|e| vec![Claim::failed(i as u8 + 1, &e)]))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    ReproductionReport { claims }
}

fn normal(sigma: f64) -> Normal {
    Normal::new(0.0, sigma).expect("positive sigma")
}

fn standard_information(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    SIGMAS
        .iter()
        .map(|&s| {
            let v = fisher_n(&normal(s), 0, 1, spec)?.value();
            Ok(Claim::numeric(
                1,
                format!("i1_mu.sigma={s}"),
                "normal family: I_1 = 1/sigma^2",
                Comparison::Relative,
                1.0 / (s * s),
                v,
                1e-9,
            ))
        })
        .collect()
}

fn second_order_scalar(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let mut out = Vec::new();
    for s in SIGMAS {
        let m = normal(s);
        let i2 = fisher_n_form(&m, 0, 2, Form::RawPower, spec)?.value;
        let m4 = central_moment(&m, 4, 2, spec)?;
        out.push(Claim::numeric(
            2,
            format!("moment_chain.sigma={s}"),
            "normal working example: I_2 = m4'/(4 sigma^8) under unnormalised p^2",
            Comparison::Relative,
            m4 / (4.0 * s.powi(8)),
            i2,
            1e-8,
        ));
    }
    let i2 = fisher_n(&Normal::standard(), 0, 2, spec)?.value();
    out.push(Claim::numeric(
        2,
        "gaussian_moment_oracle",
        "Gaussian-moment oracle: I_2 = 3/(32 sqrt(pi)) at sigma = 1",
        Comparison::Relative,
        3.0 / (32.0 * std::f64::consts::PI.sqrt()),
        i2,
        1e-8,
    ));
    Ok(out)
}

fn form_equivalence(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let m = Normal::standard();
    (1..=4)
        .map(|n| {
            let raw = fisher_n_form(&m, 0, n, Form::RawPower, spec)?.value;
            let phi = fisher_n_form(&m, 0, n, Form::PhiTransformed, spec)?.value;
            Ok(Claim::numeric(
                3,
                format!("raw_vs_phi.n={n}"),
                "raw-power form vs phi-transformed form",
                Comparison::Relative,
                raw,
                phi,
                1e-8,
            ))
        })
        .collect()
}

fn generating_functional(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let m = Normal::standard();
    let i1 = fisher_n(&m, 0, 1, spec)?.value();
    [0.01, 0.1, 0.5]
        .iter()
        .map(|&lambda| {
            let r = fisher_lambda(&m, 0, lambda, 8, spec)?;
            Ok(Claim::numeric(
                4,
                format!("series_gap.lambda={lambda}"),
                "generating functional: direct quadrature vs 8-term hierarchy series",
                Comparison::AtMost,
                0.0,
                r.series_gap(),
                1e-6 * i1,
            ))
        })
        .collect()
}

fn holder_table(_: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let r = |a, b| Ratio::new(a, b);
    let rows = [
        (1, r(1, 1), r(2, 1), r(2, 1)),
        (2, r(5, 4), r(4, 3), r(4, 1)),
        (3, r(4, 3), r(6, 5), r(6, 1)),
        (4, r(11, 8), r(8, 7), r(8, 1)),
    ];
    rows.iter()
        .map(|&(n, q, beta, alpha)| {
            let t = holder_triple(n)?;
            Ok(Claim::exact(
                5,
                format!("triple.n={n}"),
                "Hölder exponent table (q, beta, alpha)",
                format!("({q}, {beta}, {alpha})"),
                format!("({}, {}, {})", t.q, t.beta, t.alpha),
            ))
        })
        .collect()
}

fn generalised_cramer_rao(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let mut out = Vec::new();
    for s in SIGMAS {
        for n in 1..=4 {
            let r = verify_bound(&normal(s), 0, n, Estimator::Identity, spec)?;
            out.push(Claim::numeric(
                6,
                format!("margin.n={n}.sigma={s}"),
                "generalised Cramér-Rao inequality, identity estimator",
                Comparison::AtLeast,
                0.0,
                r.margin,
                1e-9,
            ));
            if n == 1 {
                out.push(Claim::numeric(
                    6,
                    format!("tight.sigma={s}"),
                    "Cramér-Rao equality for the efficient location estimator",
                    Comparison::Absolute,
                    r.rhs,
                    r.lhs,
                    1e-8,
                ));
            }
        }
    }
    Ok(out)
}

fn non_additivity(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let m = Normal::standard();
    let sub = || Subsystem::new(&m, Some(0));
    let j1 = joint_fisher_n(sub(), sub(), 1, spec)?;
    let j2 = joint_fisher_n(sub(), sub(), 2, spec)?;
    let mut out = vec![
        Claim::numeric(
            7,
            "joint_i1",
            "two independent standard normals: I_1 is additive",
            Comparison::Absolute,
            2.0,
            j1.binomial,
            1e-8,
        ),
        Claim::numeric(
            7,
            "joint_i2_gap",
            "two independent standard normals: I_2 is not additive (gap vs 1e3 x quadrature tolerance)",
            Comparison::AtLeast,
            1e3 * spec.abs_tol,
            j2.non_additivity().abs(),
            0.0,
        ),
    ];
    for (n, j) in [(1, &j1), (2, &j2)] {
        out.push(Claim::numeric(
            7,
            format!("binomial_vs_direct.n={n}"),
            "binomial joint formula vs direct two-dimensional quadrature",
            Comparison::Relative,
            j.direct,
            j.binomial,
            1e-6,
        ));
    }
    Ok(out)
}

fn kl_limit(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let m = Normal::standard();
    let r = kl_fisher_limit(&m, 0, &[1e-2, 1e-3, 1e-4], spec)?;
    let finest = r.samples.last().and_then(|s| s.linearized_ratio()).unwrap_or(f64::NAN);
    let mut out = vec![
        Claim::numeric(
            8,
            "ratio_limit",
            "D/Delta^2 -> I_1/2 (first-order shift, Delta = 1e-4)",
            Comparison::Relative,
            r.limit,
            finest,
            1e-6,
        ),
        Claim::numeric(
            8,
            "convergence_order",
            "empirical order of D/Delta^2 -> I_1/2 over Delta in {1e-2, 1e-3, 1e-4}",
            Comparison::AtLeast,
            1.9,
            r.order.unwrap_or(f64::NAN),
            0.0,
        ),
    ];
    for s in SIGMAS {
        let m = normal(s);
        let hess = fisher_matrix_from_kl(&m, spec, KL_HESSIAN_STEP)?;
        let direct = matrix_n(&m, 1, spec)?.matrix;
        out.push(Claim::numeric(
            8,
            format!("kl_hessian.sigma={s}"),
            "KL Hessian vs direct Fisher matrix, max entrywise difference",
            Comparison::AtMost,
            0.0,
            hess.max_abs_diff(&direct),
            1e-5,
        ));
    }
    Ok(out)
}

fn matrix_closed_forms(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let (a, b) = i2_constants();
    let mut out = Vec::new();
    for s in SIGMAS {
        let m = normal(s);
        let i1 = matrix_n(&m, 1, spec)?.matrix;
        let i2 = matrix_n(&m, 2, spec)?.matrix;
        let expected = [
            ("i1_00", &i1, 0, 1.0 / (s * s)),
            ("i1_11", &i1, 1, 2.0 / (s * s)),
            ("i2_00", &i2, 0, a / s.powi(5)),
            ("i2_11", &i2, 1, b / s.powi(5)),
        ];
        for (name, mat, i, value) in expected {
            out.push(Claim::numeric(
                9,
                format!("{name}.sigma={s}"),
                "normal family matrix hierarchy closed form",
                Comparison::Relative,
                value,
                mat.get(i, i),
                1e-8,
            ));
        }
        for (name, mat) in [("i1", &i1), ("i2", &i2)] {
            out.push(Claim::numeric(
                9,
                format!("{name}_offdiag.sigma={s}"),
                "normal family matrix hierarchy: vanishing off-diagonal",
                Comparison::AtMost,
                0.0,
                mat.get(0, 1).abs(),
                1e-9,
            ));
        }
    }
    Ok(out)
}

/// 5 × 5 sample of the half-plane, `x ∈ [-2, 2]`, `y ∈ [0.5, 4]`.
fn curvature_grid() -> Vec<[f64; 2]> {
    (0..5)
        .flat_map(|i| (0..5).map(move |j| [-2.0 + i as f64, 0.5 + 3.5 * j as f64 / 4.0]))
        .collect()
}

fn max_over<F: Fn([f64; 2]) -> fisher_core::Result<f64>>(f: F) -> fisher_core::Result<f64> {
    curvature_grid().into_iter().try_fold(0.0f64, |acc, p| Ok(acc.max(f(p)?)))
}

fn curvature_claims(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let analytic = max_over(|p| Ok((curvature(&DiagonalPowerMetric::i1(), p)?.kappa + 0.5).abs()))?;
    let numeric_metric = NumericMetric::new(Normal::standard(), 1, *spec)?;
    let numeric: Vec<f64> = curvature_grid()
        .par_iter()
        .map(|&p| Ok((curvature(&numeric_metric, p)?.kappa + 0.5).abs()))
        .collect::<fisher_core::Result<_>>()?;
    let numeric = numeric.into_iter().fold(0.0, f64::max);

    let i2 = DiagonalPowerMetric::i2();
    let ratios = curvature_grid()
        .into_iter()
        .map(|p| Ok(curvature(&i2, p)?.kappa / p[1].powi(3)))
        .collect::<fisher_core::Result<Vec<f64>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    let (a, b) = i2_constants();
    Ok(vec![
        Claim::numeric(
            10,
            "i1_kappa_analytic",
            "I_1 metric has uniform curvature -1/2 (max deviation, 25 points)",
            Comparison::AtMost,
            0.0,
            analytic,
            1e-10,
        ),
        Claim::numeric(
            10,
            "i1_kappa_numeric",
            "I_1 metric via numeric-metric pipeline (max deviation from -1/2, 25 points)",
            Comparison::AtMost,
            0.0,
            numeric,
            1e-4,
        ),
        Claim::numeric(
            10,
            "i2_cubic_law",
            "I_2 metric: kappa / y^3 is constant (relative spread, 25 points)",
            Comparison::AtMost,
            0.0,
            spread,
            1e-8,
        ),
        Claim::numeric(
            10,
            "i2_derived_constant",
            "I_2 metric: kappa / y^3 = -5/(2B) from the Gaussian curvature of diag(A, B)/y^5",
            Comparison::Relative,
            -5.0 / (2.0 * b),
            mean,
            1e-8,
        ),
        Claim::numeric(
            10,
            "i2_printed_constant",
            "I_2 metric: kappa / y^3 = -5(1+A)/(4AB) as printed in the source closed forms",
            Comparison::Relative,
            -5.0 * (1.0 + a) / (4.0 * a * b),
            mean,
            1e-8,
        ),
    ])
}

fn geodesic_claims(_: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let start = [0.3, 0.8, 1.0, 0.6];
    let semicircle = conic_fit(&geodesic(&DiagonalPowerMetric::i1_unscaled(), start, 2.0, 1e-3)?, 1.0)?;
    let ellipse = conic_fit(&geodesic(&DiagonalPowerMetric::i1(), start, 2.0, 1e-3)?, 2.0)?;
    let i2 = DiagonalPowerMetric::i2();
    let path = geodesic(&i2, [0.0, 1.0, 1.0, 0.5], 1.0, 1e-3)?;
    let first = first_integral_check(&i2, &path)?;
    let implicit = implicit_solution_check(&i2, &path, 0.9)?;
    Ok(vec![
        Claim::numeric(
            11,
            "semicircle",
            "unscaled I_1 geodesics: (x + C2)^2 + y^2 = C1 (step 1e-3)",
            Comparison::AtMost,
            0.0,
            semicircle.max_residual,
            1e-6,
        ),
        Claim::numeric(
            11,
            "half_ellipse",
            "factor-2 I_1 geodesics: (x + C2)^2 + 2 y^2 = C1 (step 1e-3)",
            Comparison::AtMost,
            0.0,
            ellipse.max_residual,
            1e-6,
        ),
        Claim::numeric(
            11,
            "i2_first_integral",
            "I_2 geodesics conserve y'^2 - (D2/y^5 - D3)",
            Comparison::AtMost,
            0.0,
            first.max_deviation,
            1e-6,
        ),
        Claim::numeric(
            11,
            "i2_implicit_solution",
            "I_2 geodesics match the 2F1 implicit solution",
            Comparison::AtMost,
            0.0,
            implicit.max_residual,
            1e-4,
        ),
    ])
}

fn property_suites(spec: &QuadratureSpec) -> fisher_core::Result<Vec<Claim>> {
    let mut out = Vec::new();

    // score has zero mean
    let shifted = Normal::new(0.3, 0.7)?;
    let rate = Exponential::new(2.0)?;
    let mut score_mean: f64 = 0.0;
    for i in 0..2 {
        score_mean = score_mean.max(weighted_score_moment(&shifted, i, 1, 1, spec)?.value.abs());
    }
    score_mean = score_mean.max(weighted_score_moment(&rate, 0, 1, 1, spec)?.value.abs());
    out.push(Claim::numeric(
        12,
        "score_mean_zero",
        "E[score] = 0 (normal mu, sigma; exponential rate)",
        Comparison::AtMost,
        0.0,
        score_mean,
        1e-10,
    ));

    // positive semidefinite hierarchy matrices
    let mut worst: f64 = f64::INFINITY;
    for s in SIGMAS {
        for n in 1..=4 {
            let r = matrix_n(&normal(s), n, spec)?;
            worst = worst.min(r.psd_min_eigenvalue() / r.matrix.trace());
        }
    }
    out.push(Claim::numeric(
        12,
        "matrix_psd",
        "[I_n] positive semidefinite, n = 1..4 (smallest eigenvalue / trace)",
        Comparison::AtLeast,
        0.0,
        worst,
        1e-12,
    ));

    // ([s s^T])^n = (s.s)^(n-1) s s^T
    let m = Normal::new(0.2, 1.3)?;
    let mut rank_one: f64 = 0.0;
    for x in [-3.0, -0.7, 0.2, 1.1, 4.0] {
        let outer = score_outer_product(&m, x, &[0, 1])?;
        let t = outer.trace();
        let mut power = outer.clone();
        for n in 2..=5 {
            power = multiply(&power, &outer);
            let closed = outer.scaled(t.powi(n - 1));
            rank_one = rank_one.max(power.max_abs_diff(&closed) / t.powi(n));
        }
    }
    out.push(Claim::numeric(
        12,
        "rank_one_power",
        "rank-1 power identity of the score outer product",
        Comparison::AtMost,
        0.0,
        rank_one,
        1e-12,
    ));

    for (name, metric) in [
        ("i1", DiagonalPowerMetric::i1()),
        ("i1_unscaled", DiagonalPowerMetric::i1_unscaled()),
        ("i2", DiagonalPowerMetric::i2()),
    ] {
        out.push(Claim::numeric(
            12,
            format!("tensor_symmetries.{name}"),
            "Christoffel, Riemann and Ricci index symmetries (max violation, 25 points)",
            Comparison::AtMost,
            0.0,
            max_over(|p| symmetry_violation(&metric, p))?,
            1e-12,
        ));
    }

    let mut moments: f64 = 0.0;
    for s in [0.5, 1.0, 2.0, 4.0] {
        let support = Support::gaussian(0.0, (s / 2.0f64).sqrt());
        for k in (0..=10).step_by(2) {
            let exact = gaussian_moment(k, s)?;
            let num = integrate(|z| z.powi(k as i32) * (-z * z / s).exp(), &support, spec)?.require_converged()?;
            moments = moments.max(((num.value - exact) / exact).abs());
        }
    }
    for s in SIGMAS {
        let m = normal(s);
        for order in (0..=8).step_by(2) {
            for power in 1..=4 {
                let exact = central_moment(&m, order, power, spec)?;
                let num = central_moment_by_quadrature(&m, order, power, spec)?;
                moments = moments.max(((num - exact) / exact).abs());
            }
        }
    }
    out.push(Claim::numeric(
        12,
        "gaussian_moments",
        "quadrature vs analytic Gaussian moments (max relative error)",
        Comparison::AtMost,
        0.0,
        moments,
        1e-9,
    ));
    Ok(out)
}

fn multiply(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let d = a.dim();
    let prod = a.mul(b);
    SymMatrix::from_fn(d, |i, j| prod[i * d + j])
}

/// Largest violation of the index symmetries at one point.
fn symmetry_violation<M: MetricField>(metric: &M, p: [f64; 2]) -> fisher_core::Result<f64> {
    let c = curvature(metric, p)?;
    let g = metric.metric(p)?;
    let lowered = |r: usize, s: usize, m: usize, n: usize| -> f64 {
        (0..2).map(|l| g[r][l] * c.riemann[l][s][m][n]).sum()
    };
    let mut worst: f64 = (c.ricci[0][1] - c.ricci[1][0]).abs();
    for a in 0..2 {
        for b in 0..2 {
            for d in 0..2 {
                worst = worst
                    .max((c.christoffel.first[a][b][d] - c.christoffel.first[a][d][b]).abs())
                    .max((c.christoffel.second[a][b][d] - c.christoffel.second[a][d][b]).abs());
                for e in 0..2 {
                    let scale = lowered(a, b, d, e).abs().max(1.0);
                    worst = worst
                        .max((c.riemann[a][b][d][e] + c.riemann[a][b][e][d]).abs())
                        .max((lowered(a, b, d, e) + lowered(b, a, d, e)).abs() / scale)
                        .max((lowered(a, b, d, e) - lowered(d, e, a, b)).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}
