//! One function per subcommand, each returning a [`Document`].

use std::fmt;
use std::str::FromStr;

use fisher_core::bounds::{verify_bound, Estimator};
use fisher_core::divergence::{fisher_matrix_from_kl, kl, kl_fisher_limit, kl_two_param};
use fisher_core::geometry::{
    conic_fit, curvature, first_integral_check, geodesic, implicit_solution_check, DiagonalPowerMetric,
    MetricField, NumericMetric,
};
use fisher_core::hierarchy::{fisher_lambda, fisher_n};
use fisher_core::matrix::{matrix_lambda, matrix_n};
use fisher_core::{Density, QuadratureSpec};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::model::AnyModel;
use crate::output::{Document, Record};
use crate::record;

/// Largest `D_3 y^p / D_2` used when comparing against the closed-form geodesic.
const IMPLICIT_U_MAX: f64 = 0.9;

/// Step of the finite-difference KL Hessian.
pub const KL_HESSIAN_STEP: f64 = 1e-3;

pub fn hierarchy(
    model: &AnyModel,
    param: usize,
    orders: &[u32],
    lambdas: &[f64],
    n_max: u32,
    spec: &QuadratureSpec,
) -> CliResult<Document> {
    let records = orders
        .par_iter()
        .map(|&n| {
            let m = fisher_n(model, param, n, spec)?;
            Ok(record! {
                "order" => n,
                "value" => m.value(),
                "error_estimate" => m.error_estimate(),
                "form_agreement" => m.form_agreement,
            })
        })
        .collect::<CliResult<Vec<Record>>>()?;
    let mut doc = Document::new("hierarchy").table("records", records);
    if !lambdas.is_empty() {
        let gf = lambdas
            .par_iter()
            .map(|&lambda| {
                let r = fisher_lambda(model, param, lambda, n_max, spec)?;
                Ok(record! {
                    "lambda" => lambda,
                    "n_max" => n_max,
                    "direct" => r.direct,
                    "direct_error" => r.direct_error,
                    "series" => r.series(),
                    "series_gap" => r.series_gap(),
                    "tail_bound" => r.tail_bound,
                })
            })
            .collect::<CliResult<Vec<Record>>>()?;
        doc = doc.table("generating_functional", gf);
    }
    Ok(doc)
}

pub fn bound(model: &AnyModel, param: usize, orders: &[u32], spec: &QuadratureSpec) -> CliResult<Document> {
    let records = orders
        .par_iter()
        .map(|&n| {
            let r = verify_bound(model, param, n, Estimator::Identity, spec)?;
            let t = r.triple;
            Ok(record! {
                "n" => n,
                "q" => ratio(t.q),
                "beta" => ratio(t.beta),
                "alpha" => ratio(t.alpha),
                "triple" => format!("({}, {}, {})", t.q, t.beta, t.alpha),
                "lhs" => r.lhs,
                "rhs" => r.rhs,
                "margin" => r.margin,
                "tolerance" => r.tolerance,
                "holds" => r.holds,
                "q_expectation" => r.q_expectation,
            })
        })
        .collect::<CliResult<Vec<Record>>>()?;
    Ok(Document::new("bound").table("records", records))
}

fn ratio(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Options of the `kl` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct KlRequest {
    pub param: usize,
    pub shift: f64,
    /// `(q, q')` of the two-parameter divergence, if requested.
    pub two_param: Option<(f64, f64)>,
    pub sweep: Vec<f64>,
    pub hessian: bool,
}

pub fn kl_divergence(model: &AnyModel, req: &KlRequest, spec: &QuadratureSpec) -> CliResult<Document> {
    let mut doc = Document::new("kl");
    let deltas = if req.sweep.is_empty() {
        vec![req.shift]
    } else {
        req.sweep.clone()
    };
    if let Some((q, q_prime)) = req.two_param {
        let records = deltas
            .par_iter()
            .map(|&delta| {
                let r = kl_two_param(model, q, q_prime, delta, req.param, spec)?;
                Ok(record! {
                    "q" => r.q,
                    "q_prime" => r.q_prime,
                    "delta" => r.shift,
                    "value" => r.value,
                    "error_estimate" => r.error_estimate,
                    "leading_term" => r.leading_term,
                })
            })
            .collect::<CliResult<Vec<Record>>>()?;
        doc = doc.table("records", records);
    } else if !req.sweep.is_empty() {
        let r = kl_fisher_limit(model, req.param, &deltas, spec)?;
        let samples = r
            .samples
            .iter()
            .map(|s| {
                record! {
                    "delta" => s.delta,
                    "exact" => s.exact,
                    "exact_ratio" => s.exact_ratio(),
                    "linearized" => s.linearized,
                    "linearized_ratio" => s.linearized_ratio(),
                }
            })
            .collect();
        doc = doc.table("records", samples).table(
            "summary",
            vec![record! {
                "limit" => r.limit,
                "order" => r.order,
                "exact_order" => r.exact_order,
            }],
        );
    } else {
        let limit = 0.5 * fisher_n(model, req.param, 1, spec)?.value();
        let mut theta = model.parameter_values();
        theta[req.param] += req.shift;
        let shifted = model.with_params(&theta)?;
        let d = kl(model, &shifted, &spec.scaled_abs_tol(req.shift * req.shift))?;
        doc = doc.table(
            "records",
            vec![record! {
                "delta" => req.shift,
                "divergence" => d,
                "ratio" => d / (req.shift * req.shift),
                "limit" => limit,
            }],
        );
    }
    if req.hessian {
        let hess = fisher_matrix_from_kl(model, spec, KL_HESSIAN_STEP)?;
        let direct = matrix_n(model, 1, spec)?.matrix;
        doc = doc.table(
            "hessian",
            vec![record! {
                "step" => KL_HESSIAN_STEP,
                "entries" => hess.row_major(),
                "direct" => direct.row_major(),
                "max_abs_diff" => hess.max_abs_diff(&direct),
            }],
        );
    }
    Ok(doc)
}

pub fn matrix(
    model: &AnyModel,
    orders: &[u32],
    lambdas: &[f64],
    n_max: u32,
    spec: &QuadratureSpec,
) -> CliResult<Document> {
    let labels = model.parameter_labels().join(",");
    let records = orders
        .par_iter()
        .map(|&n| {
            let r = matrix_n(model, n, spec)?;
            Ok(record! {
                "order" => n,
                "parameters" => labels.as_str(),
                "dim" => r.matrix.dim(),
                "entries" => r.matrix.row_major(),
                "error_estimates" => r.errors.row_major(),
                "psd_min_eigenvalue" => r.psd_min_eigenvalue(),
            })
        })
        .collect::<CliResult<Vec<Record>>>()?;
    let mut doc = Document::new("matrix").table("records", records);
    if !lambdas.is_empty() {
        let gf = lambdas
            .par_iter()
            .map(|&lambda| {
                let r = matrix_lambda(model, lambda, n_max, spec)?;
                let series = r.partial_sums.last().map(|m| m.row_major().to_vec()).unwrap_or_default();
                Ok(record! {
                    "lambda" => lambda,
                    "n_max" => n_max,
                    "direct" => r.direct.row_major(),
                    "series" => series,
                    "series_gap" => r.series_gap(),
                })
            })
            .collect::<CliResult<Vec<Record>>>()?;
        doc = doc.table("generating_functional", gf);
    }
    Ok(doc)
}

/// Metric sources selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    /// `diag(1, 2)/y²`.
    I1,
    /// `diag(1, 1)/y²`.
    I1Unscaled,
    /// `diag(A, B)/y⁵`.
    I2,
    /// `[I_n]` of the chosen family by quadrature.
    Numeric(u32),
}

impl FromStr for MetricChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "i1" => Ok(Self::I1),
            "i1-unscaled" => Ok(Self::I1Unscaled),
            "i2" => Ok(Self::I2),
            _ => match s.strip_prefix("numeric:").map(str::parse::<u32>) {
                Some(Ok(n)) if n >= 1 => Ok(Self::Numeric(n)),
                _ => Err(format!("unknown metric '{s}' (expected i1, i1-unscaled, i2 or numeric:<n>)")),
            },
        }
    }
}

impl fmt::Display for MetricChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::I1 => f.write_str("i1"),
            Self::I1Unscaled => f.write_str("i1-unscaled"),
            Self::I2 => f.write_str("i2"),
            Self::Numeric(n) => write!(f, "numeric:{n}"),
        }
    }
}

impl MetricChoice {
    fn analytic(&self) -> Option<DiagonalPowerMetric> {
        match self {
            Self::I1 => Some(DiagonalPowerMetric::i1()),
            Self::I1Unscaled => Some(DiagonalPowerMetric::i1_unscaled()),
            Self::I2 => Some(DiagonalPowerMetric::i2()),
            Self::Numeric(_) => None,
        }
    }

    fn build(&self, model: &AnyModel, spec: &QuadratureSpec) -> CliResult<Box<dyn MetricField + Send + Sync>> {
        match (self.analytic(), self) {
            (Some(m), _) => Ok(Box::new(m)),
            (None, Self::Numeric(n)) => NumericMetric::new(*model, *n, *spec)
                .map(|m| Box::new(m) as Box<dyn MetricField + Send + Sync>)
                .map_err(|e| CliError::Usage(e.to_string())),
            (None, _) => unreachable!("only numeric metrics lack a closed form"),
        }
    }
}

/// Rectangular sampling grid over the half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

fn linspace(n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    match n {
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Grid {
    /// Points in row-major order: `x` varies slowest.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let ys = linspace(self.ny, self.y_range);
        linspace(self.nx, self.x_range)
            .into_iter()
            .flat_map(|x| ys.iter().map(move |&y| [x, y]))
            .collect()
    }
}

pub fn curvature_grid(
    metric: MetricChoice,
    model: &AnyModel,
    grid: &Grid,
    spec: &QuadratureSpec,
) -> CliResult<Document> {
    let field = metric.build(model, spec)?;
    let label = metric.to_string();
    let records = grid
        .points()
        .par_iter()
        .map(|&p| {
            let c = curvature(field.as_ref(), p)?;
            Ok(record! {
                "metric" => label.as_str(),
                "x" => p[0],
                "y" => p[1],
                "kappa" => c.kappa,
                "scalar" => c.scalar,
                "kappa_over_y3" => c.kappa / p[1].powi(3),
            })
        })
        .collect::<CliResult<Vec<Record>>>()?;
    Ok(Document::new("curvature").table("records", records))
}

/// Options of the `geodesic` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicRequest {
    pub metric: MetricChoice,
    pub start: [f64; 4],
    pub length: f64,
    pub step: f64,
    /// Emit every `every`-th state (the last state is always emitted).
    pub every: usize,
}

pub fn geodesic_path(model: &AnyModel, req: &GeodesicRequest, spec: &QuadratureSpec) -> CliResult<Document> {
    let field = req.metric.build(model, spec)?;
    let path = geodesic(field.as_ref(), req.start, req.length, req.step)?;
    let last = path.states.len().saturating_sub(1);
    let every = req.every.max(1);
    let rows = path
        .states
        .iter()
        .zip(&path.parameter)
        .zip(&path.energy)
        .enumerate()
        .filter(|(i, _)| i % every == 0 || *i == last)
        .map(|(_, ((s, t), e))| {
            record! {
                "t" => *t,
                "x" => s[0],
                "y" => s[1],
                "dx" => s[2],
                "dy" => s[3],
                "energy" => *e,
            }
        })
        .collect();
    let mut summary = record! {
        "metric" => req.metric.to_string(),
        "steps" => last,
        "step" => path.step,
        "energy_drift" => path.energy_drift,
        "hit_boundary" => path.hit_boundary,
    };
    if let Some(m) = req.metric.analytic() {
        // closed-form checks apply where dx/dt does not vanish at the start
        if m.power == 2.0 && req.start[2] != 0.0 {
            let fit = conic_fit(&path, m.b / m.a)?;
            summary.extend(record! {
                "conic_c1" => fit.c1,
                "conic_c2" => fit.c2,
                "conic_residual" => fit.max_residual,
            });
        }
        if m.power != 2.0 && req.start[2] != 0.0 {
            let fi = first_integral_check(&m, &path)?;
            summary.extend(record! {
                "first_integral_d2" => fi.d2,
                "first_integral_d3" => fi.d3,
                "first_integral_deviation" => fi.max_deviation,
            });
            if req.start[3] != 0.0 {
                let im = implicit_solution_check(&m, &path, IMPLICIT_U_MAX)?;
                summary.extend(record! {
                    "implicit_points" => im.points_used,
                    "implicit_residual" => im.max_residual,
                });
            }
        }
    }
    Ok(Document::new("geodesic")
        .table("path", rows)
        .table("summary", vec![summary]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_round_trip() {
        for s in ["i1", "i1-unscaled", "i2", "numeric:3"] {
            assert_eq!(s.parse::<MetricChoice>().unwrap().to_string(), s);
        }
        assert!("numeric:0".parse::<MetricChoice>().is_err());
        assert!("i3".parse::<MetricChoice>().is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let g = Grid {
            nx: 2,
            ny: 3,
            x_range: (0.0, 1.0),
            y_range: (1.0, 2.0),
        };
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], [0.0, 1.0]);
        assert_eq!(pts[1], [0.0, 1.5]);
        assert_eq!(pts[5], [1.0, 2.0]);
    }
}
