//! Matrix hierarchy `[I_n] = ∫ p^n [I]^n dx`, with `[I] = s sᵀ` the score
//! outer product.
//!
//! Because `s sᵀ` has rank one, `(s sᵀ)^n = (s·s)^(n-1) s sᵀ` and every entry
//! of `[I_n]` is a single one-dimensional integral. The same identity gives
//! the pointwise matrix exponential in closed form:
//! `exp(λ p s sᵀ) - 𝕀 = (expm1(λ p s·s) / s·s) s sᵀ`.
//!
//! Unlike the scalar hierarchy, the matrix members carry no `4/2^(2n)`
//! prefactor; [`scalar_matrix_consistency`] makes the relation explicit.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{check_param_index, Density};
use crate::hierarchy::{self, factorial, integrate_over, lambda_ceiling};
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues by cyclic Jacobi rotations, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.data.clone();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            let scale: f64 = a.iter().map(|v| v * v).sum();
            if off <= 1e-30 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

fn check_params<D: Density + ?Sized>(model: &D, params: &[usize]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::InvalidParameter("parameter subset must not be empty".into()));
    }
    for &i in params {
        check_param_index(model, i)?;
    }
    Ok(())
}

fn all_params<D: Density + ?Sized>(model: &D) -> Vec<usize> {
    (0..model.dim()).collect()
}

fn score_vector<D: Density + ?Sized>(model: &D, x: f64, params: &[usize]) -> Vec<f64> {
    params.iter().map(|&i| model.score_component(x, i)).collect()
}

/// `s sᵀ` at `x` for the chosen parameters.
pub fn score_outer_product<D: Density + ?Sized>(
    model: &D,
    x: f64,
    params: &[usize],
) -> Result<SymMatrix> {
    check_params(model, params)?;
    crate::distributions::eval_pdf(model, x)?;
    let s = score_vector(model, x, params);
    Ok(SymMatrix::from_fn(params.len(), |i, j| s[i] * s[j]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHierarchyResult {
    pub order: u32,
    /// Parameter indices spanning the rows and columns.
    pub params: Vec<usize>,
    pub matrix: SymMatrix,
    pub errors: SymMatrix,
}

impl MatrixHierarchyResult {
    pub fn psd_min_eigenvalue(&self) -> f64 {
        self.matrix.min_eigenvalue()
    }
}

/// `[I_n]` over every parameter of the model.
pub fn matrix_n<D: Density + ?Sized>(
    model: &D,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<MatrixHierarchyResult> {
    matrix_n_subset(model, &all_params(model), n, spec)
}

/// `[I_n]` restricted to the parameters in `params`; the score vector, and
/// hence `s·s`, only involves those parameters.
pub fn matrix_n_subset<D: Density + ?Sized>(
    model: &D,
    params: &[usize],
    n: u32,
    spec: &QuadratureSpec,
) -> Result<MatrixHierarchyResult> {
    check_params(model, params)?;
    if n < 1 {
        return Err(Error::InvalidParameter("hierarchy order must be at least 1".into()));
    }
    let d = params.len();
    let w = n as f64;
    let mut matrix = SymMatrix::zeros(d);
    let mut errors = SymMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let r = integrate_over(model, spec, |x| {
                let s = score_vector(model, x, params);
                let ss: f64 = s.iter().map(|v| v * v).sum();
                ss.powi(n as i32 - 1) * s[i] * s[j] * (w * model.ln_pdf(x)).exp()
            })?;
            matrix.set(i, j, r.value);
            errors.set(i, j, r.error_estimate);
        }
    }
    Ok(MatrixHierarchyResult {
        order: n,
        params: params.to_vec(),
        matrix,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLambdaResult {
    pub lambda: f64,
    /// `(1/λ) ∫ (exp(λ p [I]) - 𝕀) dx` by quadrature.
    pub direct: SymMatrix,
    /// `partial_sums[k]` is `Σ_{n ≤ k+1} λ^(n-1) [I_n] / n!`.
    pub partial_sums: Vec<SymMatrix>,
    pub n_max: u32,
}

impl MatrixLambdaResult {
    pub fn series_gap(&self) -> f64 {
        self.partial_sums
            .last()
            .map_or(f64::INFINITY, |s| s.max_abs_diff(&self.direct))
    }
}

/// Matrix generating functional for parameter `λ > 0`, with the series
/// truncated at `n_max`.
pub fn matrix_lambda<D: Density + ?Sized>(
    model: &D,
    lambda: f64,
    n_max: u32,
    spec: &QuadratureSpec,
) -> Result<MatrixLambdaResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(alloc::format!("lambda must be positive, got {lambda}")));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let params = all_params(model);
    let d = params.len();
    let p_ss = |x: f64| {
        let s = score_vector(model, x, &params);
        model.pdf(x) * s.iter().map(|v| v * v).sum::<f64>()
    };
    let lambda_max = lambda_ceiling(model, spec, p_ss);
    if lambda > lambda_max {
        return Err(Error::Overflow { lambda, lambda_max });
    }

    let mut direct = SymMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let r = integrate_over(model, spec, |x| {
                let s = score_vector(model, x, &params);
                let ss: f64 = s.iter().map(|v| v * v).sum();
                let p = model.pdf(x);
                // expm1(λ p ss) / ss → λ p as ss → 0
                let factor = if ss > 1e-300 {
                    (lambda * p * ss).exp_m1() / ss
                } else {
                    lambda * p
                };
                factor * s[i] * s[j]
            })?;
            direct.set(i, j, r.value / lambda);
        }
    }

    let mut partial_sums = Vec::with_capacity(n_max as usize);
    let mut acc = SymMatrix::zeros(d);
    for n in 1..=n_max {
        let m = matrix_n(model, n, spec)?.matrix;
        let c = lambda.powi(n as i32 - 1) / factorial(n);
        acc = SymMatrix::from_fn(d, |i, j| acc.get(i, j) + c * m.get(i, j));
        partial_sums.push(acc.clone());
    }
    Ok(MatrixLambdaResult {
        lambda,
        direct,
        partial_sums,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub order: u32,
    /// The 1×1 entry of `[I_n]` for the chosen parameter alone.
    pub matrix_entry: f64,
    /// `4 / 2^(2n)`.
    pub prefactor: f64,
    /// Scalar hierarchy member `I_n`.
    pub scalar: f64,
    pub relative_gap: f64,
}

/// Checks `I_n = (4/2^(2n)) [I_n]` for a single parameter.
pub fn scalar_matrix_consistency<D: Density + ?Sized>(
    model: &D,
    param_index: usize,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<ConsistencyReport> {
    let entry = matrix_n_subset(model, &[param_index], n, spec)?.matrix.get(0, 0);
    let scalar = hierarchy::fisher_n(model, param_index, n, spec)?.value();
    let prefactor = 4.0 / 2f64.powi(2 * n as i32);
    let bridged = prefactor * entry;
    let relative_gap = (bridged - scalar).abs() / scalar.abs().max(f64::MIN_POSITIVE);
    if relative_gap > 1e-8 {
        return Err(Error::RouteDisagreement {
            what: "scalar hierarchy vs prefactor-bridged matrix entry",
            first: scalar,
            second: bridged,
        });
    }
    Ok(ConsistencyReport {
        order: n,
        matrix_entry: entry,
        prefactor,
        scalar,
        relative_gap,
    })
}
