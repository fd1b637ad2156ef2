//! Riemannian geometry of a hierarchy member used as a metric on the
//! `(x, y) = (μ, σ)` upper half-plane.
//!
//! Index conventions (all indices run over `0 = x`, `1 = y`):
//!
//! - `Γ_{γαβ} = ½(∂_β g_{αγ} + ∂_α g_{βγ} - ∂_γ g_{αβ})`, `Γ^γ_{αβ} = g^{γδ} Γ_{δαβ}`
//! - `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} - ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} - Γ^ρ_{νλ} Γ^λ_{μσ}`
//! - `R_{σν} = R^ρ_{σρν}`, `R = g^{σν} R_{σν}`, and in two dimensions `κ = R/2`.
//!
//! With these signs the hyperbolic plane has negative curvature.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::Density;
use crate::matrix::matrix_n;
use crate::quadrature::QuadratureSpec;
use crate::special::hypergeometric_2f1;
use crate::{Error, Result};

pub type Point = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];
/// `[γ][α][β]`.
pub type Rank3 = [[[f64; 2]; 2]; 2];
/// `[ρ][σ][μ][ν]`.
pub type Rank4 = [[[[f64; 2]; 2]; 2]; 2];

const ZERO2: Mat2 = [[0.0; 2]; 2];

/// A smooth field of symmetric positive-definite 2×2 matrices.
pub trait MetricField {
    fn label(&self) -> String;

    fn metric(&self, p: Point) -> Result<Mat2>;

    /// `[k] = ∂_k g`.
    fn metric_derivatives(&self, p: Point) -> Result<[Mat2; 2]>;

    /// `[k][l] = ∂_k ∂_l g`.
    fn metric_second_derivatives(&self, p: Point) -> Result<[[Mat2; 2]; 2]>;
}

fn check_upper_half_plane(p: Point) -> Result<()> {
    if !(p[1] > 0.0 && p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::Domain(format!(
            "point ({}, {}) is not in the upper half-plane",
            p[0], p[1]
        )));
    }
    Ok(())
}

fn inverse(g: &Mat2, p: Point) -> Result<Mat2> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det > 0.0 && g[0][0] > 0.0) || !det.is_finite() {
        return Err(Error::SingularMetric { x: p[0], y: p[1] });
    }
    Ok([
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ])
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `diag(a, b) / y^power`.
///
/// The analytic metric sources are all of this form: the standard Fisher
/// matrix of the normal family (`a = 1, b = 2, power = 2`), the same without
/// its factor 2 (`b = 1`), and the second hierarchy member
/// (`a = A, b = B, power = 5`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalPowerMetric {
    pub a: f64,
    pub b: f64,
    pub power: f64,
}

impl DiagonalPowerMetric {
    pub fn new(a: f64, b: f64, power: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diagonal metric needs a, b > 0 (got a = {a}, b = {b}, power = {power})"
            )));
        }
        Ok(Self { a, b, power })
    }

    /// `diag(1, 2) / y²`.
    pub fn i1() -> Self {
        Self { a: 1.0, b: 2.0, power: 2.0 }
    }

    /// `diag(1, 1) / y²`, the Poincaré half-plane.
    pub fn i1_unscaled() -> Self {
        Self { a: 1.0, b: 1.0, power: 2.0 }
    }

    /// `diag(A, B) / y⁵` with `A = 13√π/(16π)`, `B = 55√π/(32π)`.
    pub fn i2() -> Self {
        let (a, b) = i2_constants();
        Self { a, b, power: 5.0 }
    }

    /// `D_3 = a / b` of the first integral `y'² = D_2 / y^p - D_3`.
    pub fn d3(&self) -> f64 {
        self.a / self.b
    }
}

/// `(A, B)` of the second-order metric of the normal family at `σ = 1`.
pub fn i2_constants() -> (f64, f64) {
    let rt_pi = core::f64::consts::PI.sqrt();
    let pi = core::f64::consts::PI;
    (13.0 * rt_pi / (16.0 * pi), 55.0 * rt_pi / (32.0 * pi))
}

impl MetricField for DiagonalPowerMetric {
    fn label(&self) -> String {
        format!("diag({}, {})/y^{}", self.a, self.b, self.power)
    }

    fn metric(&self, p: Point) -> Result<Mat2> {
        check_upper_half_plane(p)?;
        let w = p[1].powf(-self.power);
        Ok([[self.a * w, 0.0], [0.0, self.b * w]])
    }

    fn metric_derivatives(&self, p: Point) -> Result<[Mat2; 2]> {
        check_upper_half_plane(p)?;
        let w = -self.power * p[1].powf(-self.power - 1.0);
        Ok([ZERO2, [[self.a * w, 0.0], [0.0, self.b * w]]])
    }

    fn metric_second_derivatives(&self, p: Point) -> Result<[[Mat2; 2]; 2]> {
        check_upper_half_plane(p)?;
        let w = self.power * (self.power + 1.0) * p[1].powf(-self.power - 2.0);
        Ok([[ZERO2, ZERO2], [ZERO2, [[self.a * w, 0.0], [0.0, self.b * w]]]])
    }
}

/// A position-independent metric (flat).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMetric(pub Mat2);

impl MetricField for ConstantMetric {
    fn label(&self) -> String {
        String::from("constant")
    }

    fn metric(&self, _p: Point) -> Result<Mat2> {
        Ok(self.0)
    }

    fn metric_derivatives(&self, _p: Point) -> Result<[Mat2; 2]> {
        Ok([ZERO2; 2])
    }

    fn metric_second_derivatives(&self, _p: Point) -> Result<[[Mat2; 2]; 2]> {
        Ok([[ZERO2; 2]; 2])
    }
}

/// `[I_n]` of a two-parameter family, recomputed by quadrature at every
/// point, with derivatives by Richardson-extrapolated central differences.
#[derive(Debug, Clone)]
pub struct NumericMetric<D> {
    pub model: D,
    pub order: u32,
    pub spec: QuadratureSpec,
    /// Relative step for first derivatives; second derivatives nest the
    /// first-derivative operator with the same step.
    pub rel_step: f64,
}

impl<D: Density> NumericMetric<D> {
    /// `model` fixes the family; its own parameter values are ignored.
    pub fn new(model: D, order: u32, spec: QuadratureSpec) -> Result<Self> {
        if model.dim() != 2 {
            return Err(Error::InvalidParameter(format!(
                "numeric metric needs a two-parameter family, {} has {}",
                model.family(),
                model.dim()
            )));
        }
        if order < 1 {
            return Err(Error::InvalidParameter("hierarchy order must be at least 1".into()));
        }
        Ok(Self {
            model,
            order,
            spec,
            rel_step: f64::EPSILON.cbrt(),
        })
    }

    fn step(&self, p: Point, k: usize) -> f64 {
        self.rel_step * p[k].abs().max(1.0)
    }

    /// `∂_k f` at `p`: central difference at `h` and `h/2`, extrapolated once.
    fn derivative<F: Fn(Point) -> Result<Mat2>>(&self, f: &F, p: Point, k: usize) -> Result<Mat2> {
        let central = |h: f64| -> Result<Mat2> {
            let (mut fwd, mut bwd) = (p, p);
            fwd[k] += h;
            bwd[k] -= h;
            let (a, b) = (f(fwd)?, f(bwd)?);
            let mut out = ZERO2;
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = (a[i][j] - b[i][j]) / (2.0 * h);
                }
            }
            Ok(out)
        };
        let h = self.step(p, k);
        let (coarse, fine) = (central(h)?, central(0.5 * h)?);
        let mut out = ZERO2;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
            }
        }
        Ok(out)
    }
}

impl<D: Density> MetricField for NumericMetric<D> {
    fn label(&self) -> String {
        format!("numeric:{}", self.order)
    }

    fn metric(&self, p: Point) -> Result<Mat2> {
        check_upper_half_plane(p)?;
        let model = self.model.with_params(&p)?;
        let m = matrix_n(&model, self.order, &self.spec)?.matrix;
        Ok([[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]])
    }

    fn metric_derivatives(&self, p: Point) -> Result<[Mat2; 2]> {
        let g = |q: Point| self.metric(q);
        Ok([self.derivative(&g, p, 0)?, self.derivative(&g, p, 1)?])
    }

    fn metric_second_derivatives(&self, p: Point) -> Result<[[Mat2; 2]; 2]> {
        let g = |q: Point| self.metric(q);
        let mut out = [[ZERO2; 2]; 2];
        #[allow(clippy::needless_range_loop)]
        for l in 0..2 {
            let dl = |q: Point| self.derivative(&g, q, l);
            for k in 0..=l {
                out[k][l] = self.derivative(&dl, p, k)?;
            }
        }
        out[1][0] = out[0][1];
        Ok(out)
    }
}

/// Christoffel symbols of both kinds at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    /// `Γ_{γαβ}` as `[γ][α][β]`.
    pub first: Rank3,
    /// `Γ^γ_{αβ}` as `[γ][α][β]`.
    pub second: Rank3,
}

fn first_kind(dg: &[Mat2; 2]) -> Rank3 {
    let mut out = [[[0.0; 2]; 2]; 2];
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                out[c][a][b] = 0.5 * (dg[b][a][c] + dg[a][b][c] - dg[c][a][b]);
            }
        }
    }
    out
}

fn raise(ginv: &Mat2, lower: &Rank3) -> Rank3 {
    let mut out = [[[0.0; 2]; 2]; 2];
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                out[c][a][b] = (0..2).map(|d| ginv[c][d] * lower[d][a][b]).sum();
            }
        }
    }
    out
}

pub fn christoffel<M: MetricField + ?Sized>(metric: &M, p: Point) -> Result<Christoffel> {
    let g = metric.metric(p)?;
    let ginv = inverse(&g, p)?;
    let first = first_kind(&metric.metric_derivatives(p)?);
    Ok(Christoffel {
        first,
        second: raise(&ginv, &first),
    })
}

/// Full curvature chain at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub point: Point,
    pub christoffel: Christoffel,
    /// `R^ρ_{σμν}` as `[ρ][σ][μ][ν]`.
    pub riemann: Rank4,
    pub ricci: Mat2,
    pub scalar: f64,
    /// Sectional (Gaussian) curvature `R / 2`.
    pub kappa: f64,
}

pub fn curvature<M: MetricField + ?Sized>(metric: &M, p: Point) -> Result<CurvatureSample> {
    let g = metric.metric(p)?;
    let ginv = inverse(&g, p)?;
    let dg = metric.metric_derivatives(p)?;
    let ddg = metric.metric_second_derivatives(p)?;
    let first = first_kind(&dg);
    let second = raise(&ginv, &first);

    // ∂_k Γ^ρ_{ab} = (∂_k g^{ρδ}) Γ_{δab} + g^{ρδ} ∂_k Γ_{δab},
    // ∂_k g^{-1} = -g^{-1} (∂_k g) g^{-1}
    let mut d_second = [[[[0.0; 2]; 2]; 2]; 2];
    for k in 0..2 {
        let mut dginv = matmul(&matmul(&ginv, &dg[k]), &ginv);
        for row in dginv.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        let d_first = first_kind(&ddg[k]);
        for r in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    d_second[k][r][a][b] = (0..2)
                        .map(|d| dginv[r][d] * first[d][a][b] + ginv[r][d] * d_first[d][a][b])
                        .sum();
                }
            }
        }
    }

    let mut riemann = [[[[0.0; 2]; 2]; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let quad: f64 = (0..2)
                        .map(|l| second[r][m][l] * second[l][n][s] - second[r][n][l] * second[l][m][s])
                        .sum();
                    riemann[r][s][m][n] = d_second[m][r][n][s] - d_second[n][r][m][s] + quad;
                }
            }
        }
    }
    let mut ricci = ZERO2;
    for s in 0..2 {
        for n in 0..2 {
            ricci[s][n] = (0..2).map(|r| riemann[r][s][r][n]).sum();
        }
    }
    let scalar: f64 = (0..2)
        .flat_map(|s| (0..2).map(move |n| (s, n)))
        .map(|(s, n)| ginv[s][n] * ricci[s][n])
        .sum();
    Ok(CurvatureSample {
        point: p,
        christoffel: Christoffel { first, second },
        riemann,
        ricci,
        scalar,
        kappa: 0.5 * scalar,
    })
}

/// Relative drift of `g(v, v)` above which a geodesic integration is
/// rejected as unstable.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-3;

/// Discretised geodesic `(x, y, ẋ, ẏ)` over an affine parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub parameter: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    pub step: f64,
    /// `g(v, v)` at every state; conserved along an exact geodesic.
    pub energy: Vec<f64>,
    /// `max |E - E_0| / |E_0|` (absolute when `E_0 = 0`).
    pub energy_drift: f64,
    /// The path was cut short because it left the half-plane.
    pub hit_boundary: bool,
}

fn geodesic_rhs<M: MetricField + ?Sized>(metric: &M, s: &[f64; 4]) -> Result<[f64; 4]> {
    let gamma = christoffel(metric, [s[0], s[1]])?.second;
    let v = [s[2], s[3]];
    let mut acc = [0.0; 2];
    for (c, a_c) in acc.iter_mut().enumerate() {
        *a_c = -(0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| gamma[c][a][b] * v[a] * v[b])
            .sum::<f64>();
    }
    Ok([s[2], s[3], acc[0], acc[1]])
}

fn energy<M: MetricField + ?Sized>(metric: &M, s: &[f64; 4]) -> Result<f64> {
    let g = metric.metric([s[0], s[1]])?;
    Ok(g[0][0] * s[2] * s[2] + 2.0 * g[0][1] * s[2] * s[3] + g[1][1] * s[3] * s[3])
}

fn rk4_step<M: MetricField + ?Sized>(metric: &M, s: &[f64; 4], h: f64) -> Result<[f64; 4]> {
    let add = |a: &[f64; 4], k: &[f64; 4], c: f64| -> [f64; 4] {
        [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]]
    };
    let k1 = geodesic_rhs(metric, s)?;
    let k2 = geodesic_rhs(metric, &add(s, &k1, 0.5 * h))?;
    let k3 = geodesic_rhs(metric, &add(s, &k2, 0.5 * h))?;
    let k4 = geodesic_rhs(metric, &add(s, &k3, h))?;
    let mut out = *s;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrates `θ̈^γ + Γ^γ_{αβ} θ̇^α θ̇^β = 0` from `start = (x, y, ẋ, ẏ)` over
/// an affine parameter of the given length with classical fixed-step RK4.
///
/// The step is shrunk slightly so that a whole number of steps covers
/// `length`. Leaving the half-plane truncates the path and sets
/// `hit_boundary`; excessive energy drift is an error.
pub fn geodesic<M: MetricField + ?Sized>(
    metric: &M,
    start: [f64; 4],
    length: f64,
    step: f64,
) -> Result<GeodesicPath> {
    check_upper_half_plane([start[0], start[1]])?;
    if !(step > 0.0 && step.is_finite()) || !(length >= 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need step > 0 and length >= 0 (got step = {step}, length = {length})"
        )));
    }
    let n = (length / step).ceil() as usize;
    let h = if n > 0 { length / n as f64 } else { step };
    let e0 = energy(metric, &start)?;
    let mut path = GeodesicPath {
        parameter: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        step: h,
        energy: Vec::with_capacity(n + 1),
        energy_drift: 0.0,
        hit_boundary: false,
    };
    path.parameter.push(0.0);
    path.states.push(start);
    path.energy.push(e0);
    let mut s = start;
    for i in 1..=n {
        let next = match rk4_step(metric, &s, h) {
            Ok(v) if v[1] > 0.0 && v.iter().all(|c| c.is_finite()) => v,
            Ok(_) | Err(Error::Domain(_)) | Err(Error::SingularMetric { .. }) => {
                path.hit_boundary = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let e = energy(metric, &next)?;
        let drift = if e0 != 0.0 { ((e - e0) / e0).abs() } else { e.abs() };
        path.energy_drift = path.energy_drift.max(drift);
        if path.energy_drift > ENERGY_DRIFT_LIMIT {
            return Err(Error::Unstable {
                drift: path.energy_drift,
                step: h,
            });
        }
        s = next;
        path.parameter.push(i as f64 * h);
        path.states.push(s);
        path.energy.push(e);
    }
    Ok(path)
}

/// Geodesics of `(dx² + f dy²)/y²` are the conics `(x + C_2)² + f y² = C_1`
/// (semicircles for `f = 1`, half-ellipses otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicFit {
    pub factor: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_residual: f64,
}

/// Fits `C_1`, `C_2` from the initial state and reports the largest residual
/// of `(x + C_2)² + f y² - C_1` along the path.
pub fn conic_fit(path: &GeodesicPath, factor: f64) -> Result<ConicFit> {
    let s0 = path
        .states
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty path".into()))?;
    if s0[2] == 0.0 {
        return Err(Error::Domain(
            "vertical initial velocity: the geodesic is the line x = const".into(),
        ));
    }
    // centre on the boundary, perpendicular to the velocity in (x, √f y)
    let centre = s0[0] + factor * s0[1] * s0[3] / s0[2];
    let c2 = -centre;
    let conic = |s: &[f64; 4]| (s[0] + c2).powi(2) + factor * s[1] * s[1];
    let c1 = conic(s0);
    let max_residual = path
        .states
        .iter()
        .map(|s| (conic(s) - c1).abs())
        .fold(0.0, f64::max);
    Ok(ConicFit {
        factor,
        c1,
        c2,
        max_residual,
    })
}

/// Conservation of `y'² - (D_2 / y^p - D_3)` with `y' = dy/dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegralReport {
    pub d2: f64,
    pub d3: f64,
    pub max_deviation: f64,
}

fn slope(s: &[f64; 4]) -> f64 {
    s[3] / s[2]
}

/// `D_2 = y^p (y'² + D_3)` from the initial state, then the largest
/// deviation of the first integral along the path.
pub fn first_integral_check(metric: &DiagonalPowerMetric, path: &GeodesicPath) -> Result<FirstIntegralReport> {
    let s0 = path
        .states
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty path".into()))?;
    if s0[2] == 0.0 {
        return Err(Error::Domain("first integral needs dx/dt != 0 at the start".into()));
    }
    let d3 = metric.d3();
    let p = metric.power;
    let d2 = s0[1].powf(p) * (slope(s0).powi(2) + d3);
    let max_deviation = path
        .states
        .iter()
        .map(|s| (slope(s).powi(2) - (d2 / s[1].powf(p) - d3)).abs())
        .fold(0.0, f64::max);
    Ok(FirstIntegralReport { d2, d3, max_deviation })
}

/// `F(y) = ∫ dy / sqrt(D_2/y^p - D_3)` from 0, in closed form:
/// `2/(p+2) · y^{(p+2)/2} / sqrt(D_2) · ₂F₁(1/2, (p+2)/(2p); (3p+2)/(2p); D_3 y^p / D_2)`.
///
/// Along a geodesic branch on which `y' = dy/dx` keeps its sign, `x = ±F(y) + const`.
/// For `p = 5` the parameters are `(1/2, 7/10; 17/10)`.
pub fn implicit_geodesic_x(metric: &DiagonalPowerMetric, y: f64, d2: f64) -> Result<f64> {
    if !(y > 0.0 && d2 > 0.0) {
        return Err(Error::Domain(format!("need y > 0 and D_2 > 0 (got y = {y}, D_2 = {d2})")));
    }
    let p = metric.power;
    let u = metric.d3() * y.powf(p) / d2;
    let f = hypergeometric_2f1(0.5, (p + 2.0) / (2.0 * p), (3.0 * p + 2.0) / (2.0 * p), u)?;
    Ok(2.0 / (p + 2.0) * y.powf(0.5 * (p + 2.0)) / d2.sqrt() * f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitSolutionReport {
    pub d2: f64,
    /// `E` in `x = ±F(y) - E`.
    pub offset: f64,
    pub branch_sign: f64,
    pub points_used: usize,
    pub max_residual: f64,
}

/// Compares a path against the closed-form `x(y)`.
///
/// Both integration constants come from the initial state (`D_2` from the
/// first integral, the offset from the starting point). Only the leading
/// monotone branch with `D_3 y^p / D_2 ≤ u_max` is used, which keeps the
/// hypergeometric series inside its disc of convergence.
pub fn implicit_solution_check(
    metric: &DiagonalPowerMetric,
    path: &GeodesicPath,
    u_max: f64,
) -> Result<ImplicitSolutionReport> {
    let d2 = first_integral_check(metric, path)?.d2;
    let s0 = path.states[0];
    let sign = slope(&s0).signum();
    if slope(&s0) == 0.0 {
        return Err(Error::Domain("path starts at a turning point (y' = 0)".into()));
    }
    let offset = sign * implicit_geodesic_x(metric, s0[1], d2)? - s0[0];
    let mut max_residual: f64 = 0.0;
    let mut points_used = 0;
    for s in &path.states {
        let u = metric.d3() * s[1].powf(metric.power) / d2;
        if slope(s).signum() != sign || u > u_max {
            break;
        }
        let x = sign * implicit_geodesic_x(metric, s[1], d2)? - offset;
        max_residual = max_residual.max((x - s[0]).abs());
        points_used += 1;
    }
    Ok(ImplicitSolutionReport {
        d2,
        offset,
        branch_sign: sign,
        points_used,
        max_residual,
    })
}
