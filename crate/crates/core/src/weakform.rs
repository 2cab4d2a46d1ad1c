//! Jump functional `Lambda_phi` and the weak-equation residual of simulated flows.
//!
//! For a test function `phi`,
//! `Lambda_phi(v, x) = gamma(v, x) * int (phi(x + c(v, z, x)) - phi(x)) mu(dz)`.
//! The angular integral is a tensor-product rule: Gauss-Legendre in
//! `w = zeta^-nu` (which absorbs the `zeta^-(1+nu)` density exactly) and the
//! midpoint rule in the azimuth.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::geometry::{frame, sub, truncate3, vec3, Vec3};
use crate::kernels::{
    collision_weight, drift_b, mean_field_density, rate_gamma_with_density, Convention, ModelSpec,
    Variant,
};
use crate::measures::EmpiricalMeasure;
use crate::numerics::{gauss_legendre, pairwise_sum};

/// Relative change allowed when `n_quad` is doubled.
pub const DEFAULT_QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Angular resolution used by [`weak_residual`].
pub const DEFAULT_RESIDUAL_N_QUAD: usize = 12;

/// Bounded test functions with bounded gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `tanh(lambda * x_index)`.
    TanhCoordinate { index: usize, lambda: f64 },
    /// `prod_k tanh(lambda * x_k)`.
    ProductTanh { lambda: f64 },
    Constant { value: f64 },
    /// `sum_k alpha_k phi_k`.
    Combination { terms: Vec<(f64, TestFunction)> },
}

impl TestFunction {
    pub fn tanh(index: usize, lambda: f64) -> Self {
        TestFunction::TanhCoordinate { index, lambda }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::TanhCoordinate { index, lambda } => (lambda * x[*index]).tanh(),
            TestFunction::ProductTanh { lambda } => x.iter().map(|c| (lambda * c).tanh()).product(),
            TestFunction::Constant { value } => *value,
            TestFunction::Combination { terms } => terms.iter().map(|(a, f)| a * f.eval(x)).sum(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_gradient(x, 1.0, &mut g);
        g
    }

    fn add_gradient(&self, x: &[f64], alpha: f64, g: &mut [f64]) {
        match self {
            TestFunction::TanhCoordinate { index, lambda } => {
                let t = (lambda * x[*index]).tanh();
                g[*index] += alpha * lambda * (1.0 - t * t);
            }
            TestFunction::ProductTanh { lambda } => {
                let t: Vec<f64> = x.iter().map(|c| (lambda * c).tanh()).collect();
                for k in 0..x.len() {
                    let others: f64 = (0..x.len()).filter(|&j| j != k).map(|j| t[j]).product();
                    g[k] += alpha * lambda * (1.0 - t[k] * t[k]) * others;
                }
            }
            TestFunction::Constant { .. } => {}
            TestFunction::Combination { terms } => {
                for (a, f) in terms {
                    f.add_gradient(x, alpha * a, g);
                }
            }
        }
    }

    /// Upper bound on `sup |grad phi|` in dimension `dim`.
    pub fn gradient_bound(&self, dim: usize) -> f64 {
        match self {
            TestFunction::TanhCoordinate { lambda, .. } => lambda.abs(),
            TestFunction::ProductTanh { lambda } => lambda.abs() * (dim as f64).sqrt(),
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Combination { terms } => {
                terms.iter().map(|(a, f)| a.abs() * f.gradient_bound(dim)).sum()
            }
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            TestFunction::TanhCoordinate { index, lambda } => {
                if *index >= dim {
                    return Err(Error::InvalidArgument(format!(
                        "coordinate {index} out of range for dimension {dim}"
                    )));
                }
                finite("lambda", *lambda)
            }
            TestFunction::ProductTanh { lambda } => finite("lambda", *lambda),
            TestFunction::Constant { value } => finite("value", *value),
            TestFunction::Combination { terms } => terms.iter().try_for_each(|(a, f)| {
                finite("coefficient", *a)?;
                f.validate(dim)
            }),
        }
    }

    /// Short human-readable form, e.g. `tanh(0.5*x1)`.
    pub fn label(&self) -> String {
        match self {
            TestFunction::TanhCoordinate { index, lambda } => format!("tanh({lambda}*x{})", index + 1),
            TestFunction::ProductTanh { lambda } => format!("prod tanh({lambda}*x_k)"),
            TestFunction::Constant { value } => format!("{value}"),
            TestFunction::Combination { terms } => terms
                .iter()
                .map(|(a, f)| format!("{a}*{}", f.label()))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }
}

fn finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {value}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QuadNode {
    weight: f64,
    /// Coefficient of `v - x`, sign included.
    along: f64,
    /// `sin(zeta) / 2`.
    across: f64,
    cos_phi: f64,
    sin_phi: f64,
}

/// Tensor-product rule for `int f(zeta, phi) zeta^-(1+nu) dzeta dphi` on
/// `[zeta_min, pi] x [0, 2 pi)`; a single unit atom for models without angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature {
    nodes: Vec<QuadNode>,
}

impl AngularQuadrature {
    pub fn new(model: &ModelSpec, n_quad: usize) -> Result<Self> {
        if n_quad < 8 {
            return Err(Error::InvalidArgument(format!("n_quad = {n_quad} < 8")));
        }
        model.validate()?;
        if !model.variant.is_angular() {
            return Ok(Self {
                nodes: vec![QuadNode {
                    weight: 1.0,
                    along: 0.0,
                    across: 0.0,
                    cos_phi: 1.0,
                    sin_phi: 0.0,
                }],
            });
        }
        let nu = model.nu;
        let lo = PI.powf(-nu);
        let hi = model.zeta_min.powf(-nu);
        let (gx, gw) = gauss_legendre(n_quad);
        let sign = match model.convention {
            Convention::Energy => 1.0,
            Convention::PaperLiteral => -1.0,
        };
        let dphi = 2.0 * PI / n_quad as f64;
        let mut nodes = Vec::with_capacity(n_quad * n_quad);
        for (x, w) in gx.iter().zip(&gw) {
            let wz = 0.5 * (hi - lo) * x + 0.5 * (hi + lo);
            let zeta = wz.powf(-1.0 / nu);
            let weight_z = 0.5 * (hi - lo) * w / nu;
            let (sz, cz) = zeta.sin_cos();
            for k in 0..n_quad {
                let (sp, cp) = ((k as f64 + 0.5) * dphi).sin_cos();
                nodes.push(QuadNode {
                    weight: weight_z * dphi,
                    along: sign * 0.5 * (1.0 - cz),
                    across: 0.5 * sz,
                    cos_phi: cp,
                    sin_phi: sp,
                });
            }
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of the weights, i.e. the quadrature value of `mu(E)`.
    pub fn total_mass(&self) -> f64 {
        self.nodes.iter().map(|q| q.weight).sum()
    }
}

/// Velocity offset within a state vector.
fn velocity_offset(model: &ModelSpec) -> usize {
    if model.variant.is_phase_space() {
        3
    } else {
        0
    }
}

/// `Lambda_phi(v, x)` for every `phi` at once, with the mean-field factor
/// supplied as `density`. `y` is scratch space of the state dimension.
#[allow(clippy::too_many_arguments)]
fn lambda_values(
    model: &ModelSpec,
    quad: &AngularQuadrature,
    phis: &[TestFunction],
    v: &[f64],
    x: &[f64],
    density: f64,
    base: &[f64],
    y: &mut [f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let gamma = rate_gamma_with_density(model, v, x, density);
    if gamma == 0.0 {
        return;
    }
    if !model.variant.is_angular() {
        y[0] = x[0] + model.kappa * (v[0] - x[0]);
        for (o, (f, b)) in out.iter_mut().zip(phis.iter().zip(base)) {
            *o = gamma * (f.eval(y) - b);
        }
        return;
    }
    let off = velocity_offset(model);
    let hv = truncate3(&vec3(&v[off..off + 3]), model.gamma_cap);
    let hx = truncate3(&vec3(&x[off..off + 3]), model.gamma_cap);
    let rel: Vec3 = sub(&hv, &hx);
    let (i, j) = match frame(&rel) {
        Ok(f) => f,
        Err(_) => return,
    };
    let scale = collision_weight(model, v, x);
    if scale == 0.0 {
        return;
    }
    y.copy_from_slice(x);
    for q in &quad.nodes {
        for k in 0..3 {
            let c = q.along * rel[k] + q.across * (q.cos_phi * i[k] + q.sin_phi * j[k]);
            y[off + k] = x[off + k] + scale * c;
        }
        for (o, (f, b)) in out.iter_mut().zip(phis.iter().zip(base)) {
            *o += q.weight * (f.eval(y) - b);
        }
    }
    for o in out.iter_mut() {
        *o *= gamma;
    }
}

fn density_for(
    model: &ModelSpec,
    x: &[f64],
    aux: Option<&EmpiricalMeasure>,
) -> Result<f64> {
    if model.variant != Variant::MeanFieldEnskog {
        return Ok(1.0);
    }
    let positions = aux.ok_or(Error::MissingAux)?;
    if positions.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: positions.dim(),
        });
    }
    Ok(mean_field_density(&x[0..3], positions, model.radius))
}

fn check_point(model: &ModelSpec, p: &[f64]) -> Result<()> {
    if p.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: p.len(),
        });
    }
    Ok(())
}

/// `Lambda_phi(v, x)` on a fixed quadrature, without a resolution check.
pub fn lambda_phi_on(
    model: &ModelSpec,
    quad: &AngularQuadrature,
    phi: &TestFunction,
    v: &[f64],
    x: &[f64],
    aux: Option<&EmpiricalMeasure>,
) -> Result<f64> {
    check_point(model, v)?;
    check_point(model, x)?;
    phi.validate(model.dim)?;
    let density = density_for(model, x, aux)?;
    let mut y = vec![0.0; model.dim];
    let mut out = [0.0];
    let phis = std::slice::from_ref(phi);
    lambda_values(model, quad, phis, v, x, density, &[phi.eval(x)], &mut y, &mut out);
    Ok(out[0])
}

/// `Lambda_phi(v, x)` with `n_quad` points per angular axis; fails when
/// doubling `n_quad` moves the value by more than `tolerance * max(1, |value|)`.
pub fn lambda_phi_with_tolerance(
    model: &ModelSpec,
    phi: &TestFunction,
    v: &[f64],
    x: &[f64],
    aux: Option<&EmpiricalMeasure>,
    n_quad: usize,
    tolerance: f64,
) -> Result<f64> {
    let coarse = lambda_phi_on(model, &AngularQuadrature::new(model, n_quad)?, phi, v, x, aux)?;
    if !model.variant.is_angular() {
        return Ok(coarse);
    }
    let fine = lambda_phi_on(model, &AngularQuadrature::new(model, 2 * n_quad)?, phi, v, x, aux)?;
    if (coarse - fine).abs() > tolerance * fine.abs().max(1.0) {
        return Err(Error::QuadratureUnderResolved {
            n_quad,
            coarse,
            fine,
        });
    }
    Ok(coarse)
}

pub fn lambda_phi(
    model: &ModelSpec,
    phi: &TestFunction,
    v: &[f64],
    x: &[f64],
    aux: Option<&EmpiricalMeasure>,
    n_quad: usize,
) -> Result<f64> {
    lambda_phi_with_tolerance(model, phi, v, x, aux, n_quad, DEFAULT_QUADRATURE_TOLERANCE)
}

/// Per-phi residual at every node of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    /// `series[k][m]`: residual of `phi_set[k]` at `times[m]`.
    pub series: Vec<Vec<f64>>,
    pub max_residual: f64,
}

/// Synthetic kernel with a tanh coordinate: `tanh(y) = 1 - 2 / (e^{2y} + 1)`
/// and `e^{2 lambda ((1 - kappa) x + kappa v)}` factors over `(x, v)`.
fn synthetic_tanh_double_mean(model: &ModelSpec, lambda: f64, xs: &[f64]) -> Option<f64> {
    let a: Vec<f64> = xs.iter().map(|x| (2.0 * lambda * (1.0 - model.kappa) * x).exp()).collect();
    let b: Vec<f64> = xs.iter().map(|v| (2.0 * lambda * model.kappa * v).exp()).collect();
    let ok = |e: &f64| e.is_finite() && *e > 0.0;
    if !(a.iter().all(ok) && b.iter().all(ok)) {
        return None;
    }
    let n = xs.len();
    let rows: Vec<f64> = a
        .par_iter()
        .zip(xs.par_iter())
        .map_init(
            || vec![0.0; n],
            |buf, (ai, xi)| {
                let here = (lambda * xi).tanh();
                for (slot, bj) in buf.iter_mut().zip(&b) {
                    *slot = (1.0 - 2.0 / (ai * bj + 1.0)) - here;
                }
                pairwise_sum(buf)
            },
        )
        .collect();
    Some(model.g * pairwise_sum(&rows) / (n as f64 * n as f64))
}

/// `(1/N^2) sum_{i, j} Lambda_phi(x_j, x_i)` for every phi.
fn double_means(
    model: &ModelSpec,
    quad: &AngularQuadrature,
    phis: &[TestFunction],
    rho: &EmpiricalMeasure,
) -> Result<Vec<f64>> {
    let n = rho.len();
    let nphi = phis.len();
    let mut result = vec![f64::NAN; nphi];
    let mut rest = Vec::new();
    for (k, f) in phis.iter().enumerate() {
        match f {
            TestFunction::Constant { .. } => result[k] = 0.0,
            TestFunction::TanhCoordinate { lambda, .. } if model.variant == Variant::Synthetic1D => {
                match synthetic_tanh_double_mean(model, *lambda, rho.coords()) {
                    Some(m) => result[k] = m,
                    None => rest.push(k),
                }
            }
            _ => rest.push(k),
        }
    }
    if rest.is_empty() {
        return Ok(result);
    }
    let sub_phis: Vec<TestFunction> = rest.iter().map(|&k| phis[k].clone()).collect();
    let m = sub_phis.len();
    let densities: Vec<f64> = if model.variant == Variant::MeanFieldEnskog {
        let positions = rho.marginal(0..3)?;
        (0..n)
            .into_par_iter()
            .map(|i| mean_field_density(&rho.point(i)[0..3], &positions, model.radius))
            .collect()
    } else {
        vec![1.0; n]
    };
    let dim = model.dim;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0; m * n], vec![0.0; dim], vec![0.0; m]),
            |(buf, y, out), i| {
                let x = rho.point(i);
                let base: Vec<f64> = sub_phis.iter().map(|f| f.eval(x)).collect();
                for j in 0..n {
                    lambda_values(model, quad, &sub_phis, rho.point(j), x, densities[i], &base, y, out);
                    for k in 0..m {
                        buf[k * n + j] = out[k];
                    }
                }
                (0..m).map(|k| pairwise_sum(&buf[k * n..(k + 1) * n])).collect()
            },
        )
        .collect();
    for (slot, &k) in rest.iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[slot]).collect();
        result[k] = pairwise_sum(&column) / (n as f64 * n as f64);
    }
    Ok(result)
}

fn drift_means(model: &ModelSpec, phis: &[TestFunction], rho: &EmpiricalMeasure) -> Result<Vec<f64>> {
    if model.variant == Variant::Synthetic1D && model.drift.is_none() || model.variant == Variant::Boltzmann3D {
        return Ok(vec![0.0; phis.len()]);
    }
    let mut out = Vec::with_capacity(phis.len());
    for f in phis {
        let terms = rho
            .points()
            .map(|x| {
                let b = drift_b(model, x)?;
                Ok(b.iter().zip(f.gradient(x)).map(|(bk, gk)| bk * gk).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(pairwise_sum(&terms) / rho.len() as f64);
    }
    Ok(out)
}

fn check_snapshots(model: &ModelSpec, snapshots: &[(f64, &EmpiricalMeasure)]) -> Result<()> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let n = snapshots[0].1.len();
    for (t, m) in snapshots {
        if m.dim() != model.dim {
            return Err(Error::DimensionMismatch {
                expected: model.dim,
                found: m.dim(),
            });
        }
        if m.len() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: m.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time {t}")));
        }
    }
    if snapshots.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidArgument("trajectory times must be non-decreasing".into()));
    }
    Ok(())
}

/// Residual of the weak equation along a trajectory, with left-endpoint time
/// integration and the U-statistic for the double integral.
pub fn weak_residual_series(
    snapshots: &[(f64, &EmpiricalMeasure)],
    model: &ModelSpec,
    phi_set: &[TestFunction],
    n_quad: usize,
) -> Result<ResidualSeries> {
    model.validate()?;
    check_snapshots(model, snapshots)?;
    for f in phi_set {
        f.validate(model.dim)?;
    }
    let quad = AngularQuadrature::new(model, n_quad)?;
    let mean_phi = |rho: &EmpiricalMeasure, f: &TestFunction| {
        let v: Vec<f64> = rho.points().map(|x| f.eval(x)).collect();
        pairwise_sum(&v) / rho.len() as f64
    };
    let start: Vec<f64> = phi_set.iter().map(|f| mean_phi(snapshots[0].1, f)).collect();
    let mut integral = vec![0.0; phi_set.len()];
    let mut series = vec![Vec::with_capacity(snapshots.len()); phi_set.len()];
    for (m, &(t, rho)) in snapshots.iter().enumerate() {
        for (k, f) in phi_set.iter().enumerate() {
            series[k].push(mean_phi(rho, f) - start[k] - integral[k]);
        }
        if m + 1 < snapshots.len() {
            let dt = snapshots[m + 1].0 - t;
            if dt > 0.0 {
                let drift = drift_means(model, phi_set, rho)?;
                let jumps = double_means(model, &quad, phi_set, rho)?;
                for k in 0..phi_set.len() {
                    integral[k] += dt * (drift[k] + jumps[k]);
                }
            }
        }
    }
    let max_residual = series
        .iter()
        .flatten()
        .fold(0.0f64, |acc, r| acc.max(r.abs()));
    Ok(ResidualSeries {
        times: snapshots.iter().map(|s| s.0).collect(),
        series,
        max_residual,
    })
}

/// Maximum absolute weak residual over `phi_set` and the trajectory nodes.
pub fn weak_residual(
    snapshots: &[(f64, &EmpiricalMeasure)],
    model: &ModelSpec,
    phi_set: &[TestFunction],
) -> Result<f64> {
    Ok(weak_residual_series(snapshots, model, phi_set, DEFAULT_RESIDUAL_N_QUAD)?.max_residual)
}

/// Mean and variance at time `t` of the synthetic model
/// `x -> x + kappa (v - x)` at rate `g`.
pub fn moment_ode_oracle(kappa: f64, g: f64, mean0: f64, var0: f64, t: f64) -> (f64, f64) {
    (mean0, var0 * (2.0 * g * kappa * (kappa - 1.0) * t).exp())
}
