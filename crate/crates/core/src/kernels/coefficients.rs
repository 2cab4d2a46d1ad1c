use std::f64::consts::PI;

use rand::Rng;

use super::geometry::{delta, norm3, sub, truncate3, vec3, Vec3};
use super::{AngularParams, BetaKind, Convention, ModelSpec, Variant};
use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;

/// Velocity block of a state vector.
#[inline]
fn velocity(model: &ModelSpec, state: &[f64]) -> Vec3 {
    if model.variant.is_phase_space() {
        vec3(&state[3..6])
    } else {
        vec3(state)
    }
}

fn check_state(model: &ModelSpec, state: &[f64]) -> Result<()> {
    if state.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: state.len(),
        });
    }
    Ok(())
}

/// C^1 cubic step: 1 on `[0, R]`, 0 on `[2R, inf)`.
pub fn smoothstep_cutoff(r: f64, radius: f64) -> f64 {
    if r <= radius {
        1.0
    } else if r >= 2.0 * radius {
        0.0
    } else {
        let s = (r - radius) / radius;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Isotropic Gaussian density of scale `radius` on `R^d`, `d = y.len()`.
pub fn gaussian_kernel(y: &[f64], radius: f64) -> f64 {
    let d = y.len() as f64;
    let r2: f64 = y.iter().map(|c| c * c).sum();
    (2.0 * PI * radius * radius).powf(-d / 2.0) * (-r2 / (2.0 * radius * radius)).exp()
}

/// `(1/N) sum_j p_R(x_bar - x_bar_j)` over the position marginal `positions`.
pub fn mean_field_density(x_bar: &[f64], positions: &EmpiricalMeasure, radius: f64) -> f64 {
    let n = positions.len() as f64;
    let mut diff = vec![0.0; x_bar.len()];
    positions
        .points()
        .map(|p| {
            for (d, (a, b)) in diff.iter_mut().zip(x_bar.iter().zip(p)) {
                *d = a - b;
            }
            gaussian_kernel(&diff, radius)
        })
        .sum::<f64>()
        / n
}

/// Localization factor `beta(v_bar, x_bar)` on truncated positions.
#[inline]
fn beta(model: &ModelSpec, v_bar: &Vec3, x_bar: &Vec3) -> f64 {
    match model.beta {
        BetaKind::One => 1.0,
        BetaKind::Smoothstep => {
            let a = truncate3(v_bar, model.gamma_cap);
            let b = truncate3(x_bar, model.gamma_cap);
            smoothstep_cutoff(norm3(&sub(&b, &a)), model.radius)
        }
    }
}

/// Three-dimensional deflection of the typical particle at `x` colliding with `v`.
#[inline]
fn deflection(v: &Vec3, x: &Vec3, z: AngularParams, convention: Convention) -> Vec3 {
    let rel = sub(v, x);
    let (sz, cz) = z.zeta.sin_cos();
    let drift = match convention {
        Convention::Energy => 0.5 * (1.0 - cz),
        Convention::PaperLiteral => -0.5 * (1.0 - cz),
    };
    let d = delta(&rel, z.phi);
    let h = 0.5 * sz;
    [
        drift * rel[0] + h * d[0],
        drift * rel[1] + h * d[1],
        drift * rel[2] + h * d[2],
    ]
}

/// Spatial weight multiplying the deflection: `beta` for the Enskog kernel, `1` otherwise.
pub fn collision_weight(model: &ModelSpec, v: &[f64], x: &[f64]) -> f64 {
    if model.variant == Variant::Enskog {
        beta(model, &vec3(&v[0..3]), &vec3(&x[0..3]))
    } else {
        1.0
    }
}

/// Adds the jump `c(v, z, x)` of the truncated kernel to `out` (length `model.dim`).
pub fn collision_jump_into(model: &ModelSpec, v: &[f64], z: AngularParams, x: &[f64], out: &mut [f64]) {
    match model.variant {
        Variant::Synthetic1D => out[0] += model.kappa * (v[0] - x[0]),
        Variant::Boltzmann3D => {
            let hv = truncate3(&vec3(v), model.gamma_cap);
            let hx = truncate3(&vec3(x), model.gamma_cap);
            let c = deflection(&hv, &hx, z, model.convention);
            for k in 0..3 {
                out[k] += c[k];
            }
        }
        Variant::Enskog | Variant::MeanFieldEnskog => {
            let hv = truncate3(&vec3(&v[3..6]), model.gamma_cap);
            let hx = truncate3(&vec3(&x[3..6]), model.gamma_cap);
            let weight = if model.variant == Variant::Enskog {
                beta(model, &vec3(&v[0..3]), &vec3(&x[0..3]))
            } else {
                1.0
            };
            if weight == 0.0 {
                return;
            }
            let c = deflection(&hv, &hx, z, model.convention);
            for k in 0..3 {
                out[3 + k] += weight * c[k];
            }
        }
    }
}

/// Jump `c(v, z, x)` applied to the typical particle `x` when its partner is `v`.
pub fn collision_c(model: &ModelSpec, v: &[f64], z: AngularParams, x: &[f64]) -> Result<Vec<f64>> {
    check_state(model, v)?;
    check_state(model, x)?;
    let mut out = vec![0.0; model.dim];
    collision_jump_into(model, v, z, x, &mut out);
    Ok(out)
}

/// Rate with the mean-field factor already evaluated (ignored by other variants).
#[inline]
pub fn rate_gamma_with_density(model: &ModelSpec, v: &[f64], x: &[f64], density: f64) -> f64 {
    match model.variant {
        Variant::Synthetic1D => model.g,
        _ => {
            let hv = truncate3(&velocity(model, v), model.gamma_cap);
            let hx = truncate3(&velocity(model, x), model.gamma_cap);
            let speed = norm3(&sub(&hv, &hx));
            let base = if model.a == 0.0 { 1.0 } else { speed.powf(model.a) };
            if model.variant == Variant::MeanFieldEnskog {
                base * density
            } else {
                base
            }
        }
    }
}

/// Jump rate `gamma(v, x, rho)`; `aux` is the position marginal for the mean-field model.
pub fn rate_gamma(
    model: &ModelSpec,
    v: &[f64],
    x: &[f64],
    aux: Option<&EmpiricalMeasure>,
) -> Result<f64> {
    check_state(model, v)?;
    check_state(model, x)?;
    let density = if model.variant == Variant::MeanFieldEnskog {
        let positions = aux.ok_or(Error::MissingAux)?;
        if positions.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: positions.dim(),
            });
        }
        mean_field_density(&x[0..3], positions, model.radius)
    } else {
        1.0
    };
    Ok(rate_gamma_with_density(model, v, x, density))
}

/// Drift `b(x)`: transport of positions by velocities on phase space, affine
/// for the synthetic model, zero otherwise.
pub fn drift_b(model: &ModelSpec, state: &[f64]) -> Result<Vec<f64>> {
    check_state(model, state)?;
    Ok(match model.variant {
        Variant::Synthetic1D => match model.drift {
            Some([b0, b1]) => vec![b0 + b1 * state[0]],
            None => vec![0.0],
        },
        Variant::Boltzmann3D => vec![0.0; 3],
        Variant::Enskog | Variant::MeanFieldEnskog => {
            vec![state[3], state[4], state[5], 0.0, 0.0, 0.0]
        }
    })
}

fn cutoff_check(model: &ModelSpec) -> Result<()> {
    if model.zeta_min >= PI {
        return Err(Error::DegenerateCutoff {
            zeta_min: model.zeta_min,
        });
    }
    Ok(())
}

/// Inverse CDF of the normalized `zeta^-(1+nu)` density on `[zeta_min, pi]`.
pub fn angular_from_uniform(model: &ModelSpec, u_zeta: f64, u_phi: f64) -> Result<AngularParams> {
    if !model.variant.is_angular() {
        return Ok(AngularParams::ATOM);
    }
    cutoff_check(model)?;
    let lo = model.zeta_min.powf(-model.nu);
    let hi = PI.powf(-model.nu);
    let zeta = (lo - u_zeta * (lo - hi)).powf(-1.0 / model.nu);
    Ok(AngularParams {
        zeta: zeta.clamp(model.zeta_min, PI),
        phi: 2.0 * PI * u_phi,
    })
}

/// Draws `z ~ mu / mu(E)`; synthetic models return the single atom without drawing.
pub fn sample_angular<R: Rng + ?Sized>(model: &ModelSpec, rng: &mut R) -> Result<AngularParams> {
    if !model.variant.is_angular() {
        return Ok(AngularParams::ATOM);
    }
    let u: f64 = rng.random();
    let w: f64 = rng.random();
    angular_from_uniform(model, u, w)
}

/// Total mass `mu(E)` of the (cut off) angular measure.
pub fn mu_mass(model: &ModelSpec) -> Result<f64> {
    if !model.variant.is_angular() {
        return Ok(1.0);
    }
    cutoff_check(model)?;
    let nu = model.nu;
    Ok(2.0 * PI * (model.zeta_min.powf(-nu) - PI.powf(-nu)) / nu)
}

/// Uniform bound on the rate over the truncated state space.
pub fn rate_cap(model: &ModelSpec) -> f64 {
    match model.variant {
        Variant::Synthetic1D => model.g,
        Variant::Boltzmann3D | Variant::Enskog => (2.0 * model.gamma_cap).powf(model.a),
        Variant::MeanFieldEnskog => {
            let r2 = model.radius * model.radius;
            (2.0 * model.gamma_cap).powf(model.a) * (2.0 * PI * r2).powf(-1.5)
        }
    }
}
