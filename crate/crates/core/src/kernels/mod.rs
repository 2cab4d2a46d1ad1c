//! Coefficient triplets `(b, c, gamma)` for the supported collision models.
//!
//! Every model is truncated: velocities enter the collision kernel and the
//! rate through the radial projection onto the ball of radius `gamma_cap`, and
//! the angular measure `zeta^-(1+nu) dzeta dphi` is restricted to
//! `[zeta_min, pi] x [0, 2 pi)` so that its total mass is finite.

mod budget;
mod coefficients;
pub mod geometry;

pub use budget::{h6b_constant, lipschitz_budget, LipschitzBudget};
pub use coefficients::{
    angular_from_uniform, collision_c, collision_jump_into, collision_weight, drift_b, gaussian_kernel,
    mean_field_density, mu_mass, rate_cap, rate_gamma, rate_gamma_with_density, sample_angular,
    smoothstep_cutoff,
};
pub use geometry::{delta, frame, truncate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deflection angle and azimuth `z = (zeta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularParams {
    pub zeta: f64,
    pub phi: f64,
}

impl AngularParams {
    /// Mark used by models whose mark space is a single atom.
    pub const ATOM: AngularParams = AngularParams {
        zeta: 0.0,
        phi: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Synthetic1D,
    Boltzmann3D,
    Enskog,
    MeanFieldEnskog,
}

impl Variant {
    pub fn dim(self) -> usize {
        match self {
            Variant::Synthetic1D => 1,
            Variant::Boltzmann3D => 3,
            Variant::Enskog | Variant::MeanFieldEnskog => 6,
        }
    }

    pub fn is_angular(self) -> bool {
        !matches!(self, Variant::Synthetic1D)
    }

    pub fn is_phase_space(self) -> bool {
        matches!(self, Variant::Enskog | Variant::MeanFieldEnskog)
    }
}

/// Sign of the `(1 - cos zeta)/2 (v - x)` term of the deflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `+`: pairwise momentum and energy are conserved.
    #[default]
    Energy,
    /// `-`: the sign as printed in the original parametrization.
    PaperLiteral,
}

/// Spatial localization factor of the Enskog kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaKind {
    /// `beta = 1`: collisions regardless of distance.
    #[default]
    One,
    /// `beta = i_R(|x_bar - v_bar|)`, a C^1 cubic step from 1 at `R` to 0 at `2R`.
    Smoothstep,
}

/// One coefficient triplet and all of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Hard-potential exponent; `0` selects Maxwell molecules.
    pub a: f64,
    /// Angular singularity exponent.
    pub nu: f64,
    /// Velocity truncation level.
    pub gamma_cap: f64,
    /// Angular cutoff.
    pub zeta_min: f64,
    /// Localization radius (Enskog and mean-field only).
    #[serde(rename = "R")]
    pub radius: f64,
    pub beta: BetaKind,
    /// Jump fraction of the synthetic model.
    pub kappa: f64,
    /// Constant rate of the synthetic model.
    pub g: f64,
    pub convention: Convention,
    pub dim: usize,
    /// Affine drift `b0 + b1 x` of the synthetic model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<[f64; 2]>,
}

impl ModelSpec {
    /// `c = kappa (v - x)`, constant rate `g`, zero drift, on `R`.
    pub fn synthetic(kappa: f64, g: f64) -> Self {
        Self {
            variant: Variant::Synthetic1D,
            a: 0.0,
            nu: 0.5,
            gamma_cap: 1.0,
            zeta_min: 0.0,
            radius: 1.0,
            beta: BetaKind::One,
            kappa,
            g,
            convention: Convention::Energy,
            dim: 1,
            drift: None,
        }
    }

    /// Homogeneous hard-potential (or Maxwell, `a = 0`) Boltzmann kernel on `R^3`.
    pub fn boltzmann3d(a: f64, nu: f64, gamma_cap: f64, zeta_min: f64) -> Self {
        Self {
            variant: Variant::Boltzmann3D,
            a,
            nu,
            gamma_cap,
            zeta_min,
            radius: 1.0,
            beta: BetaKind::One,
            kappa: 0.0,
            g: 0.0,
            convention: Convention::Energy,
            dim: 3,
            drift: None,
        }
    }

    /// Enskog kernel on phase space `R^3 x R^3`; the angular exponent defaults to `a`.
    pub fn enskog(a: f64, gamma_cap: f64, zeta_min: f64, radius: f64) -> Self {
        Self {
            variant: Variant::Enskog,
            a,
            nu: a,
            gamma_cap,
            zeta_min,
            radius,
            beta: BetaKind::Smoothstep,
            kappa: 0.0,
            g: 0.0,
            convention: Convention::Energy,
            dim: 6,
            drift: None,
        }
    }

    /// Boltzmann collisions with a Gaussian mean-field rate factor on positions.
    pub fn mean_field_enskog(a: f64, nu: f64, gamma_cap: f64, zeta_min: f64, radius: f64) -> Self {
        Self {
            variant: Variant::MeanFieldEnskog,
            a,
            nu,
            gamma_cap,
            zeta_min,
            radius,
            beta: BetaKind::One,
            kappa: 0.0,
            g: 0.0,
            convention: Convention::Energy,
            dim: 6,
            drift: None,
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_beta(mut self, beta: BetaKind) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_drift(mut self, b0: f64, b1: f64) -> Self {
        self.drift = Some([b0, b1]);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.dim != self.variant.dim() {
            return bad(format!(
                "{:?} lives in dimension {}, got dim = {}",
                self.variant,
                self.variant.dim(),
                self.dim
            ));
        }
        if self.drift.is_some() && self.variant != Variant::Synthetic1D {
            return bad("affine drift is only defined for Synthetic1D".into());
        }
        match self.variant {
            Variant::Synthetic1D => {
                if !(self.g >= 0.0 && self.g.is_finite()) {
                    return bad(format!("rate g = {} must be finite and >= 0", self.g));
                }
                if !self.kappa.is_finite() {
                    return bad("kappa must be finite".into());
                }
                if let Some([b0, b1]) = self.drift {
                    if !(b0.is_finite() && b1.is_finite()) {
                        return bad("drift coefficients must be finite".into());
                    }
                }
            }
            _ => {
                if !(0.0..=1.0).contains(&self.a) {
                    return bad(format!("a = {} outside [0, 1]", self.a));
                }
                if !(self.nu > 0.0 && self.nu < 1.0) {
                    return bad(format!("nu = {} outside (0, 1)", self.nu));
                }
                if !(self.gamma_cap >= 1.0 && self.gamma_cap.is_finite()) {
                    return bad(format!("gamma_cap = {} must be finite and >= 1", self.gamma_cap));
                }
                if !(self.zeta_min > 0.0) {
                    return bad(format!("zeta_min = {} must be positive", self.zeta_min));
                }
                if self.zeta_min >= std::f64::consts::PI {
                    return Err(Error::DegenerateCutoff {
                        zeta_min: self.zeta_min,
                    });
                }
                if self.variant.is_phase_space() && !(self.radius > 0.0 && self.radius.is_finite()) {
                    return bad(format!("R = {} must be positive", self.radius));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    /// Dominating candidate rate `mu(E) * rate_cap`; time-homogeneous.
    pub fn candidate_rate(&self) -> Result<f64> {
        Ok(mu_mass(self)? * rate_cap(self))
    }
}
