use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BetaKind, ModelSpec, Variant};

/// Lipschitz and growth constants of a truncated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBudget {
    /// Lipschitz constant of the drift.
    pub l_b: f64,
    /// Lipschitz constant of the jump measure.
    pub l_mu: f64,
    /// Sublinear growth constant `max(L_mu, int |Q(0, z, u, 0)|)`.
    pub c_mu: f64,
    /// Stability exponent `2 L_b + 3 L_mu`.
    pub l_total: f64,
    /// `|b(0)|`.
    pub drift_at_origin: f64,
}

impl LipschitzBudget {
    fn new(l_b: f64, l_mu: f64, drift_at_origin: f64) -> Self {
        // Q(0, z, u, 0) = c(0, z, 0) 1{..} = 0 for every kernel here
        let c_mu = l_mu;
        Self {
            l_b,
            l_mu,
            c_mu,
            l_total: 2.0 * l_b + 3.0 * l_mu,
            drift_at_origin,
        }
    }

    pub fn of(model: &ModelSpec) -> Self {
        let gamma = model.gamma_cap;
        let a = model.a;
        match model.variant {
            Variant::Synthetic1D => {
                let [b0, b1] = model.drift.unwrap_or([0.0, 0.0]);
                // int |Q1 - Q2| du = g |kappa| |(v1 - v2) - (x1 - x2)|
                Self::new(b1.abs(), model.g * model.kappa.abs(), b0.abs())
            }
            Variant::Boltzmann3D => Self::new(0.0, 6.0 * gamma.powf(a) * alpha_integral(model), 0.0),
            Variant::Enskog => {
                let beta_lip = match model.beta {
                    BetaKind::One => 0.0,
                    BetaKind::Smoothstep => 1.5 / model.radius,
                };
                let alpha = (2.0 * gamma * beta_lip + 1.0) * alpha_integral(model);
                Self::new(1.0, 6.0 * gamma.powf(a) * alpha, 0.0)
            }
            Variant::MeanFieldEnskog => {
                let p_max = (2.0 * PI * model.radius * model.radius).powf(-1.5);
                let l_mu = alpha_integral(model)
                    * p_max
                    * (6.0 * gamma.powf(a) + 4.0 * gamma.powf(a + 1.0) / model.radius);
                Self::new(1.0, l_mu, 0.0)
            }
        }
    }
}

/// Budget of `model`; shorthand for [`LipschitzBudget::of`].
pub fn lipschitz_budget(model: &ModelSpec) -> LipschitzBudget {
    LipschitzBudget::of(model)
}

/// `int alpha d mu` with `alpha(z) = 2 zeta` over `[zeta_min, pi] x [0, 2 pi)`.
pub(crate) fn alpha_integral(model: &ModelSpec) -> f64 {
    let e = 1.0 - model.nu;
    4.0 * PI * (PI.powf(e) - model.zeta_min.powf(e)) / e
}

/// Constant `C` of the one-step growth bound `E|X_{s,t} - X| <= C (t - s)`
/// for an initial law with first absolute moment `first_moment`.
pub fn h6b_constant(budget: &LipschitzBudget, first_moment: f64) -> f64 {
    budget.drift_at_origin + budget.c_mu + (2.0 * budget.l_b + 3.0 * budget.c_mu) * first_moment
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boltzmann_constant_without_cutoff() {
        let m = ModelSpec::boltzmann3d(0.5, 0.5, 1.0, 0.0);
        let b = LipschitzBudget::of(&m);
        let closed = 6.0 * 4.0 * PI * PI.sqrt() / 0.5;
        assert!((b.l_mu - closed).abs() < 1e-12 * closed);
        assert!((b.l_mu - 267.2).abs() < 0.1, "{}", b.l_mu);
        assert_eq!(b.l_b, 0.0);
        assert_eq!(b.l_total, 3.0 * b.l_mu);
    }

    #[test]
    fn alpha_integral_matches_midpoint_quadrature() {
        let m = ModelSpec::boltzmann3d(0.5, 0.3, 2.0, 0.2);
        let n = 200_000;
        let h = (PI - 0.2) / n as f64;
        let q: f64 = (0..n)
            .map(|k| {
                let z = 0.2 + (k as f64 + 0.5) * h;
                2.0 * z * z.powf(-1.3) * h
            })
            .sum::<f64>()
            * 2.0
            * PI;
        assert!((q - alpha_integral(&m)).abs() < 1e-8);
    }

    #[test]
    fn synthetic_budget() {
        let b = LipschitzBudget::of(&ModelSpec::synthetic(0.5, 2.0).with_drift(1.0, -0.25));
        assert_eq!(b.l_mu, 1.0);
        assert_eq!(b.l_b, 0.25);
        assert_eq!(b.l_total, 3.5);
        assert_eq!(h6b_constant(&b, 2.0), 1.0 + 1.0 + 3.5 * 2.0);
    }

    #[test]
    fn phase_space_budgets_scale_like_gamma_a_plus_one() {
        let small = LipschitzBudget::of(&ModelSpec::enskog(0.5, 10.0, 0.2, 1.0));
        let large = LipschitzBudget::of(&ModelSpec::enskog(0.5, 40.0, 0.2, 1.0));
        let ratio = large.l_mu / small.l_mu;
        assert!((ratio / 4f64.powf(1.5) - 1.0).abs() < 0.05, "{ratio}");
        let mf = LipschitzBudget::of(&ModelSpec::mean_field_enskog(0.5, 0.5, 2.0, 0.2, 1.0));
        assert!(mf.l_mu > 0.0 && mf.l_b == 1.0);
    }
}
