use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::geometry::{dot, frame, norm3, sub, truncate3, Vec3};
use crate::kernels::{
    collision_c, collision_weight, rate_cap, rate_gamma, sample_angular, ModelSpec, Variant,
};
use crate::measures::EmpiricalMeasure;

/// Deviation allowed for every exact identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: CheckStatus,
    pub worst_deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub samples: usize,
    pub checks: Vec<IdentityCheck>,
}

impl KernelReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Worst {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Worst {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            value: 0.0,
            tolerance,
        }
    }

    fn see(&mut self, deviation: f64) {
        // NaN must not hide
        if !(deviation <= self.value) {
            self.value = deviation;
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            status: if self.value <= self.tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            worst_deviation: self.value,
            tolerance: self.tolerance,
        }
    }
}

fn not_applicable(name: &str) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        status: CheckStatus::NotApplicable,
        worst_deviation: 0.0,
        tolerance: IDENTITY_TOLERANCE,
    }
}

fn random_vec3<R: Rng>(rng: &mut R, half_width: f64) -> Vec3 {
    [
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    ]
}

fn random_state<R: Rng>(rng: &mut R, model: &ModelSpec, half_width: f64) -> Vec<f64> {
    (0..model.dim)
        .map(|_| rng.random_range(-half_width..half_width))
        .collect()
}

/// Runs the kernel identity suite on `samples` random inputs.
pub fn validate_kernels(model: &ModelSpec, samples: usize, seed: u64) -> Result<KernelReport> {
    model.validate()?;
    if samples < 10_000 {
        return Err(Error::Config {
            field: "samples".into(),
            message: format!("need at least 10^4 samples, got {samples}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma_cap = model.gamma_cap;
    // inputs reach past the truncation radius
    let width = if model.variant == Variant::Synthetic1D {
        5.0
    } else {
        2.0 * gamma_cap
    };
    let off = if model.variant.is_phase_space() { 3 } else { 0 };
    let angular = model.variant.is_angular();

    let mut norm = Worst::new("norm_identity", IDENTITY_TOLERANCE);
    let mut ortho = Worst::new("frame_orthonormality", IDENTITY_TOLERANCE);
    let mut lipschitz = Worst::new("truncation_lipschitz", IDENTITY_TOLERANCE);
    let mut conservation = Worst::new("pairwise_conservation", IDENTITY_TOLERANCE);
    let mut cap = Worst::new("rate_cap", IDENTITY_TOLERANCE);
    let mut synthetic = Worst::new("synthetic_jump", IDENTITY_TOLERANCE);

    let positions = if model.variant == Variant::MeanFieldEnskog {
        let pts: Vec<[f64; 3]> = (0..64).map(|_| random_vec3(&mut rng, model.radius)).collect();
        Some(EmpiricalMeasure::from_points(&pts)?)
    } else {
        None
    };

    for _ in 0..samples {
        let v = random_state(&mut rng, model, width);
        let x = random_state(&mut rng, model, width);
        let z = sample_angular(model, &mut rng)?;
        let gamma = rate_gamma(model, &v, &x, positions.as_ref())?;
        cap.see((gamma - rate_cap(model)).max(0.0));

        if !angular {
            let c = collision_c(model, &v, z, &x)?;
            synthetic.see((c[0] - model.kappa * (v[0] - x[0])).abs());
            continue;
        }

        let hv = truncate3(&[v[off], v[off + 1], v[off + 2]], gamma_cap);
        let hx = truncate3(&[x[off], x[off + 1], x[off + 2]], gamma_cap);
        let raw_v = [v[off], v[off + 1], v[off + 2]];
        let raw_x = [x[off], x[off + 1], x[off + 2]];
        let shrink = norm3(&sub(&hv, &hx)) - norm3(&sub(&raw_v, &raw_x));
        lipschitz.see(shrink.max(0.0));
        lipschitz.see((norm3(&hv) - gamma_cap).max(0.0));

        let rel = sub(&hv, &hx);
        let scale = norm3(&rel);
        let c = collision_c(model, &v, z, &x)?;
        let cv = [c[off], c[off + 1], c[off + 2]];
        let weight = collision_weight(model, &v, &x);
        if weight > 0.0 {
            let expected = weight * (0.5 * z.zeta).sin() * scale;
            norm.see((norm3(&cv) - expected).abs());
        }

        if scale > 0.0 {
            let (i, j) = frame(&rel)?;
            let s2 = scale * scale;
            for d in [
                dot(&i, &rel),
                dot(&j, &rel),
                dot(&i, &j),
                dot(&i, &i) - s2,
                dot(&j, &j) - s2,
            ] {
                ortho.see(d.abs());
            }
        }

        // partner receives -c: momentum is conserved by construction, energy
        // iff c . (v - x) = |c|^2
        if weight > 0.0 {
            let ct = [cv[0] / weight, cv[1] / weight, cv[2] / weight];
            let after = {
                let a = [hx[0] + ct[0], hx[1] + ct[1], hx[2] + ct[2]];
                let b = [hv[0] - ct[0], hv[1] - ct[1], hv[2] - ct[2]];
                dot(&a, &a) + dot(&b, &b)
            };
            let before = dot(&hx, &hx) + dot(&hv, &hv);
            conservation.see((after - before).abs());
        }
    }

    let checks = if angular {
        vec![
            norm.finish(),
            ortho.finish(),
            lipschitz.finish(),
            conservation.finish(),
            cap.finish(),
        ]
    } else {
        vec![
            not_applicable("norm_identity"),
            not_applicable("frame_orthonormality"),
            not_applicable("truncation_lipschitz"),
            not_applicable("pairwise_conservation"),
            cap.finish(),
            synthetic.finish(),
        ]
    };
    Ok(KernelReport { samples, checks })
}
