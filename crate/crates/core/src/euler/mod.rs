//! One-step Euler endomorphism and the interacting particle scheme.
//!
//! Within a step `[s, t)` every particle keeps reading the state frozen at
//! `s`: the drift, the rate and the jump of each accepted candidate are
//! evaluated on the step-start configuration, and the jumps are summed.
//! Candidates arrive at the dominating intensity `mu(E) * rate_cap` and are
//! accepted when their mark `u` falls below the actual rate.

mod noise;
mod trajectory;

pub use noise::{CandidateEvent, DrivingNoise, EventSource};
pub use trajectory::{simulate, simulate_terminal, simulate_with, Trajectory};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    collision_jump_into, drift_b, mean_field_density, rate_gamma_with_density, AngularParams,
    ModelSpec, Variant,
};
use crate::measures::EmpiricalMeasure;

/// Particle configuration and simulation clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSystemState {
    pub particles: EmpiricalMeasure,
    pub clock: f64,
}

impl ParticleSystemState {
    pub fn new(particles: EmpiricalMeasure, clock: f64) -> Self {
        Self { particles, clock }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Thinning diagnostics of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepReport {
    pub candidates: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
}

impl StepReport {
    fn from_counts(candidates: u64, accepted: u64) -> Self {
        let acceptance_rate = if candidates == 0 {
            0.0
        } else {
            accepted as f64 / candidates as f64
        };
        Self {
            candidates,
            accepted,
            acceptance_rate,
        }
    }
}

/// A candidate together with its thinning outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub partner: usize,
    pub z: AngularParams,
    pub u: f64,
    pub accepted: bool,
}

/// Mean-field rate factor of each target against the partner positions.
fn position_densities(
    model: &ModelSpec,
    targets: &EmpiricalMeasure,
    partners: &EmpiricalMeasure,
) -> Result<Option<Vec<f64>>> {
    if model.variant != Variant::MeanFieldEnskog {
        return Ok(None);
    }
    let positions = partners.marginal(0..3)?;
    let densities = (0..targets.len())
        .into_par_iter()
        .map(|i| mean_field_density(&targets.point(i)[0..3], &positions, model.radius))
        .collect();
    Ok(Some(densities))
}

/// Advances every point of `initial` over `[s, t)` with partners drawn from `rho`.
fn advance<S: EventSource>(
    rho: &EmpiricalMeasure,
    initial: &EmpiricalMeasure,
    s: f64,
    t: f64,
    model: &ModelSpec,
    noise: &S,
) -> Result<(EmpiricalMeasure, StepReport)> {
    if t < s {
        return Err(Error::NegativeDuration { s, t });
    }
    for m in [rho, initial] {
        m.check_dim(model.dim).map_err(|_| Error::DimensionMismatch {
            expected: model.dim,
            found: m.dim(),
        })?;
    }
    if t == s {
        return Ok((initial.clone(), StepReport::default()));
    }
    let dim = model.dim;
    let dt = t - s;
    let densities = position_densities(model, initial, rho)?;
    let mut out = initial.coords().to_vec();
    let counts: Vec<Result<(u64, u64)>> = out
        .par_chunks_mut(dim)
        .enumerate()
        .map_init(Vec::new, |events, (i, slot)| {
            let x = initial.point(i);
            let b = drift_b(model, x)?;
            for (o, bk) in slot.iter_mut().zip(&b) {
                *o += bk * dt;
            }
            events.clear();
            noise.candidates(i, s, t, rho.len(), model, events)?;
            let density = densities.as_ref().map_or(1.0, |d| d[i]);
            let mut accepted = 0u64;
            for e in events.iter() {
                let v = rho.point(e.partner);
                if e.u <= rate_gamma_with_density(model, v, x, density) {
                    accepted += 1;
                    collision_jump_into(model, v, e.z, x, slot);
                }
            }
            Ok((events.len() as u64, accepted))
        })
        .collect();
    let mut candidates = 0;
    let mut accepted = 0;
    for c in counts {
        let (n, a) = c?;
        candidates += n;
        accepted += a;
    }
    Ok((
        EmpiricalMeasure::new(dim, out)?,
        StepReport::from_counts(candidates, accepted),
    ))
}

/// One Euler step of the law-driven equation: each point of `initial` jumps
/// against partners drawn from `rho` over `[s, t)`.
pub fn one_step_theta<S: EventSource>(
    rho: &EmpiricalMeasure,
    initial: &EmpiricalMeasure,
    s: f64,
    t: f64,
    model: &ModelSpec,
    noise: &S,
) -> Result<EmpiricalMeasure> {
    advance(rho, initial, s, t, model, noise).map(|(m, _)| m)
}

/// One step of the interacting system: partners are the particles themselves
/// (self-partnering included), frozen at `state.clock`.
pub fn particle_step<S: EventSource>(
    state: &ParticleSystemState,
    dt: f64,
    model: &ModelSpec,
    noise: &S,
) -> Result<(ParticleSystemState, StepReport)> {
    particle_step_to(state, state.clock + dt, model, noise)
}

/// Like [`particle_step`] but to an absolute end time, so that grid nodes are
/// reproduced exactly.
pub fn particle_step_to<S: EventSource>(
    state: &ParticleSystemState,
    t: f64,
    model: &ModelSpec,
    noise: &S,
) -> Result<(ParticleSystemState, StepReport)> {
    let s = state.clock;
    if t < s {
        return Err(Error::NegativeDuration { s, t });
    }
    let (particles, report) = advance(&state.particles, &state.particles, s, t, model, noise)?;
    Ok((ParticleSystemState::new(particles, t), report))
}

/// Candidates of particle `i` over the next step with their thinning outcome.
pub fn particle_events<S: EventSource>(
    state: &ParticleSystemState,
    dt: f64,
    model: &ModelSpec,
    noise: &S,
    i: usize,
) -> Result<Vec<JumpEvent>> {
    let s = state.clock;
    let mut events = Vec::new();
    noise.candidates(i, s, s + dt, state.len(), model, &mut events)?;
    let densities = position_densities(model, &state.particles, &state.particles)?;
    let density = densities.as_ref().map_or(1.0, |d| d[i]);
    let x = state.particles.point(i);
    Ok(events
        .into_iter()
        .map(|e| {
            let gamma = rate_gamma_with_density(model, state.particles.point(e.partner), x, density);
            JumpEvent {
                time: e.time,
                partner: e.partner,
                z: e.z,
                u: e.u,
                accepted: e.u <= gamma,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-specified candidates, keyed by particle.
    struct Forced(Vec<Vec<CandidateEvent>>);

    impl EventSource for Forced {
        fn candidates(
            &self,
            particle: usize,
            s: f64,
            t: f64,
            _n: usize,
            _m: &ModelSpec,
            out: &mut Vec<CandidateEvent>,
        ) -> Result<()> {
            out.extend(
                self.0[particle]
                    .iter()
                    .filter(|e| e.time >= s && e.time < t)
                    .copied(),
            );
            Ok(())
        }
    }

    fn ev(time: f64, partner: usize) -> CandidateEvent {
        CandidateEvent {
            time,
            partner,
            z: AngularParams::ATOM,
            u: 0.0,
        }
    }

    fn state(xs: &[f64]) -> ParticleSystemState {
        ParticleSystemState::new(EmpiricalMeasure::from_scalars(xs).unwrap(), 0.0)
    }

    #[test]
    fn forced_single_event() {
        let model = ModelSpec::synthetic(0.5, 1.0);
        let noise = Forced(vec![vec![ev(0.1, 1)], vec![]]);
        let (next, report) = particle_step(&state(&[0.0, 2.0]), 0.5, &model, &noise).unwrap();
        assert_eq!(next.particles.coords(), &[1.0, 2.0]);
        assert_eq!(next.clock, 0.5);
        assert_eq!((report.candidates, report.accepted), (1, 1));
    }

    #[test]
    fn jumps_within_a_step_read_the_frozen_state() {
        let model = ModelSpec::synthetic(0.5, 1.0);
        let noise = Forced(vec![vec![ev(0.1, 1), ev(0.2, 1)], vec![]]);
        let (next, _) = particle_step(&state(&[0.0, 2.0]), 0.5, &model, &noise).unwrap();
        // sequential updating would give 1.5
        assert_eq!(next.particles.coords()[0], 2.0);

        // the partner's own jump earlier in the step is not seen either
        let noise = Forced(vec![vec![ev(0.3, 1)], vec![ev(0.1, 0)]]);
        let (next, _) = particle_step(&state(&[0.0, 2.0]), 0.5, &model, &noise).unwrap();
        assert_eq!(next.particles.coords(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_duration_is_identity() {
        let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
        let s0 = ParticleSystemState::new(
            EmpiricalMeasure::from_points(&[[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]]).unwrap(),
            0.0,
        );
        let (next, report) = particle_step(&s0, 0.0, &model, &DrivingNoise::new(3)).unwrap();
        assert_eq!(next, s0);
        assert_eq!(report, StepReport::default());
        assert!(matches!(
            particle_step(&s0, -0.1, &model, &DrivingNoise::new(3)),
            Err(Error::NegativeDuration { .. })
        ));
    }

    #[test]
    fn identical_particles_never_jump_for_hard_potentials() {
        let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
        let pts = vec![[0.4, -0.3, 1.1]; 50];
        let rho = EmpiricalMeasure::from_points(&pts).unwrap();
        let out = one_step_theta(&rho, &rho, 0.0, 1.0, &model, &DrivingNoise::new(9)).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn drift_moves_positions() {
        let model = ModelSpec::synthetic(0.5, 0.0).with_drift(1.0, 0.0);
        let (next, _) = particle_step(&state(&[0.0, 5.0]), 0.25, &model, &DrivingNoise::new(1)).unwrap();
        assert_eq!(next.particles.coords(), &[0.25, 5.25]);
    }

    #[test]
    fn events_report_thinning_outcome() {
        let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
        let s0 = ParticleSystemState::new(
            EmpiricalMeasure::from_points(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap(),
            0.0,
        );
        let events = particle_events(&s0, 1.0, &model, &DrivingNoise::new(5), 0).unwrap();
        for e in &events {
            let gamma = if e.partner == 0 { 0.0 } else { 1.0 };
            assert_eq!(e.accepted, e.u <= gamma);
        }
        let (_, report) = particle_step(&s0, 1.0, &model, &DrivingNoise::new(5)).unwrap();
        let n0 = events.len() as u64;
        assert!(report.candidates >= n0);
    }
}
