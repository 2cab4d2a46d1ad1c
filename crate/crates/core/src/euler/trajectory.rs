use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{particle_step_to, DrivingNoise, EventSource, ParticleSystemState, StepReport};
use crate::error::{Error, Result};
use crate::flow::PartitionSchedule;
use crate::kernels::ModelSpec;
use crate::measures::EmpiricalMeasure;

/// States at every grid node (`n + 1` of them) and the reports of the `n` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<ParticleSystemState>,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn terminal(&self) -> &ParticleSystemState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.clock).collect()
    }

    pub fn measures(&self) -> Vec<(f64, &EmpiricalMeasure)> {
        self.states.iter().map(|s| (s.clock, &s.particles)).collect()
    }

    /// Writes `snapshot_XXXX.csv` per node and `manifest.json` into `dir`.
    pub fn export(
        &self,
        dir: &Path,
        seed: u64,
        model: &ModelSpec,
        schedule: &PartitionSchedule,
    ) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut snapshots = Vec::with_capacity(self.states.len());
        for (k, state) in self.states.iter().enumerate() {
            let name = format!("snapshot_{k:04}.csv");
            state.particles.write_csv(fs::File::create(dir.join(&name))?)?;
            snapshots.push(name);
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            seed: u64,
            model: &'a ModelSpec,
            schedule: &'a PartitionSchedule,
            times: Vec<f64>,
            snapshots: &'a [String],
            step_reports: &'a [StepReport],
        }
        let manifest = Manifest {
            seed,
            model,
            schedule,
            times: self.times(),
            snapshots: &snapshots,
            step_reports: &self.reports,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(snapshots)
    }
}

/// Runs the particle scheme over `schedule` with the driving noise of `seed`.
pub fn simulate(
    state0: &ParticleSystemState,
    schedule: &PartitionSchedule,
    model: &ModelSpec,
    seed: u64,
) -> Result<Trajectory> {
    simulate_with(state0, schedule, model, &DrivingNoise::new(seed))
}

pub fn simulate_with<S: EventSource>(
    state0: &ParticleSystemState,
    schedule: &PartitionSchedule,
    model: &ModelSpec,
    noise: &S,
) -> Result<Trajectory> {
    schedule.validate()?;
    model.validate()?;
    if state0.clock != schedule.s {
        return Err(Error::InvalidSchedule(format!(
            "initial clock {} differs from schedule start {}",
            state0.clock, schedule.s
        )));
    }
    let mut states = Vec::with_capacity(schedule.n + 1);
    let mut reports = Vec::with_capacity(schedule.n);
    states.push(state0.clone());
    for k in 1..=schedule.n {
        let (next, report) = particle_step_to(&states[k - 1], schedule.node(k), model, noise)?;
        states.push(next);
        reports.push(report);
    }
    Ok(Trajectory { states, reports })
}

/// Terminal state only, without keeping intermediate snapshots.
pub fn simulate_terminal<S: EventSource>(
    state0: &ParticleSystemState,
    schedule: &PartitionSchedule,
    model: &ModelSpec,
    noise: &S,
) -> Result<ParticleSystemState> {
    schedule.validate()?;
    model.validate()?;
    if state0.clock != schedule.s {
        return Err(Error::InvalidSchedule(format!(
            "initial clock {} differs from schedule start {}",
            state0.clock, schedule.s
        )));
    }
    let mut state = state0.clone();
    for k in 1..=schedule.n {
        state = particle_step_to(&state, schedule.node(k), model, noise)?.0;
    }
    Ok(state)
}
