//! Phase-space runs with the Enskog and mean-field Enskog kernels.

use kinetic_flows::kernels::BetaKind;
use kinetic_flows::{simulate, InitialLaw, ModelSpec, ParticleSystemState, PartitionSchedule};

fn main() -> kinetic_flows::Result<()> {
    let models = [
        ("enskog", ModelSpec::enskog(0.5, 2.0, 0.2, 1.0).with_beta(BetaKind::Smoothstep)),
        ("mean-field", ModelSpec::mean_field_enskog(0.5, 0.5, 2.0, 0.2, 1.0)),
    ];
    let rho0 = InitialLaw::standard_gaussian(6).sample(400, 1)?;
    let schedule = PartitionSchedule::new(0.0, 0.5, 10)?;
    for (name, model) in models {
        let traj = simulate(&ParticleSystemState::new(rho0.clone(), 0.0), &schedule, &model, 2)?;
        let accepted: u64 = traj.reports.iter().map(|r| r.accepted).sum();
        let candidates: u64 = traj.reports.iter().map(|r| r.candidates).sum();
        println!("{name}: {accepted} of {candidates} candidate collisions accepted");
    }
    Ok(())
}
