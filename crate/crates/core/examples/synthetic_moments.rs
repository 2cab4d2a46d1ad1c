//! Synthetic relaxation model against its closed-form variance.

use kinetic_flows::numerics::{mean, sample_variance};
use kinetic_flows::{moment_ode_oracle, simulate, InitialLaw, ModelSpec, ParticleSystemState, PartitionSchedule};

fn main() -> kinetic_flows::Result<()> {
    let (kappa, g) = (0.5, 1.0);
    let model = ModelSpec::synthetic(kappa, g);
    let rho0 = InitialLaw::standard_gaussian(1).sample(10_000, 1)?;
    let schedule = PartitionSchedule::new(0.0, 1.0, 100)?;
    let traj = simulate(&ParticleSystemState::new(rho0, 0.0), &schedule, &model, 2)?;

    println!("{:>5} {:>10} {:>10}", "t", "var", "oracle");
    for state in traj.states.iter().step_by(20) {
        let xs: Vec<f64> = state.particles.points().map(|p| p[0]).collect();
        let (_, oracle) = moment_ode_oracle(kappa, g, 0.0, 1.0, state.clock);
        println!("{:>5.2} {:>10.5} {:>10.5}", state.clock, sample_variance(&xs), oracle);
    }
    let end: Vec<f64> = traj.terminal().particles.points().map(|p| p[0]).collect();
    println!("terminal mean {:.5}", mean(&end));
    Ok(())
}
