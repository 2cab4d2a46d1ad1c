//! Mean kinetic energy under Maxwellian collisions, which conserve it pairwise.

use kinetic_flows::euler::particle_step_to;
use kinetic_flows::{DrivingNoise, EmpiricalMeasure, InitialLaw, ModelSpec, ParticleSystemState, PartitionSchedule};

fn energy(m: &EmpiricalMeasure) -> f64 {
    m.points().map(|p| p.iter().map(|c| c * c).sum::<f64>()).sum::<f64>() / (2.0 * m.len() as f64)
}

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::boltzmann3d(0.0, 0.5, 1000.0, 0.2);
    let schedule = PartitionSchedule::new(0.0, 1.0, 200)?;
    let noise = DrivingNoise::new(2);
    let mut state = ParticleSystemState::new(InitialLaw::standard_gaussian(3).sample(2000, 1)?, 0.0);
    println!("t = 0.00  E = {:.5}", energy(&state.particles));
    for k in 1..=schedule.n {
        state = particle_step_to(&state, schedule.node(k), &model, &noise)?.0;
        if k % 50 == 0 {
            println!("t = {:.2}  E = {:.5}", state.clock, energy(&state.particles));
        }
    }
    Ok(())
}
