//! Residual of the weak kinetic equation along a simulated trajectory.

use kinetic_flows::weakform::weak_residual_series;
use kinetic_flows::{lambda_phi, simulate, InitialLaw, ModelSpec, ParticleSystemState, PartitionSchedule, TestFunction};

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
    let phi = TestFunction::tanh(0, 1.0);
    let v = [1.0, -0.5, 0.3];
    let x = [0.0, 0.2, -0.1];
    println!("lambda_phi(v, x) = {:.6}", lambda_phi(&model, &phi, &v, &x, None, 16)?);

    let phis = [phi, TestFunction::ProductTanh { lambda: 0.5 }];
    for (n_particles, n) in [(50, 4), (200, 8)] {
        let rho0 = InitialLaw::standard_gaussian(3).sample(n_particles, 1)?;
        let schedule = PartitionSchedule::new(0.0, 0.5, n)?;
        let traj = simulate(&ParticleSystemState::new(rho0, 0.0), &schedule, &model, 2)?;
        let res = weak_residual_series(&traj.measures(), &model, &phis, 16)?;
        println!("N = {n_particles:>4}, n = {n:>2}: max residual {:.4}", res.max_residual);
    }
    Ok(())
}
