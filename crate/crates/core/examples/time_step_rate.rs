//! Convergence of the scheme in the time step for the 3D Boltzmann kernel.

use kinetic_flows::flow::refinement_rate;
use kinetic_flows::{InitialLaw, ModelSpec};

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
    let rho0 = InitialLaw::standard_gaussian(3).sample(500, 1)?;
    let report = refinement_rate(&model, &rho0, 1.0, &[2, 4, 8, 16], 500, 4, 7)?;
    for (n, e) in &report.pairs {
        println!("n = {n:>3}  W1 = {e:.5}");
    }
    println!("slope {:.3} (r^2 {:.3})", report.slope, report.r_squared);
    Ok(())
}
