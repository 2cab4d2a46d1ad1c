//! Error of an observable in the number of particles, plus the chaos diagnostic.

use kinetic_flows::cli::{chaos_diagnostic, rate_particles, ParticleRateSpec};
use kinetic_flows::{InitialLaw, ModelSpec, TestFunction};

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let law = InitialLaw::standard_gaussian(1);
    let spec = ParticleRateSpec::new(vec![100, 400, 1600], TestFunction::tanh(0, 1.0));
    let outcome = rate_particles(&spec, &model, &law, 1.0, 20, 40, 5)?;
    for (n, e) in &outcome.rate.pairs {
        println!("N = {n:>5}  |<f> - ref| = {e:.5}");
    }
    println!("slope {:.3}, reference {:.5}", outcome.rate.slope, outcome.reference_value);

    let chaos = chaos_diagnostic(&model, &law, &[4, 16, 64], 1.0, 10, 200, 6)?;
    println!("chaos: {:?}, inversions {}, pass {}", chaos.pairs, chaos.inversions, chaos.pass);
    Ok(())
}
