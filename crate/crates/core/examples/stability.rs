//! Stability envelope for two nearby initial laws and translation equivariance.

use kinetic_flows::flow::{stability_experiment, translation_equivariance};
use kinetic_flows::{InitialLaw, ModelSpec};

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let rho = InitialLaw::standard_gaussian(1).sample(2000, 1)?;
    for shift in [0.1, 0.5, 1.0] {
        let xi = rho.translated(&[shift])?;
        let r = stability_experiment(&model, &rho, &xi, 1.0, 20, 2000, 2)?;
        println!("shift {shift}: lhs {:.4} <= rhs {:.4} ({})", r.lhs, r.rhs, r.pass);
    }

    let maxwell = ModelSpec::boltzmann3d(0.0, 0.5, 1000.0, 0.2);
    let rho3 = InitialLaw::standard_gaussian(3).sample(2000, 3)?;
    let t = translation_equivariance(&maxwell, &rho3, &[0.5, 0.0, 0.0], 1.0, 10, 4)?;
    println!("translation: W1 {:.6} vs {:.6} +- {:.1e}", t.lhs, t.expected, t.sigma);
    Ok(())
}
