//! Exact W1 between two empirical measures, in 1D and in 3D.

use kinetic_flows::{w1_1d, w1_assignment, EmpiricalMeasure, InitialLaw};

fn main() -> kinetic_flows::Result<()> {
    let a = EmpiricalMeasure::from_scalars(&[0.0, 1.0, 3.0])?;
    let b = EmpiricalMeasure::from_scalars(&[2.0, 0.5, 1.0])?;
    println!("1d sorted:     {:.6}", w1_1d(&a, &b)?);
    println!("1d assignment: {:.6}", w1_assignment(&a, &b)?);

    let law = InitialLaw::standard_gaussian(3);
    let mu = law.sample(400, 1)?;
    let nu = law.sample(400, 2)?.translated(&[1.0, 0.0, 0.0])?;
    println!("3d, shift 1 along x: {:.4}", w1_assignment(&mu, &nu)?);
    Ok(())
}
