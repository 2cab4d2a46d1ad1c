//! Time-homogeneity and time-Lipschitz behaviour of the synthetic flow.

use kinetic_flows::flow::{stationarity_check, time_lipschitz_check};
use kinetic_flows::{InitialLaw, ModelSpec};

fn main() -> kinetic_flows::Result<()> {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let rho0 = InitialLaw::standard_gaussian(1).sample(4000, 1)?;

    let s = stationarity_check(&model, &rho0, 3.7, 0.5, 10, 4000, 2, 2)?;
    println!("late start: {:.4} vs floor {:.4} (ratio {:.2})", s.distance, s.floor, s.ratio);

    let t = time_lipschitz_check(&model, &rho0, 0.5, &[0.2, 0.1, 0.05, 0.025], 4000, 3)?;
    for (h, e) in &t.rate.pairs {
        println!("h = {h:<6} W1 = {e:.5}  bound {:.5}", t.constant * h);
    }
    println!("slope {:.3}", t.rate.slope);
    Ok(())
}
