//! Checks the collision identities by sampling and prints the Lipschitz budget.

use kinetic_flows::cli::validate_kernels;
use kinetic_flows::kernels::BetaKind;
use kinetic_flows::{lipschitz_budget, Convention, ModelSpec};

fn main() -> kinetic_flows::Result<()> {
    let models = [
        ("boltzmann", ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2)),
        ("enskog", ModelSpec::enskog(0.5, 2.0, 0.2, 1.0).with_beta(BetaKind::Smoothstep)),
        (
            "boltzmann, literal convention",
            ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2).with_convention(Convention::PaperLiteral),
        ),
    ];
    for (name, model) in models {
        let report = validate_kernels(&model, 20_000, 3)?;
        println!("{name}: pass = {}", report.pass());
        for c in &report.checks {
            println!("  {:<28} {:?} worst {:.2e}", c.name, c.status, c.worst_deviation);
        }
        let budget = lipschitz_budget(&model);
        println!("  c_mu = {:.4}, L = {:.4}", budget.c_mu, budget.l_total);
    }
    Ok(())
}
