//! Particle approximations of Boltzmann-type jump flows.
//!
//! The crate simulates interacting particle systems whose jumps are driven by
//! a thinned Poisson noise and whose coefficients are read from the empirical
//! law, and measures how the resulting flows converge: in the time step, in
//! the number of particles, and in the weak form of the kinetic equation.
//!
//! ```
//! use kinetic_flows::{simulate, EmpiricalMeasure, ModelSpec, ParticleSystemState, PartitionSchedule};
//!
//! let model = ModelSpec::synthetic(0.5, 1.0);
//! let rho0 = EmpiricalMeasure::from_scalars(&[-1.0, 0.0, 1.0, 2.0]).unwrap();
//! let schedule = PartitionSchedule::new(0.0, 1.0, 10).unwrap();
//! let traj = simulate(&ParticleSystemState::new(rho0, 0.0), &schedule, &model, 7).unwrap();
//! assert_eq!(traj.states.len(), 11);
//! ```

pub mod cli;
pub mod error;
pub mod euler;
pub mod flow;
pub mod kernels;
pub mod measures;
pub mod numerics;
pub mod weakform;

pub use error::{Error, Result};
pub use euler::{
    one_step_theta, particle_step, simulate, simulate_with, DrivingNoise, ParticleSystemState,
    StepReport, Trajectory,
};
pub use flow::{PartitionSchedule, RateReport};
pub use kernels::{lipschitz_budget, AngularParams, Convention, LipschitzBudget, ModelSpec, Variant};
pub use measures::{w1, w1_1d, w1_assignment, EmpiricalMeasure, InitialLaw};
pub use weakform::{lambda_phi, moment_ode_oracle, weak_residual, TestFunction};
