//! Partition schedules and the experiments that probe the limiting flow:
//! refinement in the time step, stationarity, time continuity and stability.
//!
//! The exact flow is not accessible, so every experiment compares particle
//! runs with each other. Runs that share a driving-noise seed are coupled:
//! they see the same candidate events, which removes most of the Monte Carlo
//! spread from differences between them.

mod schedule;

pub use schedule::PartitionSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{particle_step_to, simulate_terminal, DrivingNoise, ParticleSystemState};
use crate::kernels::{h6b_constant, lipschitz_budget, ModelSpec};
use crate::measures::{moment, w1, EmpiricalMeasure, InitialLaw, DEFAULT_ASSIGNMENT_CAP};
use crate::numerics::{derive_seed, fit_line, mean, sample_variance};

const TAG_INIT: u64 = 0x1000_0000;
const TAG_NOISE: u64 = 0x2000_0000;
const TAG_FLOOR: u64 = 0x3000_0000;
const TAG_SHIFT: u64 = 0x4000_0000;

/// Errors against a resolution ladder with a least-squares fit on log-log axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl RateReport {
    /// Fits `log error = slope * log resolution + intercept`.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InvalidArgument("a rate fit needs at least two points".into()));
        }
        let increasing = pairs.windows(2).all(|w| w[0].0 < w[1].0);
        let decreasing = pairs.windows(2).all(|w| w[0].0 > w[1].0);
        if !(increasing || decreasing) {
            return Err(Error::InvalidArgument("resolutions must be strictly monotone".into()));
        }
        for &(r, e) in &pairs {
            if !(r > 0.0 && e > 0.0 && r.is_finite() && e.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "cannot fit on log axes: resolution {r}, error {e}"
                )));
            }
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
        let fit = fit_line(&xs, &ys);
        Ok(Self {
            pairs,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
        })
    }

    pub fn resolutions(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// Empirical W1 used by all experiments.
pub fn law_distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    w1(a, b, DEFAULT_ASSIGNMENT_CAP)
}

/// `rho0` itself when it already has `n_particles` points, otherwise a
/// resample of that size.
pub fn initial_configuration(
    rho0: &EmpiricalMeasure,
    n_particles: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    if rho0.len() == n_particles {
        return Ok(rho0.clone());
    }
    InitialLaw::Empirical {
        points: rho0.clone(),
    }
    .sample(n_particles, seed)
}

/// Terminal configuration of an `n`-step run over `[s, t]` from `init`.
pub fn terminal_run(
    model: &ModelSpec,
    init: &EmpiricalMeasure,
    s: f64,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let schedule = PartitionSchedule::new(s, t, n)?;
    let state = ParticleSystemState::new(init.clone(), s);
    Ok(simulate_terminal(&state, &schedule, model, &DrivingNoise::new(seed))?.particles)
}

fn check_replicas(replicas: usize, at_least: usize) -> Result<()> {
    if replicas < at_least {
        return Err(Error::InvalidArgument(format!(
            "need at least {at_least} replicas, got {replicas}"
        )));
    }
    Ok(())
}

fn check_ladder(name: &str, ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be positive and strictly increasing: {ladder:?}"
        )));
    }
    Ok(())
}

/// Replica-averaged `W1(terminal at n steps, terminal at n_reference steps)`
/// for each `n`; each replica drives every resolution with one noise seed.
#[allow(clippy::too_many_arguments)]
pub fn refinement_errors(
    model: &ModelSpec,
    rho0: &EmpiricalMeasure,
    t_end: f64,
    n_list: &[usize],
    n_reference: usize,
    n_particles: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_ladder("n_list", n_list)?;
    check_replicas(replicas, 1)?;
    let mut errors = vec![Vec::with_capacity(replicas); n_list.len()];
    for r in 0..replicas as u64 {
        let init = initial_configuration(rho0, n_particles, derive_seed(seed, TAG_INIT + r))?;
        let noise = derive_seed(seed, TAG_NOISE + r);
        let reference = terminal_run(model, &init, 0.0, t_end, n_reference, noise)?;
        for (k, &n) in n_list.iter().enumerate() {
            let run = terminal_run(model, &init, 0.0, t_end, n, noise)?;
            errors[k].push(law_distance(&run, &reference)?);
        }
    }
    Ok(errors.iter().map(|e| mean(e)).collect())
}

/// Time-step refinement rate against a reference run with `2 max(n_list)` steps.
pub fn refinement_rate(
    model: &ModelSpec,
    rho0: &EmpiricalMeasure,
    t_end: f64,
    n_list: &[usize],
    n_particles: usize,
    replicas: usize,
    seed: u64,
) -> Result<RateReport> {
    check_ladder("n_list", n_list)?;
    check_replicas(replicas, 2)?;
    let n_reference = 2 * n_list[n_list.len() - 1];
    let errors = refinement_errors(
        model,
        rho0,
        t_end,
        n_list,
        n_reference,
        n_particles,
        replicas,
        seed,
    )?;
    RateReport::from_pairs(n_list.iter().map(|&n| n as f64).zip(errors).collect())
}

/// W1 between the terminals of `[s1, s1 + dt]` and `[s2, s2 + dt]` runs from
/// the same initial configuration.
#[allow(clippy::too_many_arguments)]
pub fn shifted_run_distance(
    model: &ModelSpec,
    init: &EmpiricalMeasure,
    s1: f64,
    seed1: u64,
    s2: f64,
    seed2: u64,
    dt: f64,
    n: usize,
) -> Result<f64> {
    let a = terminal_run(model, init, s1, s1 + dt, n, seed1)?;
    let b = terminal_run(model, init, s2, s2 + dt, n, seed2)?;
    law_distance(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// Mean W1 between `[s, s + dt]` and `[0, dt]` runs.
    pub distance: f64,
    /// Mean W1 between two independent `[0, dt]` runs.
    pub floor: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Compares runs started at `s` with runs started at `0`; passes when the
/// distance is within `1.5` times the same-law floor.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_check(
    model: &ModelSpec,
    rho0: &EmpiricalMeasure,
    s: f64,
    dt: f64,
    n: usize,
    n_particles: usize,
    replicas: usize,
    seed: u64,
) -> Result<StationarityReport> {
    if !(s >= 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("need s >= 0 and dt > 0, got s = {s}, dt = {dt}")));
    }
    check_replicas(replicas, 1)?;
    let mut distance = Vec::with_capacity(replicas);
    let mut floor = Vec::with_capacity(replicas);
    for r in 0..replicas as u64 {
        let init = initial_configuration(rho0, n_particles, derive_seed(seed, TAG_INIT + r))?;
        let base = terminal_run(model, &init, 0.0, dt, n, derive_seed(seed, TAG_NOISE + r))?;
        let shifted = terminal_run(model, &init, s, s + dt, n, derive_seed(seed, TAG_SHIFT + r))?;
        let other = terminal_run(model, &init, 0.0, dt, n, derive_seed(seed, TAG_FLOOR + r))?;
        distance.push(law_distance(&shifted, &base)?);
        floor.push(law_distance(&other, &base)?);
    }
    let distance = mean(&distance);
    let floor = mean(&floor);
    let ratio = if floor > 0.0 { distance / floor } else { f64::INFINITY };
    Ok(StationarityReport {
        distance,
        floor,
        ratio,
        pass: distance <= 1.5 * floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// W1 between the terminals of the runs from `rho` and from `xi`.
    pub lhs: f64,
    /// `exp(l_total * T) * W1(rho, xi) + floor`; may be infinite.
    pub rhs: f64,
    /// `ln(rhs)`, finite even when `rhs` overflows.
    pub log_rhs: f64,
    pub floor: f64,
    pub initial_distance: f64,
    pub l_total: f64,
    pub pass: bool,
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Stability envelope: runs from `rho` and `xi` share the driving noise, and
/// the floor is the W1 between two runs from `rho` with independent noise.
#[allow(clippy::too_many_arguments)]
pub fn stability_experiment(
    model: &ModelSpec,
    rho: &EmpiricalMeasure,
    xi: &EmpiricalMeasure,
    t_end: f64,
    n: usize,
    n_particles: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if rho.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: xi.dim(),
        });
    }
    if rho.len() != xi.len() {
        return Err(Error::SizeMismatch {
            left: rho.len(),
            right: xi.len(),
        });
    }
    let init_seed = derive_seed(seed, TAG_INIT);
    let init_rho = initial_configuration(rho, n_particles, init_seed)?;
    let init_xi = initial_configuration(xi, n_particles, init_seed)?;
    let noise = derive_seed(seed, TAG_NOISE);
    let end_rho = terminal_run(model, &init_rho, 0.0, t_end, n, noise)?;
    let end_xi = terminal_run(model, &init_xi, 0.0, t_end, n, noise)?;
    let other = terminal_run(model, &init_rho, 0.0, t_end, n, derive_seed(seed, TAG_FLOOR))?;
    let lhs = law_distance(&end_rho, &end_xi)?;
    let floor = law_distance(&end_rho, &other)?;
    let initial_distance = law_distance(&init_rho, &init_xi)?;
    let l_total = lipschitz_budget(model).l_total;
    let rhs = (l_total * t_end).exp() * initial_distance + floor;
    let log_rhs = ln_add_exp(l_total * t_end + initial_distance.ln(), floor.ln());
    Ok(StabilityReport {
        lhs,
        rhs,
        log_rhs,
        floor,
        initial_distance,
        l_total,
        pass: lhs <= rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    pub lhs: f64,
    /// `|shift|`.
    pub expected: f64,
    /// Standard error of the mean particle displacement, floored at `1e-12`.
    pub sigma: f64,
    pub pass: bool,
}

/// Runs `rho` and `rho + shift` with common noise and compares the terminal
/// W1 with `|shift|`, within three standard errors.
pub fn translation_equivariance(
    model: &ModelSpec,
    rho: &EmpiricalMeasure,
    shift: &[f64],
    t_end: f64,
    n: usize,
    seed: u64,
) -> Result<TranslationReport> {
    let moved = rho.translated(shift)?;
    let noise = derive_seed(seed, TAG_NOISE);
    let a = terminal_run(model, rho, 0.0, t_end, n, noise)?;
    let b = terminal_run(model, &moved, 0.0, t_end, n, noise)?;
    let lhs = law_distance(&a, &b)?;
    let expected = shift.iter().map(|c| c * c).sum::<f64>().sqrt();
    let displacements: Vec<f64> = a
        .points()
        .zip(b.points())
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt())
        .collect();
    let sigma = if displacements.len() > 1 {
        (sample_variance(&displacements) / displacements.len() as f64).sqrt()
    } else {
        0.0
    }
    .max(1e-12);
    Ok(TranslationReport {
        lhs,
        expected,
        sigma,
        pass: (lhs - expected).abs() <= 3.0 * sigma,
    })
}

/// Number of steps used to reach `t` in the time-continuity experiment.
fn steps_to(t: f64, h_max: f64) -> usize {
    ((t / h_max).ceil() as usize).max(1)
}

/// W1 between the law at `t` and at `t + h`, sharing the noise up to `t`;
/// also returns the step-start configuration.
pub fn time_lipschitz_error(
    model: &ModelSpec,
    init: &EmpiricalMeasure,
    t: f64,
    n: usize,
    h: f64,
    seed: u64,
) -> Result<(f64, EmpiricalMeasure)> {
    let at_t = if t > 0.0 {
        terminal_run(model, init, 0.0, t, n, seed)?
    } else {
        init.clone()
    };
    let state = ParticleSystemState::new(at_t, t);
    let (next, _) = particle_step_to(&state, t + h, model, &DrivingNoise::new(seed))?;
    Ok((law_distance(&next.particles, &state.particles)?, state.particles))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLipschitzReport {
    pub rate: RateReport,
    /// Constant `C` of the one-step bound `E|X_{t, t+h} - X_t| <= C h`.
    pub constant: f64,
    pub first_moment: f64,
    /// `max_h error(h) / (C h)`.
    pub max_ratio: f64,
}

/// Time-continuity of the flow at `t` over the step sizes `h_list`.
pub fn time_lipschitz_check(
    model: &ModelSpec,
    rho0: &EmpiricalMeasure,
    t: f64,
    h_list: &[f64],
    n_particles: usize,
    seed: u64,
) -> Result<TimeLipschitzReport> {
    if h_list.is_empty()
        || h_list.iter().any(|h| !(*h > 0.0))
        || h_list.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::InvalidArgument(format!(
            "h_list must be positive and strictly decreasing: {h_list:?}"
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("t = {t} < 0")));
    }
    let init = initial_configuration(rho0, n_particles, derive_seed(seed, TAG_INIT))?;
    let noise = derive_seed(seed, TAG_NOISE);
    let n = steps_to(t, h_list[0]);
    let mut pairs = Vec::with_capacity(h_list.len());
    let mut start = None;
    for &h in h_list {
        let (e, at_t) = time_lipschitz_error(model, &init, t, n, h, noise)?;
        pairs.push((h, e));
        start.get_or_insert(at_t);
    }
    let first_moment = moment(&start.expect("h_list is non-empty"), 1.0)?;
    let constant = h6b_constant(&lipschitz_budget(model), first_moment);
    let max_ratio = pairs
        .iter()
        .map(|&(h, e)| e / (constant * h))
        .fold(0.0, f64::max);
    Ok(TimeLipschitzReport {
        rate: RateReport::from_pairs(pairs)?,
        constant,
        first_moment,
        max_ratio,
    })
}

/// Machine-readable experiment summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub model: ModelSpec,
    pub params: serde_json::Value,
    pub pairs: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub pass: bool,
    pub threshold: serde_json::Value,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, model: &ModelSpec, params: serde_json::Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            model: model.clone(),
            params,
            pairs: Vec::new(),
            slope: None,
            intercept: None,
            r_squared: None,
            pass: false,
            threshold: serde_json::Value::Null,
            details: serde_json::Map::new(),
        }
    }

    pub fn with_rate(mut self, rate: &RateReport) -> Self {
        self.pairs = rate.pairs.clone();
        self.slope = Some(rate.slope);
        self.intercept = Some(rate.intercept);
        self.r_squared = Some(rate.r_squared);
        self
    }

    pub fn detail<T: Serialize>(mut self, key: &str, value: T) -> Result<Self> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }
}
