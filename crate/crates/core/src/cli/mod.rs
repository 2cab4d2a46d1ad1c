//! Batch experiment runner.
//!
//! A run reads one JSON [`ExperimentConfig`], executes the named experiment
//! and writes `report.json`, `series.csv` and `manifest.json` into the output
//! directory. Exit codes: `0` pass, `2` threshold failure, `1` usage or
//! configuration error.

mod kernel_check;
mod particles;

pub use kernel_check::{validate_kernels, CheckStatus, IdentityCheck, KernelReport, IDENTITY_TOLERANCE};
pub use particles::{
    chaos_diagnostic, particle_slope_range, rate_particles, shrinking_trend, ChaosDiagnostic,
    ParticleRateOutcome, ParticleRateSpec,
};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::euler::{particle_step_to, simulate, DrivingNoise, ParticleSystemState};
use crate::flow::{
    refinement_rate, stability_experiment, translation_equivariance, ExperimentReport,
    PartitionSchedule,
};
use crate::kernels::{ModelSpec, Variant};
use crate::measures::{EmpiricalMeasure, InitialLaw};
use crate::numerics::{bootstrap_sd, derive_seed, mean, sample_variance};
use crate::weakform::{moment_ode_oracle, weak_residual_series, TestFunction, DEFAULT_RESIDUAL_N_QUAD};

/// Largest particle count accepted in a configuration.
pub const MAX_PARTICLES: usize = 1_000_000;

const BOOTSTRAP_RESAMPLES: usize = 500;
const TAG_INIT: u64 = 0xA000_0000;
const TAG_BOOT: u64 = 0xB000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    RateTime,
    RateParticles,
    WeakResidual,
    Conserve,
    Stability,
    ValidateKernels,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::RateTime => "rate-time",
            Command::RateParticles => "rate-particles",
            Command::WeakResidual => "weak-residual",
            Command::Conserve => "conserve",
            Command::Stability => "stability",
            Command::ValidateKernels => "validate-kernels",
        }
    }
}

/// Experiment description; optional fields are required only by the
/// commands that use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub seed: u64,
    /// Law of the initial particles; standard Gaussian when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialLaw>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(rename = "N_list", default, skip_serializing_if = "Option::is_none")]
    pub particle_list: Option<Vec<usize>>,
    #[serde(rename = "reference_N", default, skip_serializing_if = "Option::is_none")]
    pub reference_particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_runs: Option<usize>,
    /// Observable of `rate-particles`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<TestFunction>,
    #[serde(rename = "chaos_N_list", default, skip_serializing_if = "Option::is_none")]
    pub chaos_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chaos_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_set: Option<Vec<TestFunction>>,
    /// `(N, n)` refinement ladder of `weak-residual`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_quad: Option<usize>,
    /// Translation applied to the initial data by `stability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    /// Also run the translation-equivariance check in `stability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivariance: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<(f64, f64)>,
    /// Write every snapshot of `simulate` as CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_snapshots: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn required<T: Clone>(value: &Option<T>, field: &str, command: Command) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| config_error(field, format!("required by `{}`", command.name())))
}

fn check_increasing(field: &str, ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_error(field, format!("must be positive and strictly increasing: {ladder:?}")));
    }
    Ok(())
}

fn check_particles(field: &str, n: usize) -> Result<()> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(config_error(field, format!("{n} outside 1..={MAX_PARTICLES}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Minimal configuration; every other field is absent.
    pub fn new(command: Command, model: ModelSpec, seed: u64) -> Self {
        Self {
            command,
            model,
            seed,
            initial: None,
            particles: None,
            n: None,
            horizon: None,
            replicas: None,
            n_list: None,
            particle_list: None,
            reference_particles: None,
            reference_runs: None,
            observable: None,
            chaos_list: None,
            chaos_samples: None,
            phi_set: None,
            ladder: None,
            n_quad: None,
            shift: None,
            equivariance: None,
            samples: None,
            slope_range: None,
            export_snapshots: None,
            output_dir: None,
        }
    }

    /// Parses JSON; syntax and schema errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| {
            config_error(&format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|e| config_error("model", e.to_string()))?;
        if let Some(law) = &self.initial {
            if law.dim() != self.model.dim {
                return Err(config_error(
                    "initial",
                    format!("dimension {} differs from the model's {}", law.dim(), self.model.dim),
                ));
            }
        }
        if let Some(n) = self.particles {
            check_particles("N", n)?;
        }
        if self.n == Some(0) {
            return Err(config_error("n", "must be at least 1"));
        }
        if let Some(t) = self.horizon {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_error("T", format!("must be finite and >= 0, got {t}")));
            }
        }
        if let Some(list) = &self.n_list {
            check_increasing("n_list", list)?;
        }
        if let Some(list) = &self.particle_list {
            check_increasing("N_list", list)?;
            check_particles("N_list", list[list.len() - 1])?;
            if let Some(reference) = self.reference_particles {
                check_particles("reference_N", reference)?;
                if reference < 4 * list[list.len() - 1] {
                    return Err(config_error("reference_N", "must be at least 4 * max(N_list)"));
                }
            }
        }
        if let Some(list) = &self.chaos_list {
            check_increasing("chaos_N_list", list)?;
        }
        if let Some(ladder) = &self.ladder {
            let ns: Vec<usize> = ladder.iter().map(|p| p.0).collect();
            let steps: Vec<usize> = ladder.iter().map(|p| p.1).collect();
            check_increasing("ladder", &ns)?;
            check_increasing("ladder", &steps)?;
        }
        if let Some(phis) = &self.phi_set {
            for f in phis {
                f.validate(self.model.dim)
                    .map_err(|e| config_error("phi_set", e.to_string()))?;
            }
        }
        if let Some(shift) = &self.shift {
            if shift.len() != self.model.dim {
                return Err(config_error("shift", format!("needs {} components", self.model.dim)));
            }
        }
        if let Some((lo, hi)) = self.slope_range {
            if !(lo < hi) {
                return Err(config_error("slope_range", "lower end must be below upper end"));
            }
        }
        Ok(())
    }

    fn law(&self) -> InitialLaw {
        self.initial
            .clone()
            .unwrap_or_else(|| InitialLaw::standard_gaussian(self.model.dim))
    }

    fn initial_sample(&self, n: usize) -> Result<EmpiricalMeasure> {
        self.law().sample(n, derive_seed(self.seed, TAG_INIT))
    }

    fn params(&self) -> Result<serde_json::Value> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("model");
            map.remove("command");
            map.remove("output_dir");
        }
        Ok(value)
    }
}

/// Report plus the plot-ready series written next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub series_header: (&'static str, &'static str),
    pub series: Vec<(f64, f64)>,
}

impl RunOutput {
    fn rate(report: ExperimentReport) -> Self {
        let series = report.pairs.clone();
        Self {
            report,
            series_header: ("resolution", "error"),
            series,
        }
    }

    /// Names of the failed criteria, empty on success.
    pub fn failures(&self) -> Vec<String> {
        if self.report.pass {
            return Vec::new();
        }
        match self.report.details.get("failed") {
            Some(serde_json::Value::Array(names)) => {
                names.iter().filter_map(|n| n.as_str().map(String::from)).collect()
            }
            _ => vec![self.report.experiment.clone()],
        }
    }
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn slope_threshold(range: (f64, f64)) -> serde_json::Value {
    json!({ "slope_min": range.0, "slope_max": range.1 })
}

fn run_simulate(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    let cmd = config.command;
    let n_particles = required(&config.particles, "N", cmd)?;
    let n = required(&config.n, "n", cmd)?;
    let t_end = required(&config.horizon, "T", cmd)?;
    let model = &config.model;
    let init = config.initial_sample(n_particles)?;
    let schedule = PartitionSchedule::new(0.0, t_end, n)?;
    let traj = simulate(&ParticleSystemState::new(init.clone(), 0.0), &schedule, model, config.seed)?;
    if let (Some(dir), Some(true)) = (out_dir, config.export_snapshots) {
        traj.export(&dir.join("trajectory"), config.seed, model, &schedule)?;
    }
    let series: Vec<(f64, f64)> = traj
        .states
        .iter()
        .map(|s| (s.clock, sample_variance(&s.particles.coordinate(0))))
        .collect();
    let terminal = &traj.terminal().particles;
    let terminal_x1 = terminal.coordinate(0);
    let terminal_variance = sample_variance(&terminal_x1);
    let mut report = ExperimentReport::new("simulate", model, config.params()?)
        .detail("trajectory_length", traj.states.len())?
        .detail("terminal_equals_initial", *terminal == init)?
        .detail("terminal_variance", terminal_variance)?
        .detail("acceptance_rates", traj.reports.iter().map(|r| r.acceptance_rate).collect::<Vec<_>>())?;
    report.pass = true;
    if model.variant == Variant::Synthetic1D && model.drift.is_none() {
        let var0 = match config.law() {
            InitialLaw::Gaussian { std, .. } => std * std,
            InitialLaw::Empirical { .. } => sample_variance(&init.coordinate(0)),
        };
        let (_, oracle) = moment_ode_oracle(model.kappa, model.g, 0.0, var0, t_end);
        let sigma = bootstrap_sd(
            &terminal_x1,
            sample_variance,
            BOOTSTRAP_RESAMPLES,
            derive_seed(config.seed, TAG_BOOT),
        );
        report.pass = (terminal_variance - oracle).abs() <= 4.0 * sigma;
        report.threshold = json!({ "max_sigma": 4.0 });
        report = report
            .detail("oracle_variance", oracle)?
            .detail("bootstrap_sigma", sigma)?;
        if !report.pass {
            report = report.detail("failed", ["variance_oracle"])?;
        }
    }
    Ok(RunOutput {
        report,
        series_header: ("time", "value"),
        series,
    })
}

fn run_rate_time(config: &ExperimentConfig) -> Result<RunOutput> {
    let cmd = config.command;
    let n_particles = required(&config.particles, "N", cmd)?;
    let n_list = required(&config.n_list, "n_list", cmd)?;
    let t_end = required(&config.horizon, "T", cmd)?;
    let replicas = required(&config.replicas, "replicas", cmd)?;
    let model = &config.model;
    let range = config.slope_range.unwrap_or(if model.variant == Variant::Synthetic1D {
        (-1.35, -0.65)
    } else {
        (-1.4, -0.6)
    });
    let rho0 = config.initial_sample(n_particles)?;
    let rate = refinement_rate(model, &rho0, t_end, &n_list, n_particles, replicas, config.seed)?;
    let mut report = ExperimentReport::new("rate-time", model, config.params()?).with_rate(&rate);
    report.pass = in_range(rate.slope, range);
    report.threshold = slope_threshold(range);
    report = report.detail("reference_n", 2 * n_list[n_list.len() - 1])?;
    if !report.pass {
        report = report.detail("failed", ["time_step_slope"])?;
    }
    Ok(RunOutput::rate(report))
}

fn run_rate_particles(config: &ExperimentConfig) -> Result<RunOutput> {
    let cmd = config.command;
    let model = &config.model;
    let n_list = required(&config.particle_list, "N_list", cmd)?;
    let n = required(&config.n, "n", cmd)?;
    let t_end = required(&config.horizon, "T", cmd)?;
    let replicas = required(&config.replicas, "replicas", cmd)?;
    let f = config.observable.clone().unwrap_or(TestFunction::tanh(0, 1.0));
    let mut spec = ParticleRateSpec::new(n_list, f);
    if let Some(r) = config.reference_particles {
        spec.reference_n = r;
    }
    if let Some(r) = config.reference_runs {
        spec.reference_runs = r;
    }
    let law = config.law();
    let outcome = rate_particles(&spec, model, &law, t_end, n, replicas, config.seed)?;
    let chaos_list = config.chaos_list.clone().unwrap_or_else(|| vec![2, 4, 8, 16]);
    let samples = config.chaos_samples.unwrap_or(1024);
    let chaos = chaos_diagnostic(
        model,
        &law,
        &chaos_list,
        t_end,
        n,
        samples,
        derive_seed(config.seed, 0xC4A05),
    )?;
    let range = config.slope_range.unwrap_or(particle_slope_range(model.dim));
    let slope_ok = in_range(outcome.rate.slope, range);
    let mut report = ExperimentReport::new("rate-particles", model, config.params()?).with_rate(&outcome.rate);
    report.pass = slope_ok && chaos.pass;
    report.threshold = slope_threshold(range);
    let mut failed = Vec::new();
    if !slope_ok {
        failed.push("particle_slope");
    }
    if !chaos.pass {
        failed.push("chaos_trend");
    }
    report = report
        .detail("reference_N", spec.reference_n)?
        .detail("reference_value", outcome.reference_value)?
        .detail("discretization_bound", outcome.discretization_bound)?
        .detail("discretization_warning", outcome.discretization_warning)?
        .detail("chaos", &chaos)?;
    if !failed.is_empty() {
        report = report.detail("failed", failed)?;
    }
    Ok(RunOutput::rate(report))
}

fn residual_budget(n_particles: usize, n: usize) -> f64 {
    5.0 * ((n_particles as f64).powf(-0.5) + 1.0 / n as f64)
}

fn default_phi_set(model: &ModelSpec) -> Vec<TestFunction> {
    let k = if model.variant.is_phase_space() { 3 } else { 0 };
    vec![TestFunction::tanh(k, 0.5), TestFunction::tanh(k, 1.0)]
}

fn residual_run(
    config: &ExperimentConfig,
    phis: &[TestFunction],
    n_particles: usize,
    n: usize,
    t_end: f64,
    seed: u64,
) -> Result<crate::weakform::ResidualSeries> {
    let init = config
        .law()
        .sample(n_particles, derive_seed(seed, TAG_INIT))?;
    let schedule = PartitionSchedule::new(0.0, t_end, n)?;
    let traj = simulate(&ParticleSystemState::new(init, 0.0), &schedule, &config.model, seed)?;
    let n_quad = config.n_quad.unwrap_or(DEFAULT_RESIDUAL_N_QUAD);
    weak_residual_series(&traj.measures(), &config.model, phis, n_quad)
}

fn run_weak_residual(config: &ExperimentConfig) -> Result<RunOutput> {
    let cmd = config.command;
    let model = &config.model;
    let t_end = required(&config.horizon, "T", cmd)?;
    let phis = config.phi_set.clone().unwrap_or_else(|| default_phi_set(model));
    let mut report = ExperimentReport::new("weak-residual", model, config.params()?)
        .detail("phi", phis.iter().map(|f| f.label()).collect::<Vec<_>>())?;
    if let Some(ladder) = &config.ladder {
        let replicas = config.replicas.unwrap_or(1).max(1);
        let mut pairs = Vec::with_capacity(ladder.len());
        let mut budgets = Vec::with_capacity(ladder.len());
        for (k, &(np, n)) in ladder.iter().enumerate() {
            let mut values = Vec::with_capacity(replicas);
            for r in 0..replicas as u64 {
                let seed = derive_seed(config.seed, ((k as u64) << 16) + r);
                values.push(residual_run(config, &phis, np, n, t_end, seed)?.max_residual);
            }
            pairs.push((np as f64, mean(&values)));
            budgets.push(residual_budget(np, n));
        }
        let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (inversions, pass) = shrinking_trend(&values);
        report.pairs = pairs;
        report.pass = pass;
        report.threshold = json!({ "trend": "decreasing", "max_inversions": 1 });
        report = report
            .detail("ladder", ladder)?
            .detail("budget", budgets)?
            .detail("inversions", inversions)?;
        if !pass {
            report = report.detail("failed", ["residual_trend"])?;
        }
        return Ok(RunOutput::rate(report));
    }
    let n_particles = required(&config.particles, "N", cmd)?;
    let n = required(&config.n, "n", cmd)?;
    let res = residual_run(config, &phis, n_particles, n, t_end, config.seed)?;
    let budget = residual_budget(n_particles, n);
    report.pass = res.max_residual <= budget;
    report.threshold = json!({ "max_residual": budget });
    let series: Vec<(f64, f64)> = res
        .times
        .iter()
        .enumerate()
        .map(|(m, &t)| (t, res.series.iter().map(|s| s[m].abs()).fold(0.0, f64::max)))
        .collect();
    report = report
        .detail("times", &res.times)?
        .detail("residual_series", &res.series)?
        .detail("max_residual", res.max_residual)?
        .detail("budget", budget)?;
    if !report.pass {
        report = report.detail("failed", ["residual_budget"])?;
    }
    Ok(RunOutput {
        report,
        series_header: ("time", "value"),
        series,
    })
}

fn run_conserve(config: &ExperimentConfig) -> Result<RunOutput> {
    let cmd = config.command;
    let model = &config.model;
    if model.variant != Variant::Boltzmann3D {
        return Err(config_error("model", "`conserve` needs a Boltzmann3D model"));
    }
    let n_particles = required(&config.particles, "N", cmd)?;
    let n = required(&config.n, "n", cmd)?;
    let t_end = required(&config.horizon, "T", cmd)?;
    let init = config.initial_sample(n_particles)?;
    let schedule = PartitionSchedule::new(0.0, t_end, n)?;
    let energy = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>();
    let mean_energy = |m: &EmpiricalMeasure| mean(&m.points().map(energy).collect::<Vec<_>>());
    let noise = DrivingNoise::new(config.seed);
    let mut state = ParticleSystemState::new(init.clone(), 0.0);
    let mut series = vec![(0.0, mean_energy(&init))];
    for k in 1..=n {
        state = particle_step_to(&state, schedule.node(k), model, &noise)?.0;
        series.push((state.clock, mean_energy(&state.particles)));
    }
    let end = &state.particles;
    let boot_seed = derive_seed(config.seed, TAG_BOOT);
    let mut quantities = Vec::new();
    for k in 0..3 {
        let d: Vec<f64> = end.points().zip(init.points()).map(|(a, b)| a[k] - b[k]).collect();
        quantities.push((format!("momentum_{}", k + 1), d));
    }
    let de: Vec<f64> = end
        .points()
        .zip(init.points())
        .map(|(a, b)| energy(a) - energy(b))
        .collect();
    quantities.push(("energy".to_string(), de));
    let mut failed = Vec::new();
    let mut checks = serde_json::Map::new();
    for (k, (name, d)) in quantities.iter().enumerate() {
        let change = mean(d);
        let sigma = bootstrap_sd(d, mean, BOOTSTRAP_RESAMPLES, derive_seed(boot_seed, k as u64));
        let ok = change.abs() <= 5.0 * sigma;
        if !ok {
            failed.push(name.clone());
        }
        checks.insert(name.clone(), json!({ "change": change, "sigma": sigma, "pass": ok }));
    }
    let mut report = ExperimentReport::new("conserve", model, config.params()?);
    report.pass = failed.is_empty();
    report.threshold = json!({ "max_sigma": 5.0 });
    report = report
        .detail("initial_mean", init.mean())?
        .detail("terminal_mean", end.mean())?
        .detail("checks", checks)?;
    if !failed.is_empty() {
        report = report.detail("failed", failed)?;
    }
    Ok(RunOutput {
        report,
        series_header: ("time", "value"),
        series,
    })
}

fn run_stability(config: &ExperimentConfig) -> Result<RunOutput> {
    let cmd = config.command;
    let model = &config.model;
    let n_particles = required(&config.particles, "N", cmd)?;
    let n = required(&config.n, "n", cmd)?;
    let t_end = required(&config.horizon, "T", cmd)?;
    let shift = config.shift.clone().unwrap_or_else(|| {
        let mut s = vec![0.0; model.dim];
        s[if model.variant.is_phase_space() { 3 } else { 0 }] = 0.5;
        s
    });
    let rho = config.initial_sample(n_particles)?;
    let xi = rho.translated(&shift)?;
    let stab = stability_experiment(model, &rho, &xi, t_end, n, n_particles, config.seed)?;
    let mut report = ExperimentReport::new("stability", model, config.params()?);
    report.pairs = vec![(0.0, stab.initial_distance), (t_end, stab.lhs)];
    report.threshold = json!({ "rhs": stab.rhs, "log_rhs": stab.log_rhs });
    report = report.detail("stability", stab)?;
    let mut failed = Vec::new();
    if !stab.pass {
        failed.push("stability_envelope");
    }
    if config.equivariance.unwrap_or(false) {
        let tr = translation_equivariance(model, &rho, &shift, t_end, n, config.seed)?;
        if !tr.pass {
            failed.push("translation_equivariance");
        }
        report = report.detail("translation", tr)?;
    }
    report.pass = failed.is_empty();
    if !failed.is_empty() {
        report = report.detail("failed", failed)?;
    }
    let series = vec![(0.0, stab.initial_distance), (t_end, stab.lhs)];
    Ok(RunOutput {
        report,
        series_header: ("time", "value"),
        series,
    })
}

fn run_validate_kernels(config: &ExperimentConfig) -> Result<RunOutput> {
    let model = &config.model;
    let samples = config.samples.unwrap_or(100_000);
    let kr = validate_kernels(model, samples, config.seed)?;
    let mut report = ExperimentReport::new("validate-kernels", model, config.params()?);
    report.pass = kr.pass();
    report.threshold = json!({ "max_deviation": IDENTITY_TOLERANCE });
    let failing: Vec<String> = kr.failing().iter().map(|s| s.to_string()).collect();
    let series = kr
        .checks
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64, c.worst_deviation))
        .collect();
    report = report.detail("checks", &kr.checks)?;
    if !failing.is_empty() {
        report = report.detail("failed", failing)?;
    }
    Ok(RunOutput {
        report,
        series_header: ("check", "worst_deviation"),
        series,
    })
}

/// Executes the experiment without writing anything; `out_dir` is only used
/// for optional snapshot export.
pub fn run_experiment(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    config.validate()?;
    match config.command {
        Command::Simulate => run_simulate(config, out_dir),
        Command::RateTime => run_rate_time(config),
        Command::RateParticles => run_rate_particles(config),
        Command::WeakResidual => run_weak_residual(config),
        Command::Conserve => run_conserve(config),
        Command::Stability => run_stability(config),
        Command::ValidateKernels => run_validate_kernels(config),
    }
}

fn write_series(path: &Path, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([header.0, header.1])?;
    for (a, b) in rows {
        w.write_record([format!("{a:.16e}"), format!("{b:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the experiment and writes `report.json`, `series.csv` and
/// `manifest.json` into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput> {
    let output = run_experiment(config, Some(out_dir))?;
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&output.report)? + "\n",
    )?;
    write_series(&out_dir.join("series.csv"), output.series_header, &output.series)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "command": config.command.name(),
        "seed": config.seed,
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp,
        "files": ["report.json", "series.csv"],
        "config": config,
    });
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(output)
}

/// Command-line arguments of the `kinetic-flows` binary.
#[derive(Debug, Parser)]
#[command(name = "kinetic-flows", version, about = "Particle experiments for Boltzmann-type jump flows")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the configuration output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code of a finished run: `0` pass, `2` threshold failure, `1` error.
pub fn exit_code(result: &Result<RunOutput>) -> i32 {
    match result {
        Ok(out) if out.report.pass => 0,
        Ok(_) | Err(Error::ThresholdFailure(_)) => 2,
        Err(_) => 1,
    }
}

fn run_args(args: &Args) -> Result<RunOutput> {
    let mut config = ExperimentConfig::load(&args.config)?;
    config.command = args.command;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = Some(out.clone());
    }
    let out_dir = config
        .output_dir
        .clone()
        .ok_or_else(|| config_error("output_dir", "set it in the config or pass --out"))?;
    match args.threads {
        Some(0) => Err(config_error("--threads", "must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| config_error("--threads", e.to_string()))?
            .install(|| run(&config, &out_dir)),
        None => run(&config, &out_dir),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = run_args(&args);
    match &result {
        Ok(out) if out.report.pass => println!("{}: pass", out.report.experiment),
        Ok(out) => eprintln!(
            "{}: threshold failure: {}",
            out.report.experiment,
            out.failures().join(", ")
        ),
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
