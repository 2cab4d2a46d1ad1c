use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{law_distance, terminal_run, RateReport};
use crate::kernels::{lipschitz_budget, ModelSpec};
use crate::measures::{EmpiricalMeasure, InitialLaw};
use crate::numerics::{derive_seed, mean, pairwise_sum};
use crate::weakform::TestFunction;

const TAG_REFERENCE: u64 = 0x5000_0000;
const TAG_LADDER: u64 = 0x6000_0000;
const TAG_CHAOS: u64 = 0x7000_0000;

/// Particle-count ladder and the observable tracked along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRateSpec {
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "reference_N")]
    pub reference_n: usize,
    pub f: TestFunction,
    /// Independent reference runs averaged into the reference estimate.
    #[serde(default = "default_reference_runs")]
    pub reference_runs: usize,
}

fn default_reference_runs() -> usize {
    4
}

impl ParticleRateSpec {
    pub fn new(n_list: Vec<usize>, f: TestFunction) -> Self {
        let reference_n = 4 * n_list.iter().copied().max().unwrap_or(1);
        Self {
            n_list,
            reference_n,
            f,
            reference_runs: default_reference_runs(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_list.is_empty()
            || self.n_list[0] == 0
            || self.n_list.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config {
                field: "N_list".into(),
                message: format!("must be positive and strictly increasing: {:?}", self.n_list),
            });
        }
        let max = self.n_list[self.n_list.len() - 1];
        if self.reference_n < 4 * max {
            return Err(Error::Config {
                field: "reference_N".into(),
                message: format!("{} < 4 * max(N_list) = {}", self.reference_n, 4 * max),
            });
        }
        if self.reference_runs == 0 {
            return Err(Error::Config {
                field: "reference_runs".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.f.gradient_bound(dim) > 1.0 {
            return Err(Error::Config {
                field: "f".into(),
                message: format!("observable must be 1-Lipschitz, bound is {}", self.f.gradient_bound(dim)),
            });
        }
        self.f.validate(dim).map_err(|e| Error::Config {
            field: "f".into(),
            message: e.to_string(),
        })
    }
}

/// Outcome of the particle-count experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRateOutcome {
    pub rate: RateReport,
    pub reference_value: f64,
    /// Budget estimate of the time-discretization error `C / n`, compared
    /// with the smallest `N^-1/2` of the ladder.
    pub discretization_bound: f64,
    pub discretization_warning: bool,
}

fn observable_mean(f: &TestFunction, m: &EmpiricalMeasure) -> f64 {
    let v: Vec<f64> = m.points().map(|x| f.eval(x)).collect();
    pairwise_sum(&v) / m.len() as f64
}

/// `|mean of f over N particles at T - reference|`, averaged over replicas.
/// Every run uses the same `n`, so the time-step bias is common to all of them.
#[allow(clippy::too_many_arguments)]
pub fn rate_particles(
    spec: &ParticleRateSpec,
    model: &ModelSpec,
    law: &InitialLaw,
    t_end: f64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<ParticleRateOutcome> {
    spec.validate(model.dim)?;
    if replicas < 2 {
        return Err(Error::Config {
            field: "replicas".into(),
            message: format!("need at least 2, got {replicas}"),
        });
    }
    let mut reference = Vec::with_capacity(spec.reference_runs);
    for r in 0..spec.reference_runs as u64 {
        let s = derive_seed(seed, TAG_REFERENCE + r);
        let init = law.sample(spec.reference_n, s)?;
        let end = terminal_run(model, &init, 0.0, t_end, n, derive_seed(s, 1))?;
        reference.push(observable_mean(&spec.f, &end));
    }
    let reference_value = mean(&reference);
    let mut pairs = Vec::with_capacity(spec.n_list.len());
    for (k, &np) in spec.n_list.iter().enumerate() {
        let mut errs = Vec::with_capacity(replicas);
        for r in 0..replicas as u64 {
            let s = derive_seed(seed, TAG_LADDER + ((k as u64) << 20) + r);
            let init = law.sample(np, s)?;
            let end = terminal_run(model, &init, 0.0, t_end, n, derive_seed(s, 1))?;
            errs.push((observable_mean(&spec.f, &end) - reference_value).abs());
        }
        pairs.push((np as f64, mean(&errs)));
    }
    let budget = lipschitz_budget(model);
    let discretization_bound = budget.l_total * t_end * t_end / n as f64;
    let smallest = (spec.n_list[spec.n_list.len() - 1] as f64).powf(-0.5);
    Ok(ParticleRateOutcome {
        rate: RateReport::from_pairs(pairs)?,
        reference_value,
        discretization_bound,
        discretization_warning: discretization_bound >= smallest,
    })
}

/// Slope interval accepted for a `dim`-dimensional model.
pub fn particle_slope_range(dim: usize) -> (f64, f64) {
    if dim == 1 {
        (-0.65, -0.35)
    } else {
        (-0.55, -0.15)
    }
}

/// Two-particle chaos diagnostic along a small-`N` ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosDiagnostic {
    /// `(N, W1(law of (X1, X2), reference product law))`.
    pub pairs: Vec<(f64, f64)>,
    /// W1 between two independent product samples of the same size.
    pub floor: f64,
    pub inversions: usize,
    pub pass: bool,
}

/// `true` when `values` decrease overall with at most one local inversion.
pub fn shrinking_trend(values: &[f64]) -> (usize, bool) {
    let inversions = values.windows(2).filter(|w| w[1] >= w[0]).count();
    let ok = values.len() < 2 || (inversions <= 1 && values[values.len() - 1] < values[0]);
    (inversions, ok)
}

fn concat_pair(a: &[f64], b: &[f64], out: &mut Vec<f64>) {
    out.extend_from_slice(a);
    out.extend_from_slice(b);
}

/// Product sample: `samples` pairs with coordinates from two independent
/// reference-size runs.
fn product_sample(
    model: &ModelSpec,
    law: &InitialLaw,
    t_end: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let size = samples.max(2);
    let mut runs = Vec::with_capacity(2);
    for r in 0..2 {
        let s = derive_seed(seed, r);
        let init = law.sample(size, s)?;
        runs.push(terminal_run(model, &init, 0.0, t_end, n, derive_seed(s, 1))?);
    }
    let mut coords = Vec::with_capacity(samples * 2 * model.dim);
    for k in 0..samples {
        concat_pair(runs[0].point(k), runs[1].point(k), &mut coords);
    }
    EmpiricalMeasure::new(2 * model.dim, coords)
}

/// Pair sample of an `n_particles` system: disjoint pairs `(X_{2k}, X_{2k+1})`
/// of independent runs, which share the law of `(X1, X2)` by exchangeability.
fn pair_sample(
    model: &ModelSpec,
    law: &InitialLaw,
    n_particles: usize,
    t_end: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let per_run = n_particles / 2;
    let mut coords = Vec::with_capacity(samples * 2 * model.dim);
    let mut run = 0u64;
    let mut taken = 0;
    while taken < samples {
        let s = derive_seed(seed, run);
        let init = law.sample(n_particles, s)?;
        let end = terminal_run(model, &init, 0.0, t_end, n, derive_seed(s, 1))?;
        for k in 0..per_run.min(samples - taken) {
            concat_pair(end.point(2 * k), end.point(2 * k + 1), &mut coords);
            taken += 1;
        }
        run += 1;
    }
    EmpiricalMeasure::new(2 * model.dim, coords)
}

#[allow(clippy::too_many_arguments)]
pub fn chaos_diagnostic(
    model: &ModelSpec,
    law: &InitialLaw,
    ladder: &[usize],
    t_end: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ChaosDiagnostic> {
    if ladder.is_empty() || ladder[0] < 2 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config {
            field: "chaos_N_list".into(),
            message: format!("must start at 2 or more and increase strictly: {ladder:?}"),
        });
    }
    let reference = product_sample(model, law, t_end, n, samples, derive_seed(seed, TAG_CHAOS))?;
    let other = product_sample(model, law, t_end, n, samples, derive_seed(seed, TAG_CHAOS + 1))?;
    let floor = law_distance(&reference, &other)?;
    let mut pairs = Vec::with_capacity(ladder.len());
    for (k, &np) in ladder.iter().enumerate() {
        let sample = pair_sample(
            model,
            law,
            np,
            t_end,
            n,
            samples,
            derive_seed(seed, TAG_CHAOS + 16 + k as u64),
        )?;
        pairs.push((np as f64, law_distance(&sample, &reference)?));
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (inversions, pass) = shrinking_trend(&values);
    Ok(ChaosDiagnostic {
        pairs,
        floor,
        inversions,
        pass,
    })
}
