use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{sample_index, EmpiricalMeasure};
use crate::error::{Error, Result};

/// A law that initial particle configurations are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialLaw {
    /// Independent coordinates `mean_k + std * N(0, 1)`.
    Gaussian { mean: Vec<f64>, std: f64 },
    /// Resampling with replacement from a fixed empirical measure.
    Empirical { points: EmpiricalMeasure },
}

impl InitialLaw {
    pub fn standard_gaussian(dim: usize) -> Self {
        InitialLaw::Gaussian {
            mean: vec![0.0; dim],
            std: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialLaw::Gaussian { mean, .. } => mean.len(),
            InitialLaw::Empirical { points } => points.dim(),
        }
    }

    /// `n` i.i.d. points from the law, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<EmpiricalMeasure> {
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            InitialLaw::Gaussian { mean, std } => {
                if !(*std >= 0.0 && std.is_finite()) {
                    return Err(Error::InvalidArgument(format!("std = {std}")));
                }
                let d = mean.len();
                let mut coords = Vec::with_capacity(n * d);
                for _ in 0..n {
                    for m in mean {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        coords.push(m + std * z);
                    }
                }
                EmpiricalMeasure::new(d, coords)
            }
            InitialLaw::Empirical { points } => {
                let d = points.dim();
                let mut coords = Vec::with_capacity(n * d);
                for _ in 0..n {
                    coords.extend_from_slice(points.point(sample_index(points, &mut rng)));
                }
                EmpiricalMeasure::new(d, coords)
            }
        }
    }

    /// First absolute moment `int |x| law(dx)` (Monte Carlo for the Gaussian case).
    pub fn first_moment(&self, seed: u64) -> Result<f64> {
        match self {
            InitialLaw::Empirical { points } => super::moment(points, 1.0),
            InitialLaw::Gaussian { .. } => super::moment(&self.sample(20_000, seed)?, 1.0),
        }
    }
}
