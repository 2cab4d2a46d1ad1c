//! Marked Poisson candidate streams.
//!
//! Each particle owns one marked Poisson process on the time axis with
//! intensity `mu(E) * rate_cap`. Time is cut into windows of length
//! `1 / intensity`; the events of window `w` for particle `i` are generated
//! from ChaCha stream `i` at word offset `w << 32`. The marks of an event are
//! therefore a pure function of `(seed, particle, window)`: they do not depend
//! on the time grid, the thread count, or how a run is split into calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::kernels::{rate_cap, sample_angular, AngularParams, ModelSpec};
use crate::numerics::derive_seed;

/// One candidate jump: its time and the marks `(partner, z, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEvent {
    pub time: f64,
    pub partner: usize,
    pub z: AngularParams,
    pub u: f64,
}

/// Source of candidate events for the thinning step.
pub trait EventSource: Sync {
    /// Appends the candidates of `particle` with times in `[s, t)`, sorted by
    /// time; partners are indices into a population of `n_partners`.
    fn candidates(
        &self,
        particle: usize,
        s: f64,
        t: f64,
        n_partners: usize,
        model: &ModelSpec,
        out: &mut Vec<CandidateEvent>,
    ) -> Result<()>;
}

/// Counter-based driving noise keyed by a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrivingNoise {
    seed: u64,
}

const WINDOW_WORDS_SHIFT: u32 = 32;

impl DrivingNoise {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn window_rng(&self, particle: usize, window: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, 0x6e6f697365));
        rng.set_stream(particle as u64);
        rng.set_word_pos((window as u128) << WINDOW_WORDS_SHIFT);
        rng
    }

    #[allow(clippy::too_many_arguments)]
    fn window_events(
        &self,
        particle: usize,
        window: u64,
        width: f64,
        n_partners: usize,
        model: &ModelSpec,
        cap: f64,
        poisson: &Poisson<f64>,
        out: &mut Vec<CandidateEvent>,
    ) -> Result<()> {
        let mut rng = self.window_rng(particle, window);
        let count = poisson.sample(&mut rng) as usize;
        let start = window as f64 * width;
        for _ in 0..count {
            let offset: f64 = rng.random();
            let partner = rng.random_range(0..n_partners);
            let z = sample_angular(model, &mut rng)?;
            let u = cap * rng.random::<f64>();
            out.push(CandidateEvent {
                time: start + offset * width,
                partner,
                z,
                u,
            });
        }
        Ok(())
    }
}

impl EventSource for DrivingNoise {
    fn candidates(
        &self,
        particle: usize,
        s: f64,
        t: f64,
        n_partners: usize,
        model: &ModelSpec,
        out: &mut Vec<CandidateEvent>,
    ) -> Result<()> {
        if t < s {
            return Err(Error::NegativeDuration { s, t });
        }
        if s < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {s}")));
        }
        let intensity = model.candidate_rate()?;
        if t == s || intensity == 0.0 || n_partners == 0 {
            return Ok(());
        }
        let width = 1.0 / intensity;
        let poisson = Poisson::new(1.0).expect("unit mean");
        let cap = rate_cap(model);
        let first = (s / width).floor() as u64;
        let last = (t / width).ceil() as u64;
        let begin = out.len();
        for w in first..last.max(first + 1) {
            let mark = out.len();
            self.window_events(particle, w, width, n_partners, model, cap, &poisson, out)?;
            // keep only [s, t)
            let mut keep = mark;
            for k in mark..out.len() {
                let e = out[k];
                if e.time >= s && e.time < t {
                    out[keep] = e;
                    keep += 1;
                }
            }
            out.truncate(keep);
        }
        out[begin..].sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_do_not_depend_on_the_split() {
        let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
        let noise = DrivingNoise::new(42);
        let mut whole = Vec::new();
        noise.candidates(3, 0.0, 1.0, 100, &model, &mut whole).unwrap();
        let mut parts = Vec::new();
        for k in 0..7 {
            let s = k as f64 / 7.0;
            let t = if k == 6 { 1.0 } else { (k + 1) as f64 / 7.0 };
            noise.candidates(3, s, t, 100, &model, &mut parts).unwrap();
        }
        assert_eq!(whole, parts);
        assert!(!whole.is_empty());
        assert!(whole.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn particles_have_distinct_streams() {
        let model = ModelSpec::synthetic(0.5, 5.0);
        let noise = DrivingNoise::new(7);
        let mut a = Vec::new();
        let mut b = Vec::new();
        noise.candidates(0, 0.0, 4.0, 10, &model, &mut a).unwrap();
        noise.candidates(1, 0.0, 4.0, 10, &model, &mut b).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_rate_and_zero_length() {
        let noise = DrivingNoise::new(1);
        let mut out = Vec::new();
        noise
            .candidates(0, 0.0, 10.0, 5, &ModelSpec::synthetic(0.5, 0.0), &mut out)
            .unwrap();
        assert!(out.is_empty());
        noise
            .candidates(0, 2.0, 2.0, 5, &ModelSpec::synthetic(0.5, 1.0), &mut out)
            .unwrap();
        assert!(out.is_empty());
        assert!(noise
            .candidates(0, 2.0, 1.0, 5, &ModelSpec::synthetic(0.5, 1.0), &mut out)
            .is_err());
    }
}
