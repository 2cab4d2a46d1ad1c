use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition `s = s_0 < ... < s_n = t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSchedule {
    pub s: f64,
    pub t: f64,
    pub n: usize,
}

impl PartitionSchedule {
    pub fn new(s: f64, t: f64, n: usize) -> Result<Self> {
        let p = Self { s, t, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.t.is_finite()) {
            return Err(Error::InvalidSchedule("endpoints must be finite".into()));
        }
        if self.t < self.s {
            return Err(Error::InvalidSchedule(format!("t = {} < s = {}", self.t, self.s)));
        }
        if self.n == 0 {
            return Err(Error::InvalidSchedule("n must be at least 1".into()));
        }
        Ok(())
    }

    /// Mesh `(t - s) / n`.
    pub fn mesh(&self) -> f64 {
        (self.t - self.s) / self.n as f64
    }

    /// Node `s_k = s + k (t - s) / n`, with `s_n = t` exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.n {
            self.t
        } else {
            self.s + k as f64 * (self.t - self.s) / self.n as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.node(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_mesh() {
        let p = PartitionSchedule::new(1.0, 2.0, 4).unwrap();
        assert_eq!(p.nodes(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(p.mesh(), 0.25);
        assert!(PartitionSchedule::new(2.0, 1.0, 4).is_err());
        assert!(PartitionSchedule::new(0.0, 1.0, 0).is_err());
        assert!(PartitionSchedule::new(0.0, 0.0, 1).is_ok());
    }
}
