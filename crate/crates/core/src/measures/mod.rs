//! Equal-weight empirical measures and exact 1-Wasserstein distances.

mod assignment;
mod io;
mod law;

pub use assignment::{solve_assignment, Assignment};
pub use law::InitialLaw;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{two_sum, ExactSum};

/// Default point-count cap for the assignment solver.
pub const DEFAULT_ASSIGNMENT_CAP: usize = 2048;

/// `N` equally weighted points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EmpiricalMeasure {
    dim: usize,
    coords: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(k) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: k / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyMeasure)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    /// One-dimensional measure from scalar samples.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Values of coordinate `k` across all points.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.points().map(|p| p[k]).collect()
    }

    /// Marginal on the coordinate range `range` (e.g. positions of a phase-space measure).
    pub fn marginal(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.dim || range.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "marginal {range:?} outside dimension {}",
                self.dim
            )));
        }
        let coords = self
            .points()
            .flat_map(|p| p[range.clone()].iter().copied())
            .collect();
        Self::new(range.len(), coords)
    }

    /// The first `n` points; a valid subsample for exchangeable particles.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.clamp(1, self.len());
        Self {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        self.check_dim(shift.len())?;
        let coords = self
            .points()
            .flat_map(|p| p.iter().zip(shift).map(|(x, c)| x + c))
            .collect();
        Self::new(self.dim, coords)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.coords.iter().map(|x| x * factor).collect())
    }

    /// Coordinate-wise mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.points() {
            for (acc, x) in m.iter_mut().zip(p) {
                *acc += x;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for EmpiricalMeasure {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_points(&rows)
    }
}

impl From<EmpiricalMeasure> for Vec<Vec<f64>> {
    fn from(m: EmpiricalMeasure) -> Self {
        m.points().map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn check_pair(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<()> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            found: nu.dim,
        });
    }
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    Ok(())
}

/// Total transport cost of the pairing `i -> perm[i]`, correctly rounded.
///
/// In one dimension each `|x - y|` enters as its exact two-term expansion, so
/// pairings with equal exact cost produce bitwise-equal totals. In higher
/// dimensions the Euclidean distances are rounded once and then summed exactly.
pub fn pairing_cost(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, perm: &[usize]) -> Result<f64> {
    check_pair(mu, nu)?;
    if perm.len() != mu.len() {
        return Err(Error::SizeMismatch {
            left: mu.len(),
            right: perm.len(),
        });
    }
    let mut acc = ExactSum::new();
    for (i, &j) in perm.iter().enumerate() {
        add_distance(&mut acc, mu.point(i), nu.point(j));
    }
    Ok(acc.value())
}

fn add_distance(acc: &mut ExactSum, x: &[f64], y: &[f64]) {
    if x.len() == 1 {
        let (hi, lo) = two_sum(x[0], -y[0]);
        if hi < 0.0 || (hi == 0.0 && lo < 0.0) {
            acc.add(-hi);
            acc.add(-lo);
        } else {
            acc.add(hi);
            acc.add(lo);
        }
    } else {
        acc.add(euclid(x, y));
    }
}

#[inline]
pub(crate) fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Exact `W_1` between one-dimensional equal-size measures via sorted samples.
pub fn w1_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: mu.dim,
        });
    }
    check_pair(mu, nu)?;
    let mut xs = mu.coords.clone();
    let mut ys = nu.coords.clone();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut acc = ExactSum::new();
    for (x, y) in xs.iter().zip(&ys) {
        add_distance(&mut acc, &[*x], &[*y]);
    }
    Ok(acc.value() / xs.len() as f64)
}

/// Exact `W_1` between equal-size measures by optimal assignment, default cap.
pub fn w1_assignment(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    w1_assignment_with_cap(mu, nu, DEFAULT_ASSIGNMENT_CAP)
}

pub fn w1_assignment_with_cap(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cap: usize,
) -> Result<f64> {
    check_pair(mu, nu)?;
    let n = mu.len();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        let x = mu.point(i);
        for j in 0..n {
            cost[i * n + j] = euclid(x, nu.point(j));
        }
    }
    let a = solve_assignment(&cost, n);
    Ok(pairing_cost(mu, nu, &a.row_to_col)? / n as f64)
}

/// `W_1` by the cheapest exact route: sorting in one dimension, assignment
/// otherwise. Measures above `cap` are compared on their first `cap` points.
pub fn w1(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cap: usize) -> Result<f64> {
    check_pair(mu, nu)?;
    if mu.dim == 1 {
        return w1_1d(mu, nu);
    }
    if mu.len() > cap {
        return w1_assignment_with_cap(&mu.prefix(cap), &nu.prefix(cap), cap);
    }
    w1_assignment_with_cap(mu, nu, cap)
}

/// Raw `p`-th absolute moment `(1/N) sum |x_i|^p`.
pub fn moment(mu: &EmpiricalMeasure, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order {p} must be positive")));
    }
    let s: f64 = mu.points().map(|x| norm(x).powf(p)).sum();
    Ok(s / mu.len() as f64)
}

/// Uniform index in `0..N`; `mu.point(index)` is then a draw from the measure.
pub fn sample_index<R: Rng + ?Sized>(mu: &EmpiricalMeasure, rng: &mut R) -> usize {
    rng.random_range(0..mu.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m1(v: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(v).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(EmpiricalMeasure::new(1, vec![]), Err(Error::EmptyMeasure)));
        assert!(matches!(
            EmpiricalMeasure::new(1, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(EmpiricalMeasure::new(2, vec![0.0, 1.0, 2.0]).is_err());
        assert!(EmpiricalMeasure::from_points(&[vec![0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn w1_1d_examples() {
        assert_eq!(w1_1d(&m1(&[0.0]), &m1(&[1.0])).unwrap(), 1.0);
        let mu = m1(&[0.3, -2.0, 5.5]);
        assert_eq!(w1_1d(&mu, &mu).unwrap(), 0.0);
        assert_eq!(w1_1d(&m1(&[0.0, 2.0]), &m1(&[1.0, 3.0])).unwrap(), 1.0);
    }

    #[test]
    fn w1_1d_errors() {
        let two_d = EmpiricalMeasure::from_points(&[[0.0, 0.0]]).unwrap();
        assert!(matches!(
            w1_1d(&two_d, &two_d),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            w1_1d(&m1(&[0.0]), &m1(&[0.0, 1.0])),
            Err(Error::SizeMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn w1_assignment_examples() {
        let a = EmpiricalMeasure::from_points(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(w1_assignment(&a, &a).unwrap(), 0.0);
        let p = EmpiricalMeasure::from_points(&[[0.0, 0.0]]).unwrap();
        let q = EmpiricalMeasure::from_points(&[[3.0, 4.0]]).unwrap();
        assert_eq!(w1_assignment(&p, &q).unwrap(), 5.0);
        let u = EmpiricalMeasure::from_points(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let v = EmpiricalMeasure::from_points(&[[1.0, 0.0], [3.0, 0.0]]).unwrap();
        assert_eq!(w1_assignment(&u, &v).unwrap(), 1.0);
    }

    #[test]
    fn w1_assignment_cap() {
        let mu = m1(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            w1_assignment_with_cap(&mu, &mu, 2),
            Err(Error::CapExceeded { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment(&m1(&[0.0]), 1.0).unwrap(), 0.0);
        let p = EmpiricalMeasure::from_points(&[[3.0, 4.0]]).unwrap();
        assert_eq!(moment(&p, 1.0).unwrap(), 5.0);
        assert_eq!(moment(&m1(&[1.0, 3.0]), 2.0).unwrap(), 5.0);
        assert!(moment(&p, 0.0).is_err());
    }

    #[test]
    fn sample_index_uniform_and_deterministic() {
        let one = m1(&[4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| sample_index(&one, &mut rng) == 0));

        let four = m1(&[0.0, 1.0, 2.0, 3.0]);
        let draws = 100_000;
        let mut counts = [0usize; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..draws {
            counts[sample_index(&four, &mut rng)] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((0.24..=0.26).contains(&f), "frequency {f}");
        }

        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        let sa: Vec<usize> = (0..50).map(|_| sample_index(&four, &mut a)).collect();
        let sb: Vec<usize> = (0..50).map(|_| sample_index(&four, &mut b)).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn marginal_and_prefix() {
        let m = EmpiricalMeasure::from_points(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let pos = m.marginal(1..3).unwrap();
        assert_eq!(pos.coords(), &[2.0, 3.0, 5.0, 6.0]);
        assert_eq!(m.prefix(1).len(), 1);
        assert_eq!(m.mean(), vec![2.5, 3.5, 4.5]);
    }
}
