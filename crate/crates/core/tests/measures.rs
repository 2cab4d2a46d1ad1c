use kinetic_flows::measures::{moment, pairing_cost, sample_index};
use kinetic_flows::{w1, w1_1d, w1_assignment, EmpiricalMeasure, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn measure(dim: usize, coords: Vec<f64>) -> EmpiricalMeasure {
    EmpiricalMeasure::new(dim, coords).unwrap()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn brute_force(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> f64 {
    let mut perm: Vec<usize> = (0..mu.len()).collect();
    let mut best = f64::INFINITY;
    loop {
        best = best.min(pairing_cost(mu, nu, &perm).unwrap() / mu.len() as f64);
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

fn grid_measure(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmpiricalMeasure {
    // small integer grid forces many exact ties
    let coords = (0..n * dim)
        .map(|_| {
            if rng.random_bool(0.5) {
                rng.random_range(-3..=3) as f64
            } else {
                rng.random_range(-3.0..3.0)
            }
        })
        .collect();
    measure(dim, coords)
}

#[test]
fn assignment_matches_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let dim = rng.random_range(1..=3);
        let mu = grid_measure(&mut rng, n, dim);
        let nu = grid_measure(&mut rng, n, dim);
        let exact = brute_force(&mu, &nu);
        assert_eq!(w1_assignment(&mu, &nu).unwrap(), exact, "n={n} d={dim}");
        if dim == 1 {
            assert_eq!(w1_1d(&mu, &nu).unwrap(), exact);
        }
    }
}

#[test]
fn one_dimensional_solvers_agree_at_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [50, 300, 1000] {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..7.0)).collect();
        let mu = EmpiricalMeasure::from_scalars(&a).unwrap();
        let nu = EmpiricalMeasure::from_scalars(&b).unwrap();
        let d = w1_1d(&mu, &nu).unwrap();
        assert!((w1_assignment(&mu, &nu).unwrap() - d).abs() <= 1e-12);
    }
}

#[test]
fn worked_examples() {
    let s = |v: &[f64]| EmpiricalMeasure::from_scalars(v).unwrap();
    assert_eq!(w1_1d(&s(&[0.0]), &s(&[1.0])).unwrap(), 1.0);
    assert_eq!(w1_1d(&s(&[0.0, 2.0]), &s(&[1.0, 3.0])).unwrap(), 1.0);
    let a = measure(2, vec![0.0, 0.0, 2.0, 0.0]);
    let b = measure(2, vec![1.0, 0.0, 3.0, 0.0]);
    assert_eq!(w1_assignment(&a, &b).unwrap(), 1.0);
    assert_eq!(w1_assignment(&measure(2, vec![0.0, 0.0]), &measure(2, vec![3.0, 4.0])).unwrap(), 5.0);
    assert_eq!(moment(&s(&[1.0, 3.0]), 2.0).unwrap(), 5.0);
    assert_eq!(moment(&measure(2, vec![3.0, 4.0]), 1.0).unwrap(), 5.0);
}

#[test]
fn size_and_dimension_errors() {
    let a = EmpiricalMeasure::from_scalars(&[0.0, 1.0]).unwrap();
    let b = EmpiricalMeasure::from_scalars(&[0.0]).unwrap();
    assert!(matches!(w1_1d(&a, &b), Err(Error::SizeMismatch { .. })));
    let c = measure(2, vec![0.0, 0.0, 1.0, 1.0]);
    assert!(matches!(w1_1d(&c, &c), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(w1_assignment(&a, &c), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn index_sampling_is_uniform_and_reproducible() {
    let m = measure(1, vec![0.0, 1.0, 2.0, 3.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 4];
    let draws = 100_000;
    for _ in 0..draws {
        counts[sample_index(&m, &mut rng)] += 1;
    }
    for c in counts {
        let f = c as f64 / draws as f64;
        assert!((0.24..=0.26).contains(&f), "{counts:?}");
    }
    let seq = |seed| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..100).map(|_| sample_index(&m, &mut r)).collect::<Vec<_>>()
    };
    assert_eq!(seq(9), seq(9));
    let single = measure(1, vec![4.0]);
    assert_eq!(sample_index(&single, &mut rng), 0);
}

#[test]
fn large_measures_are_subsampled_only_above_the_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let coords: Vec<f64> = (0..3 * 40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mu = measure(3, coords.clone());
    let nu = mu.translated(&[0.5, 0.0, 0.0]).unwrap();
    assert!((w1(&mu, &nu, 64).unwrap() - w1_assignment(&mu, &nu).unwrap()).abs() < 1e-15);
    assert!(w1(&mu, &nu, 16).is_ok());
}

fn points(dim: usize, n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim * n)
}

fn triple() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=3, 1usize..=12).prop_flat_map(|(d, n)| (Just(d), points(d, n), points(d, n), points(d, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms((d, a, b, c) in triple()) {
        let (a, b, c) = (measure(d, a), measure(d, b), measure(d, c));
        prop_assert_eq!(w1_assignment(&a, &a).unwrap(), 0.0);
        let ab = w1_assignment(&a, &b).unwrap();
        prop_assert!((ab - w1_assignment(&b, &a).unwrap()).abs() <= 1e-12);
        let bc = w1_assignment(&b, &c).unwrap();
        let ac = w1_assignment(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn translation_and_scaling((d, a, b, _) in triple(), shift in -5.0..5.0f64, factor in -3.0..3.0f64) {
        let (a, b) = (measure(d, a), measure(d, b));
        let base = w1_assignment(&a, &b).unwrap();
        let s = vec![shift; d];
        let moved = w1_assignment(&a.translated(&s).unwrap(), &b.translated(&s).unwrap()).unwrap();
        prop_assert!((moved - base).abs() <= 1e-12);
        let scaled = w1_assignment(&a.scaled(factor).unwrap(), &b.scaled(factor).unwrap()).unwrap();
        prop_assert!((scaled - factor.abs() * base).abs() <= 1e-12);
    }

    #[test]
    fn csv_and_json_round_trip_bitwise((d, a, _, _) in triple()) {
        let m = measure(d, a);
        let csv = m.to_csv_string().unwrap();
        prop_assert_eq!(&EmpiricalMeasure::read_csv(csv.as_bytes()).unwrap(), &m);
        prop_assert_eq!(&EmpiricalMeasure::from_json(&m.to_json().unwrap()).unwrap(), &m);
    }
}
