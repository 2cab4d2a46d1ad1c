use std::f64::consts::PI;

use kinetic_flows::kernels::geometry::{dot, norm3, sub, truncate3};
use kinetic_flows::kernels::{
    angular_from_uniform, collision_c, collision_weight, frame, mu_mass, rate_cap, rate_gamma,
    sample_angular, BetaKind,
};
use kinetic_flows::{lipschitz_budget, AngularParams, Convention, Error, ModelSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn boltzmann() -> ModelSpec {
    ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2)
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64]
}

fn angle() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..1.0f64)
}

fn mark(model: &ModelSpec, (u, w): (f64, f64)) -> AngularParams {
    angular_from_uniform(model, u, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn truncation_is_a_contraction_into_the_ball(v in vec3(), w in vec3(), cap in 1.0..4.0f64) {
        let hv = truncate3(&v, cap);
        let hw = truncate3(&w, cap);
        prop_assert!(norm3(&hv) <= cap + 1e-12);
        prop_assert!(norm3(&sub(&hv, &hw)) <= norm3(&sub(&v, &w)) + 1e-12);
    }

    #[test]
    fn frame_is_orthogonal_with_matching_lengths(x in vec3()) {
        prop_assume!(norm3(&x) > 1e-6);
        let (i, j) = frame(&x).unwrap();
        let s2 = dot(&x, &x);
        for d in [dot(&i, &x), dot(&j, &x), dot(&i, &j), dot(&i, &i) - s2, dot(&j, &j) - s2] {
            prop_assert!(d.abs() <= TOL * (1.0 + s2));
        }
    }

    #[test]
    fn deflection_norm_identity(v in vec3(), x in vec3(), z in angle(), literal in any::<bool>()) {
        let mut m = boltzmann();
        if literal {
            m = m.with_convention(Convention::PaperLiteral);
        }
        let z = mark(&m, z);
        let c = collision_c(&m, &v, z, &x).unwrap();
        let rel = sub(&truncate3(&v, m.gamma_cap), &truncate3(&x, m.gamma_cap));
        let expected = (0.5 * z.zeta).sin() * norm3(&rel);
        prop_assert!((norm3(&[c[0], c[1], c[2]]) - expected).abs() <= TOL);
    }

    #[test]
    fn convention_inner_product_identity(v in vec3(), x in vec3(), z in angle()) {
        for (conv, sign) in [(Convention::Energy, 1.0), (Convention::PaperLiteral, -1.0)] {
            let m = boltzmann().with_convention(conv);
            let z = mark(&m, z);
            let c = collision_c(&m, &v, z, &x).unwrap();
            let c = [c[0], c[1], c[2]];
            let rel = sub(&truncate3(&x, m.gamma_cap), &truncate3(&v, m.gamma_cap));
            prop_assert!((dot(&c, &rel) + sign * dot(&c, &c)).abs() <= TOL);
        }
    }

    #[test]
    fn energy_convention_conserves_pairwise(v in [-1.1..1.1f64, -1.1..1.1f64, -1.1..1.1f64],
                                            x in [-1.1..1.1f64, -1.1..1.1f64, -1.1..1.1f64],
                                            z in angle()) {
        // |v|, |x| <= 2 = gamma_cap, so no truncation
        let m = boltzmann();
        let z = mark(&m, z);
        let c = collision_c(&m, &v, z, &x).unwrap();
        let x2 = [x[0] + c[0], x[1] + c[1], x[2] + c[2]];
        let v2 = [v[0] - c[0], v[1] - c[1], v[2] - c[2]];
        prop_assert!((dot(&x2, &x2) + dot(&v2, &v2) - dot(&x, &x) - dot(&v, &v)).abs() <= TOL);
        for k in 0..3 {
            prop_assert!((x2[k] + v2[k] - x[k] - v[k]).abs() <= TOL);
        }
    }

    #[test]
    fn enskog_deflection_is_scaled_by_beta(v in [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64],
                                           x in [-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64],
                                           z in angle()) {
        let m = ModelSpec::enskog(0.5, 2.0, 0.2, 1.0).with_beta(BetaKind::Smoothstep);
        let z = mark(&m, z);
        let c = collision_c(&m, &v, z, &x).unwrap();
        prop_assert_eq!(&c[0..3], &[0.0, 0.0, 0.0]);
        let beta = collision_weight(&m, &v, &x);
        prop_assert!((0.0..=1.0).contains(&beta));
        let hv = truncate3(&[v[3], v[4], v[5]], m.gamma_cap);
        let hx = truncate3(&[x[3], x[4], x[5]], m.gamma_cap);
        let expected = beta * (0.5 * z.zeta).sin() * norm3(&sub(&hv, &hx));
        prop_assert!((norm3(&[c[3], c[4], c[5]]) - expected).abs() <= TOL);
    }

    #[test]
    fn rate_never_exceeds_cap(v in vec3(), x in vec3(), a in 0.0..1.0f64, cap in 1.0..4.0f64) {
        let m = ModelSpec::boltzmann3d(a, 0.5, cap, 0.2);
        prop_assert!(rate_gamma(&m, &v, &x, None).unwrap() <= rate_cap(&m) * (1.0 + 1e-12));
    }
}

#[test]
fn rate_cap_audit_on_a_million_pairs() {
    let m = boltzmann();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cap = rate_cap(&m);
    assert_eq!(cap, 2.0);
    for _ in 0..1_000_000 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        assert!(rate_gamma(&m, &v, &x, None).unwrap() <= cap);
    }
    assert_eq!(rate_cap(&ModelSpec::synthetic(0.5, 1.5)), 1.5);
}

fn analytic_cdf(zeta: f64, zeta_min: f64, nu: f64) -> f64 {
    (zeta_min.powf(-nu) - zeta.powf(-nu)) / (zeta_min.powf(-nu) - PI.powf(-nu))
}

#[test]
fn angular_sampling_matches_its_law() {
    let m = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 1_000_000;
    let mut zetas = Vec::with_capacity(draws);
    let mut phi_sum = 0.0;
    for _ in 0..draws {
        let z = sample_angular(&m, &mut rng).unwrap();
        assert!((m.zeta_min..=PI).contains(&z.zeta));
        assert!((0.0..2.0 * PI).contains(&z.phi));
        zetas.push(z.zeta);
        phi_sum += z.phi;
    }
    zetas.sort_by(f64::total_cmp);
    let ks = zetas
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let f = analytic_cdf(z, m.zeta_min, m.nu);
            (f - k as f64 / draws as f64).abs().max(((k + 1) as f64 / draws as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.002, "KS = {ks}");
    let sigma = 2.0 * PI / 12f64.sqrt() / (draws as f64).sqrt();
    assert!((phi_sum / draws as f64 - PI).abs() <= 5.0 * sigma);
}

#[test]
fn analytic_cdf_matches_integrated_density() {
    let (zeta_min, nu): (f64, f64) = (0.1, 0.5);
    let total = zeta_min.powf(-nu) / nu - PI.powf(-nu) / nu;
    let steps = 200_000;
    let z_end = 1.3;
    let h = (z_end - zeta_min) / steps as f64;
    let integral: f64 = (0..steps)
        .map(|k| (zeta_min + (k as f64 + 0.5) * h).powf(-1.0 - nu) * h)
        .sum();
    assert!((integral / total - analytic_cdf(z_end, zeta_min, nu)).abs() < 1e-6);
}

#[test]
fn angular_endpoints() {
    let m = boltzmann();
    assert_eq!(angular_from_uniform(&m, 0.0, 0.0).unwrap().zeta, m.zeta_min);
    assert!((angular_from_uniform(&m, 1.0, 0.0).unwrap().zeta - PI).abs() < 1e-12);
    let degenerate = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, PI);
    assert!(matches!(
        angular_from_uniform(&degenerate, 0.5, 0.5),
        Err(Error::DegenerateCutoff { .. })
    ));
}

#[test]
fn angular_mass_matches_quadrature() {
    let m = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, PI / 4.0);
    assert!((mu_mass(&m).unwrap() - 7.0898).abs() < 1e-4);
    let steps = 400_000;
    let h = (PI - m.zeta_min) / steps as f64;
    let numeric: f64 = 2.0 * PI
        * (0..steps)
            .map(|k| (m.zeta_min + (k as f64 + 0.5) * h).powf(-1.5) * h)
            .sum::<f64>();
    assert!((mu_mass(&m).unwrap() - numeric).abs() < 1e-6 * numeric);
    assert_eq!(mu_mass(&ModelSpec::synthetic(0.5, 1.0)).unwrap(), 1.0);
    let nearly_empty = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, PI - 1e-9);
    assert!(mu_mass(&nearly_empty).unwrap() < 1e-8);
}

#[test]
fn synthetic_jump_and_budget() {
    let m = ModelSpec::synthetic(0.5, 1.0);
    let c = collision_c(&m, &[2.0], AngularParams::ATOM, &[0.0]).unwrap();
    assert_eq!(c, vec![1.0]);
    let b = lipschitz_budget(&m);
    assert_eq!(b.l_mu, 0.5);
    assert_eq!(b.l_b, 0.0);
    assert_eq!(lipschitz_budget(&boltzmann()).l_b, 0.0);
}
