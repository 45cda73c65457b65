mod common;

use gmfg_core::environments::*;
use gmfg_core::metrics::{exploitability, kl_divergence, kl_metric, monotonicity_probe, OccupancyProfile, Provenance, ReferenceSolution};
use gmfg_core::solvers::mirror_descent_step;
use gmfg_core::{induce_flow, ModelSpec};
use proptest::prelude::*;
use rand::Rng;

fn all_environments() -> Vec<EnvironmentParams> {
    vec![
        EnvironmentParams::BeachBar(BeachBarParams::default()),
        EnvironmentParams::BeachBar(BeachBarParams { blocks: 3, noise: 0.0, ..Default::default() }),
        EnvironmentParams::CrowdAvoidance(CrowdAvoidanceParams::default()),
        EnvironmentParams::CrowdAvoidance(CrowdAvoidanceParams::grid()),
        EnvironmentParams::PredatorPrey(PredatorPreyParams::default()),
        EnvironmentParams::PeriodicAversion(PeriodicAversionParams::default()),
        EnvironmentParams::Congestion(CongestionParams::default()),
        EnvironmentParams::AntiCongestion(CongestionParams::default()),
        EnvironmentParams::LinearSynthetic(LinearSyntheticParams::default()),
        EnvironmentParams::LinearSynthetic(LinearSyntheticParams { one_hot: true, ..Default::default() }),
    ]
}

fn models() -> Vec<ModelSpec> {
    all_environments().iter().map(|p| make_environment(p).unwrap()).collect()
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|v| {
        let t: f64 = v.iter().sum();
        v.into_iter().map(|x| x / t).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mirror_step_stays_interior(
        (row, g) in (2usize..9).prop_flat_map(|n| (distribution(n), prop::collection::vec(-50.0f64..50.0, n))),
        eta_frac in 0.001f64..=1.0,
        lambda in 0.0f64..2.0,
    ) {
        let eta = if lambda > 0.0 { eta_frac / lambda } else { 10.0 * eta_frac };
        let out = mirror_descent_step(&row, &g, eta, lambda).unwrap();
        prop_assert!(out.iter().all(|p| *p > 0.0 && p.is_finite()));
        prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kl_is_nonnegative((p, q) in (1usize..8).prop_flat_map(|n| (distribution(n), distribution(n)))) {
        prop_assert!(kl_divergence(&p, &q) >= 0.0);
        prop_assert_eq!(kl_divergence(&p, &p), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn probe_is_symmetric_in_its_arguments(seed in any::<u64>(), which in 0usize..10) {
        let model = &models()[which];
        let mut rng = common::rng(seed);
        let rho = OccupancyProfile::random(model.dims(), &mut rng);
        let rho_tilde = OccupancyProfile::random(model.dims(), &mut rng);
        let forward = monotonicity_probe(model, &rho, &rho_tilde).unwrap();
        let backward = monotonicity_probe(model, &rho_tilde, &rho).unwrap();
        prop_assert!((forward - backward).abs() < 1e-12);
        prop_assert_eq!(monotonicity_probe(model, &rho, &rho).unwrap(), 0.0);
    }

    #[test]
    fn environments_stay_in_range_and_are_never_exploitable_below_zero(seed in any::<u64>(), which in 0usize..10) {
        let model = &models()[which];
        let mut rng = common::rng(seed);
        let policy = common::random_policy(&mut rng, model.dims(), 0.0);
        let (_, agg) = induce_flow(model, &policy).unwrap();
        let dims = model.dims();
        let mut row = vec![0.0; dims.states];
        for b in 0..dims.blocks {
            for h in 0..dims.horizon {
                let ctx = agg.context(b, h);
                for s in 0..dims.states {
                    for a in 0..dims.actions {
                        let c = model.checked_cost(&ctx, s, a).unwrap();
                        prop_assert!((0.0..=1.0).contains(&c));
                        model.checked_transition(&ctx, s, a, &mut row).unwrap();
                    }
                }
            }
        }
        prop_assert!(exploitability(model, &policy).unwrap() >= -1e-9);
    }

    #[test]
    fn kl_metric_vanishes_only_at_the_reference(seed in any::<u64>()) {
        let model = make_environment(&EnvironmentParams::Congestion(CongestionParams::default())).unwrap();
        let mut rng = common::rng(seed);
        let reference_policy = common::random_policy(&mut rng, model.dims(), 0.01);
        let provenance = Provenance { solver: "test".into(), iterations: 0, lambda: 0.1, seed };
        let reference = ReferenceSolution::new(&model, reference_policy.clone(), provenance).unwrap();
        prop_assert_eq!(kl_metric(&reference_policy, &reference, model.grid()).unwrap(), 0.0);
        let other = common::random_policy(&mut rng, model.dims(), 0.01);
        prop_assert!(kl_metric(&other, &reference, model.grid()).unwrap() > 0.0);
    }
}

#[test]
fn synthetic_linear_kernels_are_distributions() {
    for params in [LinearSyntheticParams::default(), LinearSyntheticParams { states: 6, actions: 3, horizon: 4, dim: 5, seed: 9, one_hot: false }] {
        let (model, linear) = make_linear_synthetic(&params).unwrap();
        let truth = linear.truth().unwrap();
        let mut rng = common::rng(params.seed + 1);
        let mut phi = vec![0.0; linear.dim()];
        for _ in 0..1000 {
            let (s, a) = (rng.random_range(0..model.states()), rng.random_range(0..model.actions()));
            let z = common::simplex(&mut rng, model.states(), 0.0);
            linear.features(s, a, &z, &mut phi);
            assert_unit_norm(&phi);
            for theta in truth {
                let mut total = 0.0;
                for s2 in 0..model.states() {
                    let p: f64 = theta.row(s2).iter().zip(&phi).map(|(t, f)| t * f).sum();
                    assert!(p >= -1e-12);
                    total += p;
                }
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }
}

fn assert_unit_norm(phi: &[f64]) {
    assert!(phi.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-12);
}
