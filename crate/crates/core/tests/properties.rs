mod common;

use std::f64::consts::PI;

use common::{random_params, random_weighted, rng};
use proptest::prelude::*;
use qaoa_lightcone::oracle::{exhaustive_min, full_expectation};
use qaoa_lightcone::problems::{gen_random_regular, maxcut_model, sk_model};
use qaoa_lightcone::{
    decompose, expectation, grid_scan, Axis, EngineConfig, IsingModel, ParamSchedule, PreparedModel,
};

fn energy(model: &IsingModel, params: &ParamSchedule) -> f64 {
    expectation(model, params, &EngineConfig::default().with_workers(1))
        .unwrap()
        .energy
}

fn shifted(params: &ParamSchedule, dg: f64, sign: f64) -> ParamSchedule {
    ParamSchedule::new(
        params.gammas().iter().map(|g| sign * (g + dg)).collect(),
        params.betas().iter().map(|b| sign * b).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposed_matches_oracle(n in 2usize..10, seed in 0u64..1000, p in 1usize..4) {
        let model = random_weighted(n, 0.4, seed);
        let params = random_params(p, &mut rng(seed + 1));
        let fast = energy(&model, &params);
        let slow = full_expectation(&model, &params).unwrap();
        prop_assert!((fast - slow).abs() < 1e-9, "{} vs {}", fast, slow);
    }

    #[test]
    fn energy_is_bounded_by_the_spectrum(n in 2usize..9, seed in 0u64..1000, p in 1usize..3) {
        let model = random_weighted(n, 0.5, seed);
        let params = random_params(p, &mut rng(seed));
        let (_, min) = exhaustive_min(&model).unwrap();
        let max = (0..1u64 << n).map(|b| model.cost_of_basis_index(b)).fold(f64::MIN, f64::max);
        let e = energy(&model, &params);
        prop_assert!(e >= min - 1e-9 && e <= max + 1e-9);
    }

    #[test]
    fn negating_all_angles_changes_nothing(seed in 0u64..1000, p in 1usize..4) {
        let model = random_weighted(9, 0.35, seed);
        let params = random_params(p, &mut rng(seed));
        let a = energy(&model, &params);
        let b = energy(&model, &shifted(&params, 0.0, -1.0));
        prop_assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn maxcut_is_periodic_in_gamma() {
    let model = maxcut_model(&gen_random_regular(12, 3, 5).unwrap());
    let mut r = rng(5);
    for p in 1..=3 {
        let params = random_params(p, &mut r);
        let a = energy(&model, &params);
        let b = energy(&model, &shifted(&params, PI, 1.0));
        assert!((a - b).abs() < 1e-12, "p={p}: {a} vs {b}");
    }
}

#[test]
fn disconnected_components_add_up() {
    let a = sk_model(5, 1).unwrap();
    let b = random_weighted(6, 0.5, 2);
    let mut edges = Vec::new();
    let mut biases = Vec::new();
    for e in a.edges() {
        edges.push((e.u, e.v, e.weight));
    }
    for e in b.edges() {
        edges.push((e.u + 5, e.v + 5, e.weight));
    }
    for k in 0..6 {
        biases.push((k + 5, b.bias(k)));
    }
    let joined = IsingModel::new(11, &edges, &biases, a.offset() + b.offset()).unwrap();
    let params = random_params(2, &mut rng(3));
    let sum = energy(&a, &params) + energy(&b, &params);
    assert!((energy(&joined, &params) - sum).abs() < 1e-12);
}

#[test]
fn worker_count_and_dedup_do_not_change_bits() {
    let model = random_weighted(14, 0.3, 17);
    let params = random_params(2, &mut rng(17));
    let reference = energy(&model, &params).to_bits();
    for workers in [1, 2, 8] {
        for dedup in [true, false] {
            let config = EngineConfig::default()
                .with_workers(workers)
                .with_dedup(dedup);
            let r = expectation(&model, &params, &config).unwrap();
            assert_eq!(
                r.energy.to_bits(),
                reference,
                "workers {workers} dedup {dedup}"
            );
        }
    }
}

#[test]
fn prepared_model_reuses_decomposition() {
    let model = maxcut_model(&gen_random_regular(40, 3, 9).unwrap());
    let prepared = PreparedModel::new(&model, 2, &EngineConfig::default()).unwrap();
    assert_eq!(prepared.num_terms(), 60);
    assert!(prepared.distinct_classes() < 60);
    let mut r = rng(9);
    for _ in 0..3 {
        let params = random_params(2, &mut r);
        let report = prepared.evaluate(&params).unwrap();
        assert_eq!(report.energy, energy(&model, &params));
        assert_eq!(report.terms.len(), 60);
        assert_eq!(
            report.terms.iter().filter(|t| !t.cache_hit).count(),
            prepared.distinct_classes()
        );
    }
    assert!(prepared.energy(&random_params(1, &mut r)).is_err());
}

#[test]
fn grid_scan_agrees_with_pointwise_evaluation() {
    let model = random_weighted(7, 0.5, 4);
    let gamma = Axis {
        min: -1.0,
        max: 1.0,
        steps: 5,
    };
    let beta = Axis {
        min: 0.0,
        max: 0.7,
        steps: 4,
    };
    let scan = grid_scan(&model, 1, gamma, beta, &EngineConfig::default()).unwrap();
    for (gi, &g) in scan.gammas.iter().enumerate() {
        for (bi, &b) in scan.betas.iter().enumerate() {
            let params = ParamSchedule::new(vec![g], vec![b]).unwrap();
            assert!((scan.at(gi, bi) - energy(&model, &params)).abs() < 1e-12);
        }
    }
}

#[test]
fn term_list_covers_every_nonzero_coefficient() {
    let model = IsingModel::new(
        5,
        &[(0, 1, 1.0), (1, 2, 0.0), (2, 3, -2.0), (3, 4, 0.5)],
        &[(0, 1.0), (2, 0.0), (4, -1.0)],
        0.0,
    )
    .unwrap();
    let terms = decompose(&model, 1).unwrap();
    assert_eq!(terms.len(), 5);
    let total: f64 = terms.iter().map(|t| t.id.coefficient.abs()).sum();
    assert_eq!(total, 1.0 + 2.0 + 0.5 + 1.0 + 1.0);
}
