use gvm_core::ensemble::{avg_fit_error, design_risk_regression, rms_distance};
use gvm_core::trainer::{train_seeded, StepOutcome, Trainer};
use gvm_core::{init_random, ControlParams, CostSpec, Dataset, TransferKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind_strategy() -> impl Strategy<Value = TransferKind> {
    prop_oneof![
        Just(TransferKind::Gauss),
        Just(TransferKind::Sigmoid),
        Just(TransferKind::Relu),
        (1u32..5).prop_map(TransferKind::Polynomial),
    ]
}

fn cost_strategy() -> impl Strategy<Value = CostSpec> {
    (0.1f64..5.0, 0usize..4).prop_map(|(d, k)| match k {
        0 => CostSpec::F1 { d },
        1 => CostSpec::F2 { d },
        2 => CostSpec::F2Bar { d },
        _ => CostSpec::F3 { d1: d, d2: 2.0 * d },
    })
}

prop_compose! {
    fn classification_set()(m in 1usize..5, l in 2usize..4, p in 1usize..20)
        (inputs in proptest::collection::vec(-1.0f64..1.0, m * p),
         labels in proptest::collection::vec(0..l, p), m in Just(m), l in Just(l))
        -> Dataset {
        Dataset::classification(m, inputs, l, labels).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn training_never_raises_the_cost_and_stays_in_range(
        data in classification_set(),
        kind in kind_strategy(),
        cost in cost_strategy(),
        n in 1usize..12,
        seed in any::<u64>(),
    ) {
        let control = ControlParams::new(1.5, 2.0, 1.0, n, cost).with_stop(0.0, 2_000);
        let params = init_random(&control, data.input_dim(), data.output_dim(), kind, seed).unwrap();
        let outputs = params.output_weights().to_vec();
        let mut trainer = Trainer::new(params, &data, &control).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last = trainer.cost();
        for _ in 0..2_000 {
            let before = trainer.cost();
            let outcome = trainer.step(&mut rng);
            prop_assert!(trainer.cost() <= last);
            if outcome != StepOutcome::Accepted {
                prop_assert_eq!(trainer.cost(), before);
            }
            last = trainer.cost();
        }
        let p = trainer.params();
        prop_assert!(p.within_bounds(&control));
        prop_assert_eq!(p.output_weights(), &outputs[..]);
        prop_assert!(trainer.state().max_discrepancy(&trainer.recompute()) <= 1e-9);
    }

    #[test]
    fn seeded_training_is_deterministic(data in classification_set(), seed in any::<u64>()) {
        let control = ControlParams::new(1.0, 1.0, 1.0, 6, CostSpec::F2 { d: 1.0 }).with_stop(0.0, 500);
        let a = train_seeded(&data, &control, TransferKind::Sigmoid, seed).unwrap();
        let b = train_seeded(&data, &control, TransferKind::Sigmoid, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fitting_error_splits_into_risk_and_bias(
        goal in proptest::collection::vec(-3.0f64..3.0, 1..60),
        offsets in proptest::collection::vec(-1.0f64..1.0, 1..20),
    ) {
        let curves: Vec<Vec<f64>> = offsets
            .iter()
            .enumerate()
            .map(|(i, o)| goal.iter().enumerate().map(|(k, g)| g + o * ((i + k) as f64).cos()).collect())
            .collect();
        let theta = avg_fit_error(&curves, &goal).unwrap();
        let (risk, mean) = design_risk_regression(&curves).unwrap();
        let bias = rms_distance(&mean, &goal);
        let lhs = theta * theta;
        prop_assert!((lhs - risk * risk - bias * bias).abs() <= 1e-10 * lhs.max(1e-300));
    }
}

#[test]
fn regression_fit_reaches_its_stop_cost() {
    let data = gvm_core::data::gen_regression(gvm_core::GoalFunction::Sin, std::f64::consts::PI, 8, 0.0, 0).unwrap();
    let mut control = gvm_core::data::default_regression_controls(std::f64::consts::PI).with_stop(5e-2, 400_000);
    control.n_hidden = 10;
    control.c_beta = 2.0;
    let outcome = train_seeded(&data, &control, TransferKind::Gauss, 3).unwrap();
    assert!(outcome.converged);
    assert!(outcome.final_cost <= 5e-2);
    assert!(outcome.history.windows(2).all(|w| w[1].cost <= w[0].cost));
}
