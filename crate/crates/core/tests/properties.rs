use std::f64::consts::PI;

use proptest::prelude::*;
use qrl_core::compile::{compile_bs, compile_gaussian, compile_shear, Layout, Schedule, ShearMatrix};
use qrl_core::gaussian::{
    bogoliubov_to_symplectic, max_deviation, random_bogoliubov, random_unitary, unitary_to_symplectic, GaussianState,
};
use qrl_core::lattice::{build_qrl, nullifier_variances, run_schedule, run_schedule_averaged};
use qrl_core::teleport::{macronode_map, v_decompose, v_matrix, v_recompose, MacronodeAngles, MeasurementPair};

fn regular_pair() -> impl Strategy<Value = MeasurementPair> {
    (-PI..PI, -PI..PI)
        .prop_filter("basis too close to singular", |(b, a)| (b - a).sin().abs() > 1e-2)
        .prop_map(|(b, a)| MeasurementPair::new(b, a))
}

fn layout() -> impl Strategy<Value = Layout> {
    prop_oneof![Just(Layout::Triangular), Just(Layout::Rectangular)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn macronode_maps_are_symplectic(b in regular_pair(), d in regular_pair()) {
        let map = macronode_map(&MacronodeAngles::from_pairs(b, d)).unwrap();
        prop_assert!(map.symplectic_deviation() < 1e-9);
    }

    #[test]
    fn flipping_an_arm_negates_its_matrix(pair in regular_pair()) {
        let forward = v_matrix(pair).unwrap();
        let backward = v_matrix(pair.flipped()).unwrap();
        prop_assert!((forward + backward).abs().max() < 1e-9);
    }

    #[test]
    fn arm_decomposition_recomposes(pair in regular_pair()) {
        let (plus, arg) = v_decompose(pair).unwrap();
        let back = v_recompose(plus, arg);
        prop_assert!((back - v_matrix(pair).unwrap()).abs().max() < 1e-9);
    }

    #[test]
    fn compiled_unitaries_verify(n in 1usize..5, seed in any::<u64>(), layout in layout()) {
        let u = random_unitary(n, seed);
        let schedule = compile_bs(&u, layout).unwrap();
        let map = schedule.verify().unwrap();
        prop_assert!(max_deviation(map.matrix(), unitary_to_symplectic(&u).matrix()) < 1e-9);
    }

    #[test]
    fn schedule_json_round_trips(n in 1usize..4, seed in any::<u64>(), layout in layout()) {
        let schedule = compile_bs(&random_unitary(n, seed), layout).unwrap();
        let text = schedule.to_json().unwrap();
        let back = Schedule::from_json(&text).unwrap();
        prop_assert_eq!(&back.to_json().unwrap(), &text);
        prop_assert_eq!(back.verify().unwrap().into_matrix(), schedule.verify().unwrap().into_matrix());
    }

    #[test]
    fn compiled_gaussian_maps_verify(n in 1usize..4, seed in any::<u64>(), max_r in 0.0f64..1.5) {
        let pair = random_bogoliubov(n, seed, max_r);
        let map = compile_gaussian(&pair).unwrap().verify().unwrap();
        prop_assert!(max_deviation(map.matrix(), bogoliubov_to_symplectic(&pair).matrix()) < 1e-8);
    }

    #[test]
    fn compiled_shears_verify(n in 1usize..5, seed in any::<u64>(), bound in 0.1f64..4.0) {
        let k = ShearMatrix::random(n, seed, bound).unwrap();
        let map = compile_shear(&k).unwrap().verify().unwrap();
        prop_assert!(max_deviation(map.matrix(), &k.symplectic()) < 1e-9);
    }

    #[test]
    fn nullifiers_follow_the_squeezing(r in 0.0f64..3.0, period in 1i64..6) {
        let state = build_qrl(0, 2 * period + 1, period, r).unwrap();
        let expected = 4.0 * (-2.0 * r).exp();
        for v in nullifier_variances(&state, 0).unwrap() {
            prop_assert!((v - expected).abs() < 1e-9 * expected.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulated_outputs_stay_physical(seed in any::<u64>(), shot in any::<u64>(), r in 0.0f64..2.5, layout in layout()) {
        let schedule = compile_bs(&random_unitary(2, seed), layout).unwrap();
        let input = GaussianState::vacuum(2);
        for out in [run_schedule(&schedule, &input, r, shot).unwrap(), run_schedule_averaged(&schedule, &input, r).unwrap()] {
            prop_assert!(out.uncertainty_min_eigenvalue() >= -1e-9);
        }
    }
}
