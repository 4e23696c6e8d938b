//! Property tests over randomly generated scenarios, matrices and models.

use proptest::prelude::*;

use lhvout::behaviour::{
    antipodal_extend, check_antipodal, from_correlators, random_nonsignalling, read_behaviour,
    write_behaviour, Scenario,
};
use lhvout::bounds::{local_bound, out_bound, symmetrize, BellCoefficients};
use lhvout::fw::{fix_marginals, lmo, LmoMode};
use lhvout::model::{CorrModel, CorrStrategy};
use lhvout::verifier::reconstruct;
use lhvout::DEFAULT_TOL;

fn int_matrix() -> impl Strategy<Value = BellCoefficients> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-10i32..=10, m * n).prop_map(move |ints| {
            BellCoefficients::new(m, n, ints.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_ordered(m in int_matrix()) {
        let local = local_bound(&m).unwrap();
        let out = out_bound(&m).unwrap();
        prop_assert!(local <= out + 1e-12);
        prop_assert!(out <= m.abs_sum() + 1e-12);
    }

    #[test]
    fn symmetrized_identity(m in int_matrix()) {
        let sym = symmetrize(&m);
        let two_l = 2.0 * local_bound(&m).unwrap();
        prop_assert_eq!(out_bound(&sym).unwrap(), two_l);
        prop_assert_eq!(local_bound(&sym).unwrap(), two_l);
    }

    #[test]
    fn exact_lmo_value_equals_out_bound(m in int_matrix()) {
        let (value, strat) = lmo(
            m.entries(), m.m(), m.n(), LmoMode::Exact, 1, 0,
        ).unwrap();
        prop_assert!((value - out_bound(&m).unwrap()).abs() < 1e-9);
        let achieved: f64 = (0..m.m())
            .flat_map(|x| (0..m.n()).map(move |y| (x, y)))
            .map(|(x, y)| m.get(x, y) * strat.matrix_entry(x, y))
            .sum();
        prop_assert!((achieved - value).abs() < 1e-9);
    }

    #[test]
    fn sampled_behaviours_are_nonsignalling(
        mx in 1usize..=3, my in 1usize..=3, na in 2usize..=3, nb in 2usize..=3, seed in any::<u64>(),
    ) {
        let s = Scenario::new(mx, my, na, nb).unwrap();
        let b = random_nonsignalling(s, seed, false).unwrap();
        let (ok, violation) = b.is_nonsignalling(DEFAULT_TOL);
        prop_assert!(ok, "violation {violation}");
    }

    #[test]
    fn correlator_round_trip_is_identity(
        mx in 1usize..=3, my in 1usize..=3, seed in any::<u64>(),
    ) {
        let s = Scenario::new(mx, my, 2, 2).unwrap();
        let b = random_nonsignalling(s, seed, false).unwrap();
        let c = b.to_correlators(DEFAULT_TOL).unwrap();
        prop_assert!(c.min_expansion() > -1e-12);
        let back = from_correlators(&c).unwrap();
        for (p, q) in b.table().iter().zip(back.table()) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn antipodal_extension_always_passes_check(
        mx in 1usize..=3, my in 1usize..=2, nb in 2usize..=3, seed in any::<u64>(),
    ) {
        let s = Scenario::new(mx, my, 2, nb).unwrap();
        let b = random_nonsignalling(s, seed, false).unwrap();
        let ext = antipodal_extend(&b).unwrap();
        prop_assert!(check_antipodal(&ext).unwrap());
        prop_assert!(ext.is_nonsignalling(DEFAULT_TOL).0);
    }

    #[test]
    fn behaviour_file_round_trip(
        mx in 1usize..=3, my in 1usize..=3, na in 2usize..=3, nb in 2usize..=3, seed in any::<u64>(),
    ) {
        let s = Scenario::new(mx, my, na, nb).unwrap();
        let b = random_nonsignalling(s, seed, false).unwrap();
        let parsed = read_behaviour(&write_behaviour(&b)).unwrap();
        for (p, q) in b.table().iter().zip(parsed.table()) {
            prop_assert!((p - q).abs() < 1e-16);
        }
    }

    #[test]
    fn fixed_models_have_zero_marginals_and_kept_correlators(
        m in 1usize..=3, n in 1usize..=3, l in 1usize..=5, seed in any::<u64>(),
    ) {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut weights: Vec<f64> = (0..l).map(|_| rng.gen_range(0.01..1.0f64)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let strategies: Vec<CorrStrategy> = (0..l)
            .map(|_| {
                let mut flip = || if rng.gen::<bool>() { 1i8 } else { -1 };
                CorrStrategy {
                    a: (0..m).map(|_| flip()).collect(),
                    b_plus: (0..n).map(|_| flip()).collect(),
                    b_minus: (0..n).map(|_| flip()).collect(),
                }
            })
            .collect();
        let model = CorrModel::new(weights, strategies).unwrap();
        let fixed = fix_marginals(&model);
        let table = reconstruct(&fixed).unwrap();
        for v in table.alice_marginals.iter().chain(&table.bob_marginals) {
            prop_assert!(v.abs() <= 1e-12);
        }
        // Two-body correlators survive the doubling.
        let doubled_again = fix_marginals(&fixed);
        let again = reconstruct(&doubled_again).unwrap();
        for (a, b) in table.correlators.iter().zip(&again.correlators) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
