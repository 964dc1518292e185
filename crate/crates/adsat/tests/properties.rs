//! Property tests for the structural invariants: every generated instance
//! satisfies the graph constraints, frozen edges count the bits, balanced
//! starts respect the frozen mask, and the file formats round-trip.

use adsat::instance::{
    compute_frozen_mask, generate_random_instance, generate_regular_instance, AdsatInstance,
    EnsembleParams, NegationAssignment,
};
use adsat::satcore::{count_models, dpll_solve, CnfFormula, Lit};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_instances_satisfy_all_invariants(
        n in 6usize..=20,
        alpha_tenths in 10u32..=30,
        seed in 0u64..10_000,
    ) {
        let alpha = alpha_tenths as f64 / 10.0;
        let params = EnsembleParams::random(n, 3, alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = generate_random_instance(&params, &mut rng).unwrap();
        prop_assert_eq!(inst.n_clauses(), (alpha * n as f64).round() as usize);
        let mut sets = HashSet::new();
        for clause in inst.clauses() {
            prop_assert_eq!(clause.len(), 3);
            prop_assert!(clause.iter().all(|&b| (b as usize) < n));
            let mut key = clause.clone();
            key.sort_unstable();
            prop_assert!(key.windows(2).all(|w| w[0] != w[1]));
            prop_assert!(sets.insert(key));
        }
        // No isolated bits from the generator, so the frozen mask has
        // exactly one edge per bit.
        let frozen = compute_frozen_mask(&inst);
        prop_assert_eq!(frozen.iter().filter(|&&f| f).count(), n);
        let neg = NegationAssignment::zeros(&inst);
        prop_assert_eq!(neg.n_free(), inst.n_edges() - n);
    }

    #[test]
    fn regular_instances_have_degree_l(
        n in 6usize..=18,
        l in 2u32..=6,
        seed in 0u64..1_000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match generate_regular_instance(n, l, 3, &mut rng) {
            Ok(inst) => {
                prop_assert!(inst.degrees().iter().all(|&d| d == l));
                prop_assert_eq!(3 * inst.n_clauses(), l as usize * n);
            }
            Err(adsat::Error::InvalidParams(_)) => {
                prop_assert_ne!((l as usize * n) % 3, 0);
            }
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
        }
    }

    #[test]
    fn balanced_starts_are_legal_and_floored(
        n in 5usize..=16,
        seed in 0u64..5_000,
    ) {
        let params = EnsembleParams::random(n, 3, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = generate_random_instance(&params, &mut rng).unwrap();
        let neg = NegationAssignment::random_balanced(&inst, &mut rng);
        prop_assert!(neg.is_legal_for(&inst));
        let mut negated = vec![0usize; n];
        let degrees = inst.degrees();
        for (a, clause) in inst.clauses().iter().enumerate() {
            for (j, &b) in clause.iter().enumerate() {
                if neg.edge(inst.edge_index(a, j)) {
                    negated[b as usize] += 1;
                }
            }
        }
        for b in 0..n {
            prop_assert_eq!(negated[b], degrees[b] as usize / 2);
        }

        let alt = NegationAssignment::alternately_balanced(&inst);
        prop_assert!(alt.is_legal_for(&inst));
        // Restriction to any prefix matches direct computation.
        let m = inst.n_clauses();
        let cut = 1 + (seed as usize % m);
        let trunc = inst.truncated(cut);
        prop_assert_eq!(
            alt.restricted(&trunc),
            NegationAssignment::alternately_balanced(&trunc)
        );
    }

    #[test]
    fn instance_and_negation_files_round_trip(
        n in 5usize..=14,
        seed in 0u64..5_000,
    ) {
        let params = EnsembleParams::random(n, 3, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = generate_random_instance(&params, &mut rng).unwrap();
        let back = AdsatInstance::from_text(&inst.to_text()).unwrap();
        prop_assert_eq!(&back, &inst);
        let neg = NegationAssignment::random_balanced(&inst, &mut rng);
        let neg_back = NegationAssignment::from_text(&inst, &neg.to_text(&inst)).unwrap();
        prop_assert_eq!(neg_back, neg);
    }

    #[test]
    fn dimacs_round_trips_and_status_matches_count(
        n in 2usize..=9,
        m in 1usize..=20,
        seed in 0u64..5_000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let clauses: Vec<Vec<Lit>> = (0..m)
            .map(|_| {
                let width = 1 + rng.gen_range(0..3.min(n));
                rand::seq::index::sample(&mut rng, n, width)
                    .into_iter()
                    .map(|v| Lit { var: v as u32, negated: rng.gen() })
                    .collect()
            })
            .collect();
        let f = CnfFormula::new(n, clauses).unwrap();
        let back = CnfFormula::from_dimacs(&f.to_dimacs()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(dpll_solve(&f).is_sat(), !count_models(&f).is_zero());
    }
}
