//! Incremental exact counting for small N.
//!
//! A clause with fixed negations is violated by exactly the assignments
//! agreeing with its negation pattern on its K bits: a subcube of
//! dimension N - K. Keeping, for every one of the 2^N assignments, the
//! number of clauses it violates makes single-negation flips cheap: move
//! one clause's subcube (2^(N-K) decrements plus increments) and track how
//! many assignments have zero violations. That tally is the exact model
//! count, updated in O(2^(N-K)) per flip instead of a fresh search.
//!
//! This is the incremental evaluator behind the Gray-code walk of the
//! complete decider and the annealing moves at small N; `count_models`
//! stays an independent search-based counter and the two are
//! cross-checked in tests.

use crate::instance::{AdsatInstance, NegationAssignment};

/// Hard size limit: counts array is 2^N u16 entries.
const MAX_BITS: usize = 26;

/// Violation-count table over all 2^N assignments for one instance with a
/// mutable negation configuration.
pub struct SubcubeCounter {
    n_bits: usize,
    counts: Vec<u16>,
    satisfying: u64,
    /// Per clause: the violated-subcube anchor (bit b set to the edge's
    /// negation value on the clause's bits),
    bases: Vec<u32>,
    /// and the enumeration mask over the other N - K bits.
    free_masks: Vec<u32>,
}

impl SubcubeCounter {
    /// Whether the incremental table beats a per-step DPLL count: the
    /// update touches 2^(N-K+1) entries, a count is worth roughly 2^13
    /// simple operations.
    pub fn profitable_for_counting(n_bits: usize, k: usize) -> bool {
        n_bits <= 20 && n_bits.saturating_sub(k) <= 12
    }

    /// Whether it beats a per-config DPLL satisfiability decision (worth
    /// roughly 2^10 operations) in the complete decider's Gray walk.
    pub fn profitable_for_deciding(n_bits: usize, k: usize) -> bool {
        n_bits <= 20 && n_bits.saturating_sub(k) <= 9
    }

    pub fn new(inst: &AdsatInstance, neg: &NegationAssignment) -> SubcubeCounter {
        let n_bits = inst.n_bits();
        assert!(n_bits <= MAX_BITS, "subcube counter limited to N <= {MAX_BITS}");
        assert!(inst.n_clauses() < u16::MAX as usize);
        let full = ((1u64 << n_bits) - 1) as u32;
        let mut counter = SubcubeCounter {
            n_bits,
            counts: vec![0; 1 << n_bits],
            satisfying: 1 << n_bits,
            bases: Vec::with_capacity(inst.n_clauses()),
            free_masks: Vec::with_capacity(inst.n_clauses()),
        };
        for (a, clause) in inst.clauses().iter().enumerate() {
            let mut base = 0u32;
            let mut clause_mask = 0u32;
            for (j, &b) in clause.iter().enumerate() {
                clause_mask |= 1 << b;
                if neg.edge(inst.edge_index(a, j)) {
                    base |= 1 << b;
                }
            }
            counter.bases.push(base);
            counter.free_masks.push(full & !clause_mask);
            counter.shift_subcube(a, 1);
        }
        counter
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Exact number of satisfying assignments of the current
    /// configuration.
    pub fn count(&self) -> u64 {
        self.satisfying
    }

    pub fn is_unsat(&self) -> bool {
        self.satisfying == 0
    }

    /// Applies one negation flip: edge (clause `a`, slot `j`) now carries
    /// `value`, so clause `a`'s violated subcube moves to the other side
    /// of that bit's hyperplane.
    pub fn flip_edge(&mut self, inst: &AdsatInstance, a: usize, j: usize, value: bool) {
        let bit = 1u32 << inst.clauses()[a][j];
        debug_assert_ne!(self.bases[a] & bit != 0, value, "flip must change the edge");
        self.shift_subcube(a, -1);
        if value {
            self.bases[a] |= bit;
        } else {
            self.bases[a] &= !bit;
        }
        self.shift_subcube(a, 1);
    }

    /// Adds (`delta` = 1) or removes (-1) clause `a`'s violated subcube
    /// from the table, maintaining the satisfying-assignment tally. The
    /// loop is the hot path of the Gray-code walk; the tally updates are
    /// branchless and the index is in range by construction
    /// (`base | s < 2^N` because both operands are).
    fn shift_subcube(&mut self, a: usize, delta: i32) {
        let base = self.bases[a];
        let mask = self.free_masks[a];
        let counts = self.counts.as_mut_slice();
        let mut satisfying = self.satisfying;
        let mut s = 0u32;
        if delta > 0 {
            loop {
                let idx = (base | s) as usize;
                debug_assert!(idx < counts.len());
                let c = unsafe { counts.get_unchecked_mut(idx) };
                satisfying -= u64::from(*c == 0);
                *c += 1;
                s = s.wrapping_sub(mask) & mask;
                if s == 0 {
                    break;
                }
            }
        } else {
            loop {
                let idx = (base | s) as usize;
                debug_assert!(idx < counts.len());
                let c = unsafe { counts.get_unchecked_mut(idx) };
                *c -= 1;
                satisfying += u64::from(*c == 0);
                s = s.wrapping_sub(mask) & mask;
                if s == 0 {
                    break;
                }
            }
        }
        self.satisfying = satisfying;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random_instance, EnsembleParams};
    use crate::satcore::{count_models, materialize};
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tracks_search_counter_across_random_flips() {
        for seed in 0..15u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5 + (seed as usize % 6);
            let inst =
                generate_random_instance(&EnsembleParams::random(n, 3, 2.0), &mut rng).unwrap();
            let mut neg = NegationAssignment::zeros(&inst);
            let mut counter = SubcubeCounter::new(&inst, &neg);
            let free = neg.free_edges();
            for _ in 0..60 {
                let e = free[rng.gen_range(0..free.len())];
                neg.flip(e);
                counter.flip_edge(&inst, e / inst.k(), e % inst.k(), neg.edge(e));
                let expect = count_models(&materialize(&inst, &neg))
                    .to_u64()
                    .unwrap();
                assert_eq!(counter.count(), expect, "seed {seed}");
            }
        }
    }

    #[test]
    fn empty_instance_counts_everything() {
        let inst = AdsatInstance::from_text("adsat 5 0 3 random\n").unwrap();
        let neg = NegationAssignment::zeros(&inst);
        let counter = SubcubeCounter::new(&inst, &neg);
        assert_eq!(counter.count(), 32);
    }
}
