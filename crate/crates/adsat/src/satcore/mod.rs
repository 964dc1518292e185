//! Concrete K-SAT formulas with fixed negations: materialization from an
//! instance/negation pair, DPLL satisfiability, exact model counting, and
//! the per-bit complexity cost driving the annealing.

mod dimacs;
mod engine;
mod subcube;

pub use engine::{CountOptions, DpllSolver, ModelCounter};
pub use subcube::SubcubeCounter;

use crate::instance::{AdsatInstance, NegationAssignment};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// A literal: a variable index plus whether it appears negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: u32,
    pub negated: bool,
}

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit {
            var,
            negated: false,
        }
    }

    pub fn neg(var: u32) -> Lit {
        Lit { var, negated: true }
    }

    /// True under the given assignment of its variable.
    pub fn satisfied_by(&self, value: bool) -> bool {
        value != self.negated
    }
}

/// A CNF formula over `n_vars` variables. Clauses never repeat a variable;
/// widths may vary (K = 1 units and K = 2 both occur in tests and in the
/// 2-AdSAT machinery).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::InvalidParams(format!("clause {i} is empty")));
            }
            let mut vars: Vec<u32> = clause.iter().map(|l| l.var).collect();
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!(
                    "clause {i} repeats a variable"
                )));
            }
            if vars.last().is_some_and(|&v| v as usize >= n_vars) {
                return Err(Error::InvalidParams(format!(
                    "clause {i} references a variable outside [0, {n_vars})"
                )));
            }
        }
        Ok(CnfFormula { n_vars, clauses })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.satisfied_by(assignment[l.var as usize])))
    }

    /// Flips the polarity of one literal in place; used by the complete
    /// decider to walk Gray-coded negation space without rebuilding.
    pub(crate) fn flip_polarity(&mut self, clause: usize, slot: usize) {
        let lit = &mut self.clauses[clause][slot];
        lit.negated = !lit.negated;
    }

    /// DIMACS CNF serialization (`p cnf N M` header, 0-terminated lines).
    pub fn to_dimacs(&self) -> String {
        dimacs::to_dimacs(self)
    }

    /// Parses DIMACS CNF; `c` comment lines are allowed before and between
    /// clauses, clauses may span lines and are 0-terminated.
    pub fn from_dimacs(text: &str) -> Result<CnfFormula> {
        dimacs::from_dimacs(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
}

/// Outcome of a satisfiability decision; the witness is present exactly
/// for SAT and is verified against the formula before being returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    pub witness: Option<Vec<bool>>,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.status == SatStatus::Sat
    }
}

/// Builds the concrete formula for one negation choice: clause `a`, slot
/// `j` contributes a literal on bit `x_aj`, negated exactly when the edge
/// carries a 1.
pub fn materialize(inst: &AdsatInstance, neg: &NegationAssignment) -> CnfFormula {
    assert_eq!(
        neg.n_edges(),
        inst.n_edges(),
        "negation assignment does not match instance shape"
    );
    let clauses = inst
        .clauses()
        .iter()
        .enumerate()
        .map(|(a, clause)| {
            clause
                .iter()
                .enumerate()
                .map(|(j, &b)| Lit {
                    var: b,
                    negated: neg.edge(inst.edge_index(a, j)),
                })
                .collect()
        })
        .collect();
    CnfFormula {
        n_vars: inst.n_bits(),
        clauses,
    }
}

/// Complete DPLL decision with unit propagation and pure-literal
/// elimination; branching picks the most frequent unassigned variable,
/// ties broken by lowest index.
pub fn dpll_solve(f: &CnfFormula) -> SatResult {
    let mut engine = engine::SearchEngine::new();
    engine.solve(f)
}

/// Exact number of satisfying assignments over all `n_vars` variables;
/// variables absent from every clause contribute a factor 2 each.
pub fn count_models(f: &CnfFormula) -> BigUint {
    ModelCounter::new()
        .count(f)
        .expect("unbudgeted count cannot fail")
}

/// Like [`count_models`] but aborts with a budget error once the search
/// has expanded more than `budget` nodes. Never returns a wrong count.
pub fn count_models_with_budget(f: &CnfFormula, budget: u64) -> Result<BigUint> {
    ModelCounter::with_options(CountOptions {
        node_budget: Some(budget),
        ..CountOptions::default()
    })
    .count(f)
}

/// Per-bit complexity of the exact count: log2(S + 1) / N. Zero exactly
/// when the formula is UNSAT; the S = 0 test is done on the integer, never
/// on the float.
pub fn complexity(inst: &AdsatInstance, neg: &NegationAssignment) -> f64 {
    let f = materialize(inst, neg);
    sigma_from_count(&count_models(&f), inst.n_bits())
}

pub fn sigma_from_count(count: &BigUint, n_bits: usize) -> f64 {
    if count.is_zero() {
        return 0.0;
    }
    let s_plus_one = count + 1u32;
    let log2 = s_plus_one
        .to_f64()
        .map(f64::log2)
        .unwrap_or_else(|| s_plus_one.bits() as f64);
    log2 / n_bits as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random_instance, EnsembleKind, EnsembleParams};
    use num_traits::One;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Brute-force model count over all 2^n assignments, with its own
    /// clause evaluation loop; the independent oracle for the DPLL paths.
    fn brute_force_count(f: &CnfFormula) -> u64 {
        assert!(f.n_vars() <= 22);
        let mut count = 0;
        for word in 0u64..(1 << f.n_vars()) {
            let ok = f.clauses().iter().all(|clause| {
                clause
                    .iter()
                    .any(|l| ((word >> l.var) & 1 == 1) != l.negated)
            });
            if ok {
                count += 1;
            }
        }
        count
    }

    fn random_formula(n: usize, m: usize, k: usize, rng: &mut impl Rng) -> CnfFormula {
        let clauses = (0..m)
            .map(|_| {
                rand::seq::index::sample(rng, n, k)
                    .into_iter()
                    .map(|v| Lit {
                        var: v as u32,
                        negated: rng.gen(),
                    })
                    .collect()
            })
            .collect();
        CnfFormula::new(n, clauses).unwrap()
    }

    #[test]
    fn materialize_worked_example() {
        // Clause on bits (3, 5, 8) with negations (0, 1, 0) reads
        // x3 OR not-x5 OR x8. Bit 5 must occur earlier so its edge in the
        // second clause is free to carry the 1.
        let inst = AdsatInstance::new(
            9,
            3,
            vec![vec![5, 0, 1], vec![3, 5, 8]],
            EnsembleKind::RandomUniform,
        )
        .unwrap();
        let mut bits = vec![false; inst.n_edges()];
        bits[inst.edge_index(1, 1)] = true;
        let neg = NegationAssignment::from_bits(&inst, bits).unwrap();
        let f = materialize(&inst, &neg);
        assert_eq!(f.clauses()[1], vec![Lit::pos(3), Lit::neg(5), Lit::pos(8)]);

        let mut x = [false; 9];
        assert!(f.clauses()[1].iter().any(|l| l.satisfied_by(x[l.var as usize])));
        x[5] = true;
        assert!(!f.clauses()[1].iter().any(|l| l.satisfied_by(x[l.var as usize])));
        x[3] = true;
        assert!(f.clauses()[1].iter().any(|l| l.satisfied_by(x[l.var as usize])));
    }

    #[test]
    fn all_zero_negations_satisfied_by_all_ones() {
        let inst = generate_random_instance(&EnsembleParams::random(9, 3, 2.0), &mut rng(1))
            .unwrap();
        let f = materialize(&inst, &NegationAssignment::zeros(&inst));
        assert!(f.evaluate(&[true; 9]));
        let res = dpll_solve(&f);
        assert!(res.is_sat());
    }

    #[test]
    fn flipping_one_negation_flips_one_literal() {
        let inst = generate_random_instance(&EnsembleParams::random(9, 3, 2.0), &mut rng(2))
            .unwrap();
        let mut neg = NegationAssignment::zeros(&inst);
        let before = materialize(&inst, &neg);
        let free = neg.free_edges();
        let e = free[3];
        neg.flip(e);
        let after = materialize(&inst, &neg);
        let mut diffs = 0;
        for (ca, cb) in before.clauses().iter().zip(after.clauses()) {
            for (la, lb) in ca.iter().zip(cb) {
                assert_eq!(la.var, lb.var);
                if la.negated != lb.negated {
                    diffs += 1;
                }
            }
        }
        assert_eq!(diffs, 1);
    }

    #[test]
    fn unit_contradiction_is_unsat() {
        let f = CnfFormula::new(1, vec![vec![Lit::pos(0)], vec![Lit::neg(0)]]).unwrap();
        let res = dpll_solve(&f);
        assert_eq!(res.status, SatStatus::Unsat);
        assert!(res.witness.is_none());
        assert!(count_models(&f).is_zero());
    }

    #[test]
    fn solver_and_counter_match_brute_force() {
        for trial in 0..200 {
            let mut r = rng(1000 + trial);
            let n = 4 + (trial as usize % 11);
            let m = 1 + (trial as usize * 7) % (3 * n);
            let f = random_formula(n, m, 3.min(n), &mut r);
            let expect = brute_force_count(&f);
            assert_eq!(count_models(&f), BigUint::from(expect), "trial {trial}");
            let res = dpll_solve(&f);
            assert_eq!(res.is_sat(), expect > 0, "trial {trial}");
            if let Some(w) = res.witness {
                assert!(f.evaluate(&w));
            }
        }
    }

    #[test]
    fn counter_with_and_without_decomposition_agree() {
        for trial in 0..60 {
            let mut r = rng(5000 + trial);
            let f = random_formula(12, 14, 3, &mut r);
            let plain = ModelCounter::with_options(CountOptions {
                decompose: false,
                ..CountOptions::default()
            })
            .count(&f)
            .unwrap();
            assert_eq!(count_models(&f), plain);
        }
    }

    #[test]
    fn empty_formula_counts_all_assignments() {
        let f = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(count_models(&f), BigUint::from(8u32));
    }

    #[test]
    fn two_literal_clause_count() {
        let f = CnfFormula::new(2, vec![vec![Lit::pos(0), Lit::pos(1)]]).unwrap();
        assert_eq!(count_models(&f), BigUint::from(3u32));
    }

    #[test]
    fn count_invariant_under_reordering_and_relabeling() {
        let mut r = rng(77);
        let f = random_formula(10, 18, 3, &mut r);
        let base = count_models(&f);
        for _ in 0..10 {
            let mut clauses = f.clauses().to_vec();
            use rand::seq::SliceRandom;
            clauses.shuffle(&mut r);
            let mut perm: Vec<u32> = (0..10).collect();
            perm.shuffle(&mut r);
            for clause in &mut clauses {
                for lit in clause.iter_mut() {
                    lit.var = perm[lit.var as usize];
                }
            }
            let g = CnfFormula::new(10, clauses).unwrap();
            assert_eq!(count_models(&g), base);
        }
    }

    #[test]
    fn budget_error_instead_of_wrong_count() {
        let mut r = rng(88);
        let f = random_formula(14, 30, 3, &mut r);
        match count_models_with_budget(&f, 2) {
            Err(Error::BudgetExceeded { budget }) => assert_eq!(budget, 2),
            other => panic!("expected budget error, got {other:?}"),
        }
        let full = count_models_with_budget(&f, u64::MAX).unwrap();
        assert_eq!(full, count_models(&f));
    }

    #[test]
    fn sigma_arithmetic() {
        // UNSAT => exactly zero.
        assert_eq!(sigma_from_count(&BigUint::zero(), 10), 0.0);
        // S = 7, N = 3: log2(8)/3 = 1.
        assert!((sigma_from_count(&BigUint::from(7u32), 3) - 1.0).abs() < 1e-12);
        // M = 0, N = 10: S = 2^10, sigma = log2(1025)/10.
        let inst = AdsatInstance::from_text("adsat 10 0 3 random\n").unwrap();
        let sigma = complexity(&inst, &NegationAssignment::zeros(&inst));
        assert!((sigma - (1025f64).log2() / 10.0).abs() < 1e-12);
        assert!((sigma - 1.000140819439281).abs() < 1e-12);
        // Huge counts stay finite; 2^150 + 1 rounds to 2^150 in f64, so
        // sigma lands on exactly 1.
        let big = BigUint::one() << 150;
        let s = sigma_from_count(&big, 150);
        assert!(s >= 1.0 && s.is_finite());
        assert!(sigma_from_count(&(big - 1u32), 150) < 1.0 + 1e-9);
    }

    #[test]
    fn sat_iff_positive_count() {
        for trial in 0..40 {
            let mut r = rng(9000 + trial);
            let f = random_formula(9, 1 + (trial as usize % 30), 3, &mut r);
            assert_eq!(dpll_solve(&f).is_sat(), !count_models(&f).is_zero());
        }
    }

    #[test]
    fn complexity_monotone_under_clause_addition() {
        let mut r = rng(321);
        let inst = generate_random_instance(&EnsembleParams::random(10, 3, 2.5), &mut r).unwrap();
        let neg = NegationAssignment::alternately_balanced(&inst);
        let mut prev = f64::INFINITY;
        for m in 1..=inst.n_clauses() {
            let trunc = inst.truncated(m);
            let sigma = complexity(&trunc, &neg.restricted(&trunc));
            assert!(sigma <= prev + 1e-12, "sigma grew when adding clause {m}");
            prev = sigma;
        }
    }
}
