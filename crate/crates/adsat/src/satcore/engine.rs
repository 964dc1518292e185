//! Backtracking search shared by the satisfiability decision and the
//! exact model counter.
//!
//! Both walk the same counter-based clause state: per clause the number
//! of unassigned literals and the number of satisfied literals, with unit
//! propagation triggered whenever an unsatisfied clause drops to one
//! unassigned literal. The decision path additionally eliminates pure
//! literals; the counting path never does (it must see both polarities)
//! and instead multiplies out variables that fall out of all active
//! clauses, optionally splitting the residual formula into independent
//! connected components.

use super::{CnfFormula, SatResult, SatStatus};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Knobs for exact counting.
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    /// Abort with [`Error::BudgetExceeded`] after expanding this many
    /// search nodes. `None` runs to completion.
    pub node_budget: Option<u64>,
    /// Split the residual formula into connected components and multiply
    /// their counts. Identical results either way; splitting is what makes
    /// large sparse formulas countable.
    pub decompose: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            node_budget: None,
            decompose: true,
        }
    }
}

/// Reusable exact model counter; buffers survive across `count` calls so
/// per-call setup does not allocate in steady state.
pub struct ModelCounter {
    engine: SearchEngine,
}

impl ModelCounter {
    pub fn new() -> Self {
        ModelCounter {
            engine: SearchEngine::new(),
        }
    }

    pub fn with_options(options: CountOptions) -> Self {
        let mut engine = SearchEngine::new();
        engine.options = options;
        ModelCounter { engine }
    }

    /// Exact number of satisfying assignments of `f` over all its
    /// variables.
    pub fn count(&mut self, f: &CnfFormula) -> Result<BigUint> {
        self.engine.count(f)
    }

    /// Search nodes expanded by the last call.
    pub fn last_nodes(&self) -> u64 {
        self.engine.nodes
    }
}

impl Default for ModelCounter {
    fn default() -> Self {
        ModelCounter::new()
    }
}

/// Reusable DPLL solver; same buffer-reuse story as [`ModelCounter`] for
/// callers that decide millions of closely related formulas.
pub struct DpllSolver {
    engine: SearchEngine,
}

impl DpllSolver {
    pub fn new() -> Self {
        DpllSolver {
            engine: SearchEngine::new(),
        }
    }

    pub fn solve(&mut self, f: &CnfFormula) -> SatResult {
        self.engine.solve(f)
    }
}

impl Default for DpllSolver {
    fn default() -> Self {
        DpllSolver::new()
    }
}

const UNASSIGNED: i8 = -1;

pub(crate) struct SearchEngine {
    options: CountOptions,
    n_vars: usize,
    n_clauses: usize,
    // Flattened formula: literal (var, negated) runs per clause.
    lits: Vec<(u32, bool)>,
    clause_start: Vec<u32>,
    // Per variable: (clause, negated) occurrences.
    occ: Vec<Vec<(u32, bool)>>,
    assign: Vec<i8>,
    unassigned_in: Vec<u32>,
    sat_lits_in: Vec<u32>,
    active: usize,
    trail: Vec<u32>,
    queue: Vec<(u32, bool)>,
    // Scratch for tallies and component marking.
    tally: Vec<u32>,
    tally_neg: Vec<u32>,
    touched: Vec<u32>,
    uf_parent: Vec<u32>,
    stamp_of: Vec<u32>,
    stamp: u32,
    nodes: u64,
}

impl SearchEngine {
    pub(crate) fn new() -> Self {
        SearchEngine {
            options: CountOptions::default(),
            n_vars: 0,
            n_clauses: 0,
            lits: Vec::new(),
            clause_start: Vec::new(),
            occ: Vec::new(),
            assign: Vec::new(),
            unassigned_in: Vec::new(),
            sat_lits_in: Vec::new(),
            active: 0,
            trail: Vec::new(),
            queue: Vec::new(),
            tally: Vec::new(),
            tally_neg: Vec::new(),
            touched: Vec::new(),
            uf_parent: Vec::new(),
            stamp_of: Vec::new(),
            stamp: 0,
            nodes: 0,
        }
    }

    fn load(&mut self, f: &CnfFormula) {
        self.n_vars = f.n_vars();
        self.n_clauses = f.n_clauses();
        self.lits.clear();
        self.clause_start.clear();
        self.clause_start.push(0);
        for clause in f.clauses() {
            for lit in clause {
                self.lits.push((lit.var, lit.negated));
            }
            self.clause_start.push(self.lits.len() as u32);
        }
        self.occ.iter_mut().for_each(Vec::clear);
        if self.occ.len() < self.n_vars {
            self.occ.resize(self.n_vars, Vec::new());
        }
        for (c, clause) in f.clauses().iter().enumerate() {
            for lit in clause {
                self.occ[lit.var as usize].push((c as u32, lit.negated));
            }
        }
        self.assign.clear();
        self.assign.resize(self.n_vars, UNASSIGNED);
        self.unassigned_in.clear();
        self.sat_lits_in.clear();
        for clause in f.clauses() {
            self.unassigned_in.push(clause.len() as u32);
            self.sat_lits_in.push(0);
        }
        self.active = self.n_clauses;
        self.trail.clear();
        self.queue.clear();
        self.tally.clear();
        self.tally.resize(self.n_vars, 0);
        self.tally_neg.clear();
        self.tally_neg.resize(self.n_vars, 0);
        self.uf_parent.clear();
        self.uf_parent.resize(self.n_vars, 0);
        self.stamp_of.clear();
        self.stamp_of.resize(self.n_vars, 0);
        self.stamp = 0;
        self.nodes = 0;
    }

    fn clause_lits(&self, c: u32) -> &[(u32, bool)] {
        let lo = self.clause_start[c as usize] as usize;
        let hi = self.clause_start[c as usize + 1] as usize;
        &self.lits[lo..hi]
    }

    /// Applies every queued assignment plus the units they imply. Returns
    /// false on conflict; either way all per-variable updates are complete,
    /// so `undo_to` restores any watermark exactly.
    fn propagate(&mut self) -> bool {
        let mut ok = true;
        while let Some((v, val)) = self.queue.pop() {
            let vu = v as usize;
            match self.assign[vu] {
                UNASSIGNED => {}
                a => {
                    if (a == 1) != val {
                        ok = false;
                    }
                    continue;
                }
            }
            if !ok {
                continue;
            }
            self.assign[vu] = val as i8;
            self.trail.push(v);
            for i in 0..self.occ[vu].len() {
                let (c, negated) = self.occ[vu][i];
                let cu = c as usize;
                self.unassigned_in[cu] -= 1;
                if val != negated {
                    // Literal became true.
                    if self.sat_lits_in[cu] == 0 {
                        self.active -= 1;
                    }
                    self.sat_lits_in[cu] += 1;
                } else if self.sat_lits_in[cu] == 0 {
                    match self.unassigned_in[cu] {
                        0 => ok = false,
                        1 => {
                            let unit = self
                                .clause_lits(c)
                                .iter()
                                .copied()
                                .find(|&(w, _)| self.assign[w as usize] == UNASSIGNED);
                            if let Some((uv, uneg)) = unit {
                                self.queue.push((uv, !uneg));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        self.queue.clear();
        ok
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let vu = v as usize;
            let val = self.assign[vu] == 1;
            for i in 0..self.occ[vu].len() {
                let (c, negated) = self.occ[vu][i];
                let cu = c as usize;
                self.unassigned_in[cu] += 1;
                if val != negated {
                    self.sat_lits_in[cu] -= 1;
                    if self.sat_lits_in[cu] == 0 {
                        self.active += 1;
                    }
                }
            }
            self.assign[vu] = UNASSIGNED;
        }
    }

    fn enqueue_initial_units(&mut self) {
        for c in 0..self.n_clauses as u32 {
            let unit = {
                let lits = self.clause_lits(c);
                if lits.len() == 1 {
                    Some(lits[0])
                } else {
                    None
                }
            };
            if let Some((v, negated)) = unit {
                self.queue.push((v, !negated));
            }
        }
    }

    // ------------------------------------------------------------------
    // Satisfiability decision
    // ------------------------------------------------------------------

    pub(crate) fn solve(&mut self, f: &CnfFormula) -> SatResult {
        self.load(f);
        self.enqueue_initial_units();
        let sat = self.propagate() && self.solve_rec();
        if !sat {
            return SatResult {
                status: SatStatus::Unsat,
                witness: None,
            };
        }
        let witness: Vec<bool> = self.assign.iter().map(|&a| a == 1).collect();
        assert!(f.evaluate(&witness), "witness failed verification");
        SatResult {
            status: SatStatus::Sat,
            witness: Some(witness),
        }
    }

    fn solve_rec(&mut self) -> bool {
        if self.active == 0 {
            return true;
        }
        let mark = self.trail.len();
        if self.assign_pure_literals() {
            if self.propagate() && self.solve_rec() {
                return true;
            }
            self.undo_to(mark);
            return false;
        }
        let v = self.pick_branch_var();
        for val in [true, false] {
            self.queue.push((v, val));
            if self.propagate() && self.solve_rec() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }

    /// Queues every pure literal of the active subformula with its
    /// satisfying polarity; returns whether any were found. Sound for the
    /// decision only, never used while counting.
    fn assign_pure_literals(&mut self) -> bool {
        self.scan_active_tallies();
        let mut any = false;
        for i in 0..self.touched.len() {
            let v = self.touched[i];
            let vu = v as usize;
            let (pos, neg) = (self.tally[vu], self.tally_neg[vu]);
            if pos > 0 && neg == 0 {
                self.queue.push((v, true));
                any = true;
            } else if neg > 0 && pos == 0 {
                self.queue.push((v, false));
                any = true;
            }
        }
        any
    }

    /// Most frequent unassigned variable over the active clauses, ties to
    /// the lowest index.
    fn pick_branch_var(&mut self) -> u32 {
        self.scan_active_tallies();
        let mut best_v = u32::MAX;
        let mut best_count = 0u32;
        for &v in &self.touched {
            let vu = v as usize;
            let count = self.tally[vu] + self.tally_neg[vu];
            if count > best_count || (count == best_count && v < best_v) {
                best_count = count;
                best_v = v;
            }
        }
        debug_assert_ne!(best_v, u32::MAX, "no branch variable in active formula");
        best_v
    }

    fn scan_active_tallies(&mut self) {
        for &v in &self.touched {
            self.tally[v as usize] = 0;
            self.tally_neg[v as usize] = 0;
        }
        self.touched.clear();
        for c in 0..self.n_clauses {
            if self.sat_lits_in[c] != 0 {
                continue;
            }
            let lo = self.clause_start[c] as usize;
            let hi = self.clause_start[c + 1] as usize;
            for idx in lo..hi {
                let (v, negated) = self.lits[idx];
                let vu = v as usize;
                if self.assign[vu] != UNASSIGNED {
                    continue;
                }
                if self.tally[vu] == 0 && self.tally_neg[vu] == 0 {
                    self.touched.push(v);
                }
                if negated {
                    self.tally_neg[vu] += 1;
                } else {
                    self.tally[vu] += 1;
                }
            }
        }
        self.touched.sort_unstable();
    }

    // ------------------------------------------------------------------
    // Exact counting
    // ------------------------------------------------------------------

    pub(crate) fn count(&mut self, f: &CnfFormula) -> Result<BigUint> {
        self.load(f);
        self.enqueue_initial_units();
        if !self.propagate() {
            return Ok(BigUint::zero());
        }
        let active: Vec<u32> = (0..self.n_clauses as u32)
            .filter(|&c| self.sat_lits_in[c as usize] == 0)
            .collect();
        let in_active = self.count_vars_in(&active);
        let free = self.n_vars - self.trail.len() - in_active;
        let counted = self.count_rec(&active)?;
        Ok(counted << free)
    }

    /// Number of models over exactly the unassigned variables occurring in
    /// `active`; all other variables are someone else's to multiply.
    fn count_rec(&mut self, active: &[u32]) -> Result<BigUint> {
        self.nodes += 1;
        if let Some(budget) = self.options.node_budget {
            if self.nodes > budget {
                return Err(Error::BudgetExceeded { budget });
            }
        }
        if active.is_empty() {
            return Ok(BigUint::one());
        }
        // Splitting tiny residuals costs more than the branching it saves.
        if self.options.decompose && active.len() > 6 {
            if let Some(parts) = self.split_components(active) {
                let mut product = BigUint::one();
                for part in parts {
                    product *= self.count_rec(&part)?;
                    if product.is_zero() {
                        return Ok(product);
                    }
                }
                return Ok(product);
            }
        }
        let v = self.pick_branch_var_in(active);
        let n_vars_here = self.count_vars_in(active);
        let mut total = BigUint::zero();
        for val in [true, false] {
            let mark = self.trail.len();
            self.queue.push((v, val));
            if self.propagate() {
                let sub: Vec<u32> = active
                    .iter()
                    .copied()
                    .filter(|&c| self.sat_lits_in[c as usize] == 0)
                    .collect();
                let assigned_here = self.trail.len() - mark;
                let sub_vars = self.count_vars_in(&sub);
                // Variables of this residual that got neither assigned nor
                // constrained: unconstrained, worth a factor 2 each.
                let free = n_vars_here - assigned_here - sub_vars;
                total += self.count_rec(&sub)? << free;
            }
            self.undo_to(mark);
        }
        Ok(total)
    }

    /// Distinct unassigned variables among the given clauses (stamp-based,
    /// no allocation).
    fn count_vars_in(&mut self, active: &[u32]) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut n = 0;
        for &c in active {
            let lo = self.clause_start[c as usize] as usize;
            let hi = self.clause_start[c as usize + 1] as usize;
            for idx in lo..hi {
                let (v, _) = self.lits[idx];
                let vu = v as usize;
                if self.assign[vu] == UNASSIGNED && self.stamp_of[vu] != stamp {
                    self.stamp_of[vu] = stamp;
                    n += 1;
                }
            }
        }
        n
    }

    /// Branch variable for counting: most occurrences within the
    /// shortest active clauses (ties to the lowest index), which drives
    /// the residual toward units and conflicts fastest.
    fn pick_branch_var_in(&mut self, active: &[u32]) -> u32 {
        let mut min_width = u32::MAX;
        for &c in active {
            min_width = min_width.min(self.unassigned_in[c as usize]);
        }
        for &v in &self.touched {
            self.tally[v as usize] = 0;
        }
        self.touched.clear();
        for &c in active {
            if self.unassigned_in[c as usize] != min_width {
                continue;
            }
            let lo = self.clause_start[c as usize] as usize;
            let hi = self.clause_start[c as usize + 1] as usize;
            for idx in lo..hi {
                let (v, _) = self.lits[idx];
                let vu = v as usize;
                if self.assign[vu] != UNASSIGNED {
                    continue;
                }
                if self.tally[vu] == 0 {
                    self.touched.push(v);
                }
                self.tally[vu] += 1;
            }
        }
        let mut best_v = u32::MAX;
        let mut best_count = 0u32;
        for &v in &self.touched {
            let count = self.tally[v as usize];
            if count > best_count || (count == best_count && v < best_v) {
                best_count = count;
                best_v = v;
            }
        }
        debug_assert_ne!(best_v, u32::MAX);
        best_v
    }

    /// Splits `active` into connected components over shared unassigned
    /// variables. Returns `None` when it is all one component. Component
    /// order follows the smallest clause index, keeping node counts
    /// deterministic.
    fn split_components(&mut self, active: &[u32]) -> Option<Vec<Vec<u32>>> {
        // Union-find keyed by variable; each clause links its unassigned
        // vars in a chain.
        for &c in active {
            let lo = self.clause_start[c as usize] as usize;
            let hi = self.clause_start[c as usize + 1] as usize;
            for idx in lo..hi {
                let (v, _) = self.lits[idx];
                if self.assign[v as usize] == UNASSIGNED {
                    self.uf_parent[v as usize] = v;
                }
            }
        }
        fn find(parent: &mut [u32], mut v: u32) -> u32 {
            while parent[v as usize] != v {
                parent[v as usize] = parent[parent[v as usize] as usize];
                v = parent[v as usize];
            }
            v
        }
        for &c in active {
            let lo = self.clause_start[c as usize] as usize;
            let hi = self.clause_start[c as usize + 1] as usize;
            let mut prev: Option<u32> = None;
            for idx in lo..hi {
                let (v, _) = self.lits[idx];
                if self.assign[v as usize] != UNASSIGNED {
                    continue;
                }
                if let Some(p) = prev {
                    let ra = find(&mut self.uf_parent, p);
                    let rb = find(&mut self.uf_parent, v);
                    if ra != rb {
                        self.uf_parent[rb as usize] = ra;
                    }
                }
                prev = Some(v);
            }
        }
        let mut roots: Vec<u32> = Vec::new();
        let mut parts: Vec<Vec<u32>> = Vec::new();
        for &c in active {
            let lo = self.clause_start[c as usize] as usize;
            let first = (lo..self.clause_start[c as usize + 1] as usize)
                .map(|idx| self.lits[idx].0)
                .find(|&v| self.assign[v as usize] == UNASSIGNED)
                .expect("active clause with no unassigned variable");
            let root = find(&mut self.uf_parent, first);
            match roots.iter().position(|&r| r == root) {
                Some(i) => parts[i].push(c),
                None => {
                    roots.push(root);
                    parts.push(vec![c]);
                }
            }
        }
        if parts.len() > 1 {
            Some(parts)
        } else {
            None
        }
    }
}
