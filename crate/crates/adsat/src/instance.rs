//! AdSAT instances: the bipartite clause/variable graph, negation
//! assignments on its edges, and the generators for the random-uniform and
//! L-regular ensembles.
//!
//! An instance fixes only *which* bit sits in which clause slot. Negations
//! are a separate boolean attribute per (clause, slot) edge, held by
//! [`NegationAssignment`] together with the frozen mask: the first
//! occurrence of every bit may be pinned to "not negated" without loss of
//! generality, so the adversary's effective search space has `K*M - N`
//! bits.

use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashSet;
use std::fmt::Write as _;

/// Attempt cap for all rejection-sampling loops, so infeasible parameters
/// surface as errors instead of hangs.
pub const REJECTION_RETRY_CAP: u64 = 1_000_000;

/// Which ensemble an instance was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Each clause is a uniformly random K-subset of the bits.
    RandomUniform,
    /// Every bit belongs to exactly L clauses (`K*M = L*N`).
    LRegular(u32),
}

impl EnsembleKind {
    fn label(&self) -> String {
        match self {
            EnsembleKind::RandomUniform => "random".to_string(),
            EnsembleKind::LRegular(l) => format!("regular-{l}"),
        }
    }

    fn parse(tok: &str) -> Option<EnsembleKind> {
        if tok == "random" {
            return Some(EnsembleKind::RandomUniform);
        }
        let l = tok.strip_prefix("regular-")?.parse::<u32>().ok()?;
        if l == 0 {
            return None;
        }
        Some(EnsembleKind::LRegular(l))
    }
}

/// The clause/variable graph G of an AdSAT formula: M ordered clauses of K
/// distinct bit indices each, independent of any negation choice.
///
/// Invariants enforced on every construction:
/// - every bit index is `< n_bits`,
/// - the K bits within a clause are pairwise distinct,
/// - no two clauses share the same bit-index *set* (slot order is retained
///   for stable edge indexing but carries no identity),
/// - for `LRegular(l)` instances, every bit has degree exactly `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdsatInstance {
    n_bits: usize,
    k: usize,
    clauses: Vec<Vec<u32>>,
    kind: EnsembleKind,
}

impl AdsatInstance {
    pub fn new(
        n_bits: usize,
        k: usize,
        clauses: Vec<Vec<u32>>,
        kind: EnsembleKind,
    ) -> Result<Self> {
        if n_bits == 0 || k == 0 {
            return Err(Error::InvalidParams("N and K must be positive".into()));
        }
        if n_bits < k {
            return Err(Error::InvalidParams(format!(
                "N = {n_bits} is smaller than clause width K = {k}"
            )));
        }
        let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(clauses.len());
        for (a, clause) in clauses.iter().enumerate() {
            if clause.len() != k {
                return Err(Error::InvalidParams(format!(
                    "clause {a} has {} slots, expected K = {k}",
                    clause.len()
                )));
            }
            if clause.iter().any(|&b| b as usize >= n_bits) {
                return Err(Error::InvalidParams(format!(
                    "clause {a} references a bit outside [0, {n_bits})"
                )));
            }
            let mut key = clause.clone();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!(
                    "clause {a} repeats a bit"
                )));
            }
            if !seen.insert(key) {
                return Err(Error::InvalidParams(format!(
                    "clause {a} duplicates an earlier clause's bit set"
                )));
            }
        }
        let inst = AdsatInstance {
            n_bits,
            k,
            clauses,
            kind,
        };
        if let EnsembleKind::LRegular(l) = kind {
            let degs = inst.degrees();
            if let Some(bad) = degs.iter().position(|&d| d != l) {
                return Err(Error::InvalidParams(format!(
                    "bit {bad} has degree {} in an {l}-regular instance",
                    degs[bad]
                )));
            }
        }
        Ok(inst)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn clauses(&self) -> &[Vec<u32>] {
        &self.clauses
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    /// Total number of (clause, slot) edges, `K*M`.
    pub fn n_edges(&self) -> usize {
        self.k * self.clauses.len()
    }

    /// Flat index of edge (clause `a`, slot `j`).
    pub fn edge_index(&self, a: usize, j: usize) -> usize {
        a * self.k + j
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_bits];
        for clause in &self.clauses {
            for &b in clause {
                deg[b as usize] += 1;
            }
        }
        deg
    }

    /// Clause density M/N.
    pub fn alpha(&self) -> f64 {
        self.clauses.len() as f64 / self.n_bits as f64
    }

    /// The instance restricted to its first `m` clauses. Derived instances
    /// are tagged `RandomUniform`; the kind records the generating
    /// ensemble, which a prefix no longer is.
    pub fn truncated(&self, m: usize) -> AdsatInstance {
        assert!(m <= self.clauses.len());
        AdsatInstance {
            n_bits: self.n_bits,
            k: self.k,
            clauses: self.clauses[..m].to_vec(),
            kind: EnsembleKind::RandomUniform,
        }
    }

    /// Appends `delta_m` fresh uniformly random clauses, each with K
    /// distinct bits and a bit set distinct from every clause already
    /// present. Draw order is retained, so "the last added clause" is the
    /// final one.
    pub fn extended_with_random_clauses(
        &self,
        delta_m: usize,
        rng: &mut impl Rng,
    ) -> Result<AdsatInstance> {
        let total = self.clauses.len() + delta_m;
        if (total as u128) > binomial(self.n_bits, self.k) {
            return Err(Error::InvalidParams(format!(
                "cannot extend to {total} clauses: only {} distinct bit sets exist",
                binomial(self.n_bits, self.k)
            )));
        }
        let mut seen: HashSet<Vec<u32>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut key = c.clone();
                key.sort_unstable();
                key
            })
            .collect();
        let mut clauses = self.clauses.clone();
        let mut budget = REJECTION_RETRY_CAP;
        for _ in 0..delta_m {
            let clause = draw_distinct_clause(self.n_bits, self.k, &mut seen, &mut budget, rng)?;
            clauses.push(clause);
        }
        Ok(AdsatInstance {
            n_bits: self.n_bits,
            k: self.k,
            clauses,
            kind: EnsembleKind::RandomUniform,
        })
    }

    /// Canonical text serialization (see `from_text` for the grammar).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "adsat {} {} {} {}",
            self.n_bits,
            self.clauses.len(),
            self.k,
            self.kind.label()
        );
        for clause in &self.clauses {
            let toks: Vec<String> = clause.iter().map(|b| b.to_string()).collect();
            let _ = writeln!(out, "{}", toks.join(" "));
        }
        out
    }

    /// Parses the line-oriented instance format:
    ///
    /// ```text
    /// adsat <N> <M> <K> <kind>
    /// <bit> ... <bit>       (M lines of K indices)
    /// ```
    ///
    /// with `<kind>` one of `random` or `regular-<L>`. Anything else —
    /// wrong token counts, extra lines, out-of-range bits, duplicate
    /// clauses, degree violations for regular instances — is rejected.
    /// Instances with isolated bits are accepted on load (they contribute
    /// a factor 2 per unused bit to model counts).
    pub fn from_text(text: &str) -> Result<AdsatInstance> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "adsat" {
            return Err(parse_err(1, "expected header `adsat <N> <M> <K> <kind>`"));
        }
        let n: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(1, "N is not a number"))?;
        let m: usize = toks[2]
            .parse()
            .map_err(|_| parse_err(1, "M is not a number"))?;
        let k: usize = toks[3]
            .parse()
            .map_err(|_| parse_err(1, "K is not a number"))?;
        let kind = EnsembleKind::parse(toks[4])
            .ok_or_else(|| parse_err(1, "kind must be `random` or `regular-<L>`"))?;
        let mut clauses = Vec::with_capacity(m);
        for _ in 0..m {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| parse_err(m + 1, "fewer clause lines than M"))?;
            let bits: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(idx + 1, "clause line has a non-numeric token"))?;
            if bits.len() != k {
                return Err(parse_err(idx + 1, "clause line does not have K tokens"));
            }
            clauses.push(bits);
        }
        if let Some((idx, line)) = lines.next() {
            if !line.trim().is_empty() {
                return Err(parse_err(idx + 1, "trailing content after last clause"));
            }
            if lines.next().is_some() {
                return Err(parse_err(idx + 2, "trailing content after last clause"));
            }
        }
        if let EnsembleKind::LRegular(l) = kind {
            if (l as usize) * n != k * m {
                return Err(parse_err(1, "regular header violates K*M = L*N"));
            }
        }
        AdsatInstance::new(n, k, clauses, kind)
    }
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn draw_distinct_clause(
    n: usize,
    k: usize,
    seen: &mut HashSet<Vec<u32>>,
    budget: &mut u64,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    loop {
        if *budget == 0 {
            return Err(Error::RetriesExhausted {
                attempts: REJECTION_RETRY_CAP,
            });
        }
        *budget -= 1;
        let clause: Vec<u32> = rand::seq::index::sample(rng, n, k)
            .into_iter()
            .map(|b| b as u32)
            .collect();
        let mut key = clause.clone();
        key.sort_unstable();
        if seen.insert(key) {
            return Ok(clause);
        }
    }
}

/// Parameters of the fixed-(N, M, K) ensemble: the clause count is either
/// given through the density `alpha` (M = round(alpha * N)) or through the
/// per-bit degree `l` of a regular graph (M = L*N/K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n: usize,
    pub k: usize,
    pub density: Density,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Alpha(f64),
    LDegree(u32),
}

impl EnsembleParams {
    pub fn random(n: usize, k: usize, alpha: f64) -> Self {
        EnsembleParams {
            n,
            k,
            density: Density::Alpha(alpha),
        }
    }

    pub fn regular(n: usize, k: usize, l: u32) -> Self {
        EnsembleParams {
            n,
            k,
            density: Density::LDegree(l),
        }
    }

    /// The clause count implied by the density; errors if it is not a
    /// positive integer (M >= 1, and L*N divisible by K for regular).
    pub fn clause_count(&self) -> Result<usize> {
        match self.density {
            Density::Alpha(alpha) => {
                if !alpha.is_finite() || alpha <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "alpha = {alpha} must be positive and finite"
                    )));
                }
                let m = (alpha * self.n as f64).round() as usize;
                if m == 0 {
                    return Err(Error::InvalidParams(format!(
                        "alpha = {alpha} with N = {} yields M = 0",
                        self.n
                    )));
                }
                Ok(m)
            }
            Density::LDegree(l) => {
                if l == 0 {
                    return Err(Error::InvalidParams("L must be positive".into()));
                }
                let edges = l as usize * self.n;
                if !edges.is_multiple_of(self.k) {
                    return Err(Error::InvalidParams(format!(
                        "L*N = {edges} is not divisible by K = {}",
                        self.k
                    )));
                }
                Ok(edges / self.k)
            }
        }
    }
}

/// Draws an instance from the uniform ensemble: every clause is an
/// independent uniform K-subset of the bits, redrawn on a bit-set
/// collision; whole instances in which some bit ends up isolated are
/// redrawn as well.
pub fn generate_random_instance(
    params: &EnsembleParams,
    rng: &mut impl Rng,
) -> Result<AdsatInstance> {
    let m = params.clause_count()?;
    let (n, k) = (params.n, params.k);
    if n < k {
        return Err(Error::InvalidParams(format!("N = {n} < K = {k}")));
    }
    if (m as u128) > binomial(n, k) {
        return Err(Error::InvalidParams(format!(
            "M = {m} exceeds the {} distinct bit sets on N = {n}, K = {k}",
            binomial(n, k)
        )));
    }
    if k * m < n {
        return Err(Error::InvalidParams(format!(
            "K*M = {} < N = {n}: every draw would leave isolated bits",
            k * m
        )));
    }
    let mut budget = REJECTION_RETRY_CAP;
    loop {
        if budget == 0 {
            return Err(Error::RetriesExhausted {
                attempts: REJECTION_RETRY_CAP,
            });
        }
        let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(m);
        let mut clauses = Vec::with_capacity(m);
        for _ in 0..m {
            clauses.push(draw_distinct_clause(n, k, &mut seen, &mut budget, rng)?);
        }
        let mut used = vec![false; n];
        for clause in &clauses {
            for &b in clause {
                used[b as usize] = true;
            }
        }
        if used.iter().all(|&u| u) {
            return AdsatInstance::new(n, k, clauses, EnsembleKind::RandomUniform);
        }
        budget = budget.saturating_sub(1);
    }
}

/// Draws an L-regular instance by the configuration model: L stubs per
/// bit are shuffled and cut into clauses of K; the whole draw is rejected
/// whenever a clause repeats a bit or duplicates another clause's bit set.
pub fn generate_regular_instance(
    n: usize,
    l_degree: u32,
    k: usize,
    rng: &mut impl Rng,
) -> Result<AdsatInstance> {
    let params = EnsembleParams::regular(n, k, l_degree);
    let m = params.clause_count()?;
    if n < k {
        return Err(Error::InvalidParams(format!("N = {n} < K = {k}")));
    }
    if (m as u128) > binomial(n, k) {
        return Err(Error::InvalidParams(format!(
            "M = {m} exceeds the {} distinct bit sets on N = {n}, K = {k}",
            binomial(n, k)
        )));
    }
    let mut stubs: Vec<u32> = Vec::with_capacity(l_degree as usize * n);
    for b in 0..n as u32 {
        for _ in 0..l_degree {
            stubs.push(b);
        }
    }
    for attempt in 0..REJECTION_RETRY_CAP {
        stubs.shuffle(rng);
        let mut ok = true;
        let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(m);
        let mut clauses = Vec::with_capacity(m);
        'chunks: for chunk in stubs.chunks_exact(k) {
            let clause = chunk.to_vec();
            let mut key = clause.clone();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) || !seen.insert(key) {
                ok = false;
                break 'chunks;
            }
            clauses.push(clause);
        }
        if ok {
            let _ = attempt;
            return AdsatInstance::new(n, k, clauses, EnsembleKind::LRegular(l_degree));
        }
    }
    Err(Error::RetriesExhausted {
        attempts: REJECTION_RETRY_CAP,
    })
}

/// Marks, for each bit, the edge of its first occurrence scanning clauses
/// in index order and slots in index order. Exactly one edge per occurring
/// bit; bits that never occur (possible only in loaded files) get none.
pub fn compute_frozen_mask(inst: &AdsatInstance) -> Vec<bool> {
    let mut seen = vec![false; inst.n_bits()];
    let mut frozen = vec![false; inst.n_edges()];
    for (a, clause) in inst.clauses().iter().enumerate() {
        for (j, &b) in clause.iter().enumerate() {
            if !seen[b as usize] {
                seen[b as usize] = true;
                frozen[inst.edge_index(a, j)] = true;
            }
        }
    }
    frozen
}

/// One negation bit per (clause, slot) edge plus the frozen mask pinning
/// each bit's first occurrence to 0. Only the `K*M - N` free edges may
/// ever be flipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationAssignment {
    bits: Vec<bool>,
    frozen: Vec<bool>,
}

impl NegationAssignment {
    /// The all-zero assignment (every literal positive).
    pub fn zeros(inst: &AdsatInstance) -> Self {
        NegationAssignment {
            bits: vec![false; inst.n_edges()],
            frozen: compute_frozen_mask(inst),
        }
    }

    /// Wraps raw edge values, validating the shape and that every frozen
    /// edge holds 0.
    pub fn from_bits(inst: &AdsatInstance, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != inst.n_edges() {
            return Err(Error::ShapeMismatch(format!(
                "{} negation bits for an instance with {} edges",
                bits.len(),
                inst.n_edges()
            )));
        }
        let frozen = compute_frozen_mask(inst);
        if let Some(e) = (0..bits.len()).find(|&e| frozen[e] && bits[e]) {
            return Err(Error::InvalidParams(format!(
                "frozen edge {e} carries a negation"
            )));
        }
        Ok(NegationAssignment { bits, frozen })
    }

    /// Balanced start: every bit of degree d gets exactly floor(d/2)
    /// negated occurrences, chosen uniformly among its free edges (the
    /// frozen first occurrence stays 0, biasing odd degrees toward
    /// un-negated).
    pub fn random_balanced(inst: &AdsatInstance, rng: &mut impl Rng) -> Self {
        let mut neg = NegationAssignment::zeros(inst);
        let mut free_occ: Vec<Vec<usize>> = vec![Vec::new(); inst.n_bits()];
        let mut degree = vec![0usize; inst.n_bits()];
        for (a, clause) in inst.clauses().iter().enumerate() {
            for (j, &b) in clause.iter().enumerate() {
                let e = inst.edge_index(a, j);
                degree[b as usize] += 1;
                if !neg.frozen[e] {
                    free_occ[b as usize].push(e);
                }
            }
        }
        for b in 0..inst.n_bits() {
            let want = degree[b] / 2;
            for &e in free_occ[b].choose_multiple(rng, want) {
                neg.bits[e] = true;
            }
        }
        neg
    }

    /// Alternately balanced start: along each bit's occurrence order the
    /// negations read 0,1,0,1,... — the frozen first occurrence is the
    /// pattern's 0, and the pattern survives removal of trailing clauses.
    pub fn alternately_balanced(inst: &AdsatInstance) -> Self {
        let mut neg = NegationAssignment::zeros(inst);
        let mut count = vec![0usize; inst.n_bits()];
        for (a, clause) in inst.clauses().iter().enumerate() {
            for (j, &b) in clause.iter().enumerate() {
                let e = inst.edge_index(a, j);
                neg.bits[e] = count[b as usize] % 2 == 1;
                count[b as usize] += 1;
            }
        }
        neg
    }

    pub fn edge(&self, e: usize) -> bool {
        self.bits[e]
    }

    pub fn is_frozen(&self, e: usize) -> bool {
        self.frozen[e]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn n_edges(&self) -> usize {
        self.bits.len()
    }

    /// Indices of non-frozen edges in (clause, slot) lexicographic order.
    pub fn free_edges(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&e| !self.frozen[e]).collect()
    }

    pub fn n_free(&self) -> usize {
        self.frozen.iter().filter(|&&f| !f).count()
    }

    /// Flips a free edge in place. Panics on a frozen edge; callers only
    /// ever move in the free subspace.
    pub fn flip(&mut self, e: usize) {
        assert!(!self.frozen[e], "attempted to flip frozen edge {e}");
        self.bits[e] = !self.bits[e];
    }

    /// The assignment carried over to a clause-prefix of the instance:
    /// edge values of the surviving clauses, frozen mask recomputed for
    /// the truncated instance. First occurrences live in the prefix
    /// whenever the bit occurs there at all, so the result is always
    /// legal.
    pub fn restricted(&self, truncated: &AdsatInstance) -> NegationAssignment {
        let keep = truncated.n_edges();
        assert!(keep <= self.bits.len());
        let bits = self.bits[..keep].to_vec();
        let frozen = compute_frozen_mask(truncated);
        debug_assert!((0..keep).all(|e| !(frozen[e] && bits[e])));
        NegationAssignment { bits, frozen }
    }

    /// Checks shape and frozen-edge legality against an instance.
    pub fn is_legal_for(&self, inst: &AdsatInstance) -> bool {
        self.bits.len() == inst.n_edges()
            && self.frozen == compute_frozen_mask(inst)
            && (0..self.bits.len()).all(|e| !(self.frozen[e] && self.bits[e]))
    }

    /// Canonical text serialization (`neg <M> <K>` header, then M lines of
    /// K values in {0,1}).
    pub fn to_text(&self, inst: &AdsatInstance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "neg {} {}", inst.n_clauses(), inst.k());
        for a in 0..inst.n_clauses() {
            let toks: Vec<&str> = (0..inst.k())
                .map(|j| {
                    if self.bits[inst.edge_index(a, j)] {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", toks.join(" "));
        }
        out
    }

    /// Parses a negation file against its instance; rejects shape
    /// mismatches, values outside {0,1}, and negated frozen edges.
    pub fn from_text(inst: &AdsatInstance, text: &str) -> Result<NegationAssignment> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty input"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "neg" {
            return Err(parse_err(1, "expected header `neg <M> <K>`"));
        }
        let m: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(1, "M is not a number"))?;
        let k: usize = toks[2]
            .parse()
            .map_err(|_| parse_err(1, "K is not a number"))?;
        if m != inst.n_clauses() || k != inst.k() {
            return Err(Error::ShapeMismatch(format!(
                "negation header ({m}, {k}) does not match instance ({}, {})",
                inst.n_clauses(),
                inst.k()
            )));
        }
        let mut bits = Vec::with_capacity(inst.n_edges());
        for _ in 0..m {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| parse_err(m + 1, "fewer negation lines than M"))?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                match tok {
                    "0" => bits.push(false),
                    "1" => bits.push(true),
                    _ => return Err(parse_err(idx + 1, "negation value outside {0,1}")),
                }
                count += 1;
            }
            if count != k {
                return Err(parse_err(idx + 1, "negation line does not have K tokens"));
            }
        }
        if let Some((idx, line)) = lines.next() {
            if !line.trim().is_empty() {
                return Err(parse_err(idx + 1, "trailing content after last line"));
            }
            if lines.next().is_some() {
                return Err(parse_err(idx + 2, "trailing content after last line"));
            }
        }
        NegationAssignment::from_bits(inst, bits)
    }
}
