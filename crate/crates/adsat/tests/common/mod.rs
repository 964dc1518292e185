//! Shared test oracles: brute-force enumeration over all assignments and
//! exhaustive small-graph generation. Everything here evaluates formulas
//! with its own loops, independent of the library's search paths.

use adsat::instance::{AdsatInstance, EnsembleKind};
use adsat::satcore::CnfFormula;

/// Exact model count by enumerating all 2^n assignments in 64-assignment
/// words: each clause masks out the assignments violating it.
pub fn brute_force_count(f: &CnfFormula) -> u64 {
    let n = f.n_vars();
    assert!(n <= 26, "oracle limited to 2^26 assignments");
    if n <= 6 {
        return brute_force_count_small(f);
    }
    let words = 1usize << (n - 6);
    let mut alive = vec![u64::MAX; words];
    for clause in f.clauses() {
        // Violating assignments agree with the negations on every clause
        // bit. Split the condition into the low 6 bits (a word pattern)
        // and the rest (a word-index condition).
        let mut low_mask = 0u64;
        let mut low_val = 0u64;
        let mut high_mask = 0usize;
        let mut high_val = 0usize;
        for lit in clause {
            let bit = lit.var as usize;
            let want = lit.negated as u64;
            if bit < 6 {
                low_mask |= 1 << bit;
                low_val |= want << bit;
            } else {
                high_mask |= 1 << (bit - 6);
                high_val |= (want as usize) << (bit - 6);
            }
        }
        let mut pattern = 0u64;
        for idx in 0..64u64 {
            if idx & low_mask == low_val {
                pattern |= 1 << idx;
            }
        }
        for (w, word) in alive.iter_mut().enumerate() {
            if w & high_mask == high_val {
                *word &= !pattern;
            }
        }
    }
    alive.iter().map(|w| w.count_ones() as u64).sum()
}

fn brute_force_count_small(f: &CnfFormula) -> u64 {
    let n = f.n_vars();
    let mut count = 0;
    for word in 0u64..(1 << n) {
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

/// All connected simple graphs on `n` labeled nodes, one representative
/// per isomorphism class, as K = 2 instances (edges in lexicographic
/// order).
pub fn connected_nonisomorphic_k2_instances(n: usize) -> Vec<AdsatInstance> {
    assert!((2..=6).contains(&n));
    let pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b)))
        .collect();
    let n_pairs = pairs.len();
    let perms = permutations(n);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for edge_set in 1u32..(1 << n_pairs) {
        if !is_connected(n, &pairs, edge_set) {
            continue;
        }
        let canon = (0..perms.len())
            .map(|p| relabel_mask(&pairs, edge_set, &perms[p]))
            .min()
            .unwrap();
        if !seen.insert(canon) {
            continue;
        }
        let clauses: Vec<Vec<u32>> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| edge_set >> i & 1 == 1)
            .map(|(_, &(a, b))| vec![a, b])
            .collect();
        out.push(AdsatInstance::new(n, 2, clauses, EnsembleKind::RandomUniform).unwrap());
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut items: Vec<u32> = (0..n as u32).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<u32>, at: usize, out: &mut Vec<Vec<u32>>) {
    if at == items.len() {
        out.push(items.clone());
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, out);
        items.swap(at, i);
    }
}

fn relabel_mask(pairs: &[(u32, u32)], edge_set: u32, perm: &[u32]) -> u32 {
    let mut mask = 0u32;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if edge_set >> i & 1 == 1 {
            let (x, y) = (perm[a as usize], perm[b as usize]);
            let (lo, hi) = (x.min(y), x.max(y));
            let idx = pairs
                .iter()
                .position(|&p| p == (lo, hi))
                .expect("pair table is total");
            mask |= 1 << idx;
        }
    }
    mask
}

fn is_connected(n: usize, pairs: &[(u32, u32)], edge_set: u32) -> bool {
    let mut adj = vec![Vec::new(); n];
    let mut touched = vec![false; n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if edge_set >> i & 1 == 1 {
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
            touched[a as usize] = true;
            touched[b as usize] = true;
        }
    }
    // Connectivity over the touched nodes (the instance's bits may have
    // isolated indices only when n counts unused labels; here require all
    // n nodes in one component so each labeled size is meaningful).
    if touched.iter().any(|&t| !t) {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut visited = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                visited += 1;
                stack.push(w);
            }
        }
    }
    visited == n
}
