//! Polynomial-time decision procedure for 2-AdSAT.
//!
//! Each 2-clause is an edge of a graph on the bits. Tree-like parts are
//! always satisfiable and can be pruned; what is left (the 2-core)
//! decides the game: a component that is a bare cycle or a theta graph
//! (two degree-3 nodes joined by three internally disjoint paths) cannot
//! be made unsatisfiable by any choice of negations, every other shape
//! can.

use crate::complete::AdsatStatus;
use crate::instance::AdsatInstance;
use crate::{Error, Result};

/// Multigraph on the bits with one edge per 2-clause. Self-loops and
/// parallel edges are impossible for valid instances (distinct bits
/// within a clause, distinct clause bit sets) and rejected defensively.
#[derive(Debug, Clone)]
pub struct VariableGraph {
    adj: Vec<Vec<u32>>,
}

impl VariableGraph {
    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    /// Connected components (smallest-node order), singletons included.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            let mut comp = vec![start];
            seen[start as usize] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

/// Shape of one connected component after pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentClass {
    /// No cycles at all; prunes to nothing. Always satisfiable.
    Tree,
    /// A bare cycle. Satisfiable for any negations.
    SingleCycle,
    /// Two degree-3 nodes joined by three internally disjoint paths.
    /// Satisfiable: three implication lines cannot pin two bits.
    Theta,
    /// Anything else; the adversary wins.
    Other,
}

impl ComponentClass {
    pub fn adversarially_sat(&self) -> bool {
        !matches!(self, ComponentClass::Other)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ComponentClass::Tree => "tree",
            ComponentClass::SingleCycle => "single-cycle",
            ComponentClass::Theta => "theta",
            ComponentClass::Other => "other",
        }
    }
}

/// Result of the K = 2 decision: the status plus, for each connected
/// component of the variable graph, its node set and classification.
#[derive(Debug, Clone)]
pub struct TwoAdsatOutcome {
    pub status: AdsatStatus,
    pub components: Vec<(Vec<u32>, ComponentClass)>,
}

/// One edge per clause; requires K = 2.
pub fn build_variable_graph(inst: &AdsatInstance) -> Result<VariableGraph> {
    if inst.k() != 2 {
        return Err(Error::WrongClauseWidth {
            expected: 2,
            found: inst.k(),
        });
    }
    let mut adj = vec![Vec::new(); inst.n_bits()];
    let mut seen = std::collections::HashSet::new();
    for clause in inst.clauses() {
        let (a, b) = (clause[0], clause[1]);
        if a == b {
            return Err(Error::InvalidParams("self-loop in variable graph".into()));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::InvalidParams(
                "parallel edge in variable graph".into(),
            ));
        }
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    Ok(VariableGraph { adj })
}

/// Iteratively deletes nodes of degree <= 1 together with their edges; the
/// fixed point is the 2-core. Deletion order does not matter.
pub fn prune_trees(g: &VariableGraph) -> VariableGraph {
    let n = g.n_nodes();
    let mut degree: Vec<usize> = (0..n as u32).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut queue: Vec<u32> = (0..n as u32).filter(|&v| degree[v as usize] <= 1).collect();
    while let Some(v) = queue.pop() {
        if removed[v as usize] {
            continue;
        }
        removed[v as usize] = true;
        for &w in g.neighbors(v) {
            if !removed[w as usize] {
                degree[w as usize] -= 1;
                if degree[w as usize] <= 1 {
                    queue.push(w);
                }
            }
        }
    }
    let adj = (0..n as u32)
        .map(|v| {
            if removed[v as usize] {
                Vec::new()
            } else {
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&w| !removed[w as usize])
                    .collect()
            }
        })
        .collect();
    VariableGraph { adj }
}

/// Classifies one connected component of a 2-core (non-empty node set,
/// every degree >= 2).
pub fn classify_component(core: &VariableGraph, nodes: &[u32]) -> Result<ComponentClass> {
    if nodes.is_empty() {
        return Err(Error::InvalidParams("empty component".into()));
    }
    if nodes.iter().any(|&v| core.degree(v) < 2) {
        return Err(Error::InvalidParams(
            "component is not a 2-core (degree < 2)".into(),
        ));
    }
    let max_degree = nodes.iter().map(|&v| core.degree(v)).max().unwrap();
    if max_degree == 2 {
        return Ok(ComponentClass::SingleCycle);
    }
    let deg3: Vec<u32> = nodes.iter().copied().filter(|&v| core.degree(v) == 3).collect();
    if max_degree > 3 || deg3.len() != 2 {
        return Ok(ComponentClass::Other);
    }
    let (u, v) = (deg3[0], deg3[1]);
    // Walk the three degree-2 chains leaving u; a theta ends all of them
    // at v.
    let mut lengths = Vec::with_capacity(3);
    for &first in core.neighbors(u) {
        let (end, len) = chase_chain(core, u, first);
        if end != v {
            return Ok(ComponentClass::Other);
        }
        lengths.push(len);
    }
    // Structural recomputation: path lengths account for every node and
    // edge of the component.
    let total_len: usize = lengths.iter().sum();
    let internal: usize = lengths.iter().map(|l| l - 1).sum();
    if internal + 2 != nodes.len() || total_len != component_edges(core, nodes) {
        return Ok(ComponentClass::Other);
    }
    Ok(ComponentClass::Theta)
}

/// Follows a chain of degree-2 nodes starting with the edge
/// `start -> first`; returns the first node of degree != 2 reached and the
/// number of edges walked.
fn chase_chain(g: &VariableGraph, start: u32, first: u32) -> (u32, usize) {
    let mut prev = start;
    let mut cur = first;
    let mut len = 1;
    while g.degree(cur) == 2 {
        let nbrs = g.neighbors(cur);
        let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
        prev = cur;
        cur = next;
        len += 1;
    }
    (cur, len)
}

fn component_edges(g: &VariableGraph, nodes: &[u32]) -> usize {
    nodes.iter().map(|&v| g.degree(v)).sum::<usize>() / 2
}

/// Decides a K = 2 instance in polynomial time: SAT exactly when every
/// component prunes away entirely or leaves a single cycle or a theta
/// graph.
pub fn decide_2adsat(inst: &AdsatInstance) -> Result<TwoAdsatOutcome> {
    let graph = build_variable_graph(inst)?;
    let core = prune_trees(&graph);
    let mut components = Vec::new();
    let mut status = AdsatStatus::Sat;
    for comp in graph.components() {
        let surviving: Vec<u32> = comp
            .iter()
            .copied()
            .filter(|&v| core.degree(v) > 0)
            .collect();
        let class = if surviving.is_empty() {
            ComponentClass::Tree
        } else {
            classify_component(&core, &surviving)?
        };
        if !class.adversarially_sat() {
            status = AdsatStatus::Unsat;
        }
        components.push((comp, class));
    }
    Ok(TwoAdsatOutcome { status, components })
}
