//! Solvers and experiment tooling for adversarial SAT (AdSAT).
//!
//! In AdSAT an adversary controls the negation attached to every
//! clause-variable edge of a K-SAT graph and tries to pick negations that
//! make the resulting formula unsatisfiable; the graph is UNSAT when such a
//! choice exists. This crate provides:
//!
//! - [`instance`]: the random and L-regular graph ensembles, negation
//!   assignments with the frozen first-occurrence mask, and balanced /
//!   alternately balanced initial configurations,
//! - [`satcore`]: materialization of concrete K-SAT formulas, a DPLL
//!   solver, an exact model counter and the per-bit complexity cost,
//! - [`complete`]: the exact decider that enumerates all free negation
//!   configurations,
//! - [`adsat2`]: the polynomial-time decision procedure for K = 2 via
//!   2-core classification of the variable graph,
//! - [`anneal`]: simulated annealing over negation space, with restarts
//!   and the clause-peeling improved variant,
//! - [`harness`]: seeded phase-transition sweeps, critical-density
//!   interpolation and CSV output.

pub mod adsat2;
pub mod anneal;
pub mod complete;
pub mod harness;
pub mod instance;
pub mod satcore;

pub use adsat2::{decide_2adsat, ComponentClass, TwoAdsatOutcome};
pub use anneal::{
    improved_variant, restart_sa, sa_adsat, AnnealOutcome, RestartOutcome, Schedule,
};
pub use complete::{complete_adsat, AdsatStatus, AdsatVerdict};
pub use harness::{alpha_star, gamma_of, run_sweep, AlgorithmKind, SweepConfig, SweepRecord};
pub use instance::{
    generate_random_instance, generate_regular_instance, AdsatInstance, EnsembleKind,
    EnsembleParams, NegationAssignment,
};
pub use satcore::{complexity, count_models, dpll_solve, materialize, CnfFormula, Lit, SatResult};

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rejection sampling exhausted after {attempts} attempts")]
    RetriesExhausted { attempts: u64 },

    #[error("instance has {free_bits} free negations, above the enumeration cap of {cap} bits")]
    CapExceeded { free_bits: usize, cap: usize },

    #[error("model counting exceeded the node budget of {budget}")]
    BudgetExceeded { budget: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operation requires K = {expected}, instance has K = {found}")]
    WrongClauseWidth { expected: usize, found: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
