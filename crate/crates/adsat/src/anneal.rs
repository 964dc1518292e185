//! Stochastic search over negation space: Metropolis simulated annealing
//! with the square-root inverse-temperature ramp, a restart wrapper that
//! draws a fresh balanced start per restart, and the improved variant that
//! first over-constrains the formula with extra clauses and then peels
//! them off chunk by chunk.

use crate::instance::{AdsatInstance, NegationAssignment};
use crate::satcore::{
    self, materialize, sigma_from_count, CountOptions, ModelCounter, SubcubeCounter,
};
use crate::{Error, Result};
use num_traits::Zero;
use rand::Rng;

/// Inverse-temperature schedule over global step t = 1..=total_steps.
///
/// The plain ramp is beta(t) = 2*sqrt(t). The chunked ramp spreads the
/// same endpoints over `delta_m + 1` chunks of equal length:
/// beta(t) = 2*sqrt(t / (delta_m + 1)), so the first chunk starts near
/// beta = 0 and the last chunk still ends at exactly 2*sqrt(I), running
/// colder than a standalone ramp would at the same within-chunk step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    total_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScheduleKind {
    Plain,
    Chunked { chunks: u64 },
    Constant { beta: f64 },
}

impl Schedule {
    pub fn plain(iters: u64) -> Schedule {
        Schedule {
            kind: ScheduleKind::Plain,
            total_steps: iters,
        }
    }

    pub fn chunked(iters_per_chunk: u64, delta_m: u64) -> Schedule {
        Schedule {
            kind: ScheduleKind::Chunked {
                chunks: delta_m + 1,
            },
            total_steps: (delta_m + 1) * iters_per_chunk,
        }
    }

    /// Fixed temperature; `f64::INFINITY` degenerates to greedy descent
    /// (only strict improvements are ever accepted).
    pub fn constant(beta: f64, iters: u64) -> Schedule {
        Schedule {
            kind: ScheduleKind::Constant { beta },
            total_steps: iters,
        }
    }

    pub fn beta(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self.kind {
            ScheduleKind::Plain => 2.0 * (t as f64).sqrt(),
            ScheduleKind::Chunked { chunks } => 2.0 * (t as f64 / chunks as f64).sqrt(),
            ScheduleKind::Constant { beta } => beta,
        }
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }
}

/// Metropolis acceptance for a candidate with cost change `delta_sigma`
/// at inverse temperature `beta`, given a uniform draw `eta` from [0, 1):
/// accept when exp(-beta * delta_sigma) > eta. Equal cost at finite beta
/// is always accepted (exp(0) = 1 > eta).
pub(crate) fn metropolis_accepts(beta: f64, delta_sigma: f64, eta: f64) -> bool {
    (-beta * delta_sigma).exp() > eta
}

/// One annealing run. `sigma_star` is the minimum complexity seen over
/// the initial and accepted states; the witness is present exactly when
/// it reached 0, and is DPLL-verified before being returned.
#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub sigma_star: f64,
    pub last_negations: NegationAssignment,
    pub unsat_witness: Option<NegationAssignment>,
    pub steps_used: u64,
}

/// A restarted run: minimum complexity over restarts, plus the 1-based
/// restart index at which the formula was first made UNSAT, if any.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub sigma_star: f64,
    pub r_g: Option<u64>,
    pub unsat_witness: Option<NegationAssignment>,
    pub restarts_run: u64,
}

/// Per-step trace record for schedule diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub step: u64,
    pub beta: f64,
    pub sigma_candidate: f64,
    pub accepted: bool,
}

/// Trace record of a restarted run; `step` inside the row is the global
/// schedule step of that restart's annealing.
#[derive(Debug, Clone, Copy)]
pub struct RestartTraceRow {
    pub restart: u64,
    pub row: TraceRow,
}

/// Simulated annealing from a given legal start, plain semantics:
/// evaluate the start and return immediately if already UNSAT; then per
/// step flip one uniformly random free negation, return at once on an
/// UNSAT candidate, accept strict improvements, and accept anything else
/// with the Metropolis probability.
pub fn sa_adsat(
    inst: &AdsatInstance,
    j0: NegationAssignment,
    steps: u64,
    schedule: &Schedule,
    rng: &mut impl Rng,
) -> Result<AnnealOutcome> {
    sa_adsat_with(
        inst,
        j0,
        steps,
        schedule,
        0,
        CountOptions::default(),
        None,
        rng,
    )
}

/// Full-control variant: `step_offset` shifts the global schedule step
/// (chunk c of the improved variant runs at offset c*I), counting runs
/// under `count_options` (budget errors propagate), and each step can be
/// traced.
#[allow(clippy::too_many_arguments)]
pub fn sa_adsat_with(
    inst: &AdsatInstance,
    j0: NegationAssignment,
    steps: u64,
    schedule: &Schedule,
    step_offset: u64,
    count_options: CountOptions,
    mut trace: Option<&mut Vec<TraceRow>>,
    rng: &mut impl Rng,
) -> Result<AnnealOutcome> {
    if !j0.is_legal_for(inst) {
        return Err(Error::ShapeMismatch(
            "negation assignment is not legal for this instance".into(),
        ));
    }
    let mut neg = j0;
    let (mut evaluator, mut sigma, unsat) = CostEvaluator::new(inst, &neg, count_options)?;
    if unsat {
        verify_unsat(inst, &neg);
        return Ok(AnnealOutcome {
            sigma_star: 0.0,
            last_negations: neg.clone(),
            unsat_witness: Some(neg),
            steps_used: 0,
        });
    }
    let mut sigma_star = sigma;
    let free = neg.free_edges();
    if free.is_empty() {
        // Nothing the adversary could move; the start is the whole search.
        return Ok(AnnealOutcome {
            sigma_star,
            last_negations: neg,
            unsat_witness: None,
            steps_used: 0,
        });
    }
    for t in 1..=steps {
        let beta = schedule.beta(step_offset + t);
        let edge = free[rng.gen_range(0..free.len())];
        let (sigma_new, unsat) = evaluator.flip(inst, &mut neg, edge)?;
        if unsat {
            if let Some(rows) = trace.as_deref_mut() {
                rows.push(TraceRow {
                    step: step_offset + t,
                    beta,
                    sigma_candidate: 0.0,
                    accepted: true,
                });
            }
            verify_unsat(inst, &neg);
            debug_assert!(neg.is_legal_for(inst));
            return Ok(AnnealOutcome {
                sigma_star: 0.0,
                last_negations: neg.clone(),
                unsat_witness: Some(neg),
                steps_used: t,
            });
        }
        let accepted = if sigma_new < sigma {
            true
        } else {
            let eta: f64 = rng.gen();
            metropolis_accepts(beta, sigma_new - sigma, eta)
        };
        if accepted {
            sigma = sigma_new;
            if sigma_new < sigma_star {
                sigma_star = sigma_new;
            }
            debug_assert!(neg.is_legal_for(inst));
        } else {
            evaluator.unflip(inst, &mut neg, edge);
        }
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow {
                step: step_offset + t,
                beta,
                sigma_candidate: sigma_new,
                accepted,
            });
        }
    }
    Ok(AnnealOutcome {
        sigma_star,
        last_negations: neg,
        unsat_witness: None,
        steps_used: steps,
    })
}

/// Exact complexity evaluation behind the annealing moves. Small
/// instances keep the incremental subcube tally, updated per flip; larger
/// ones re-count with the search-based counter. Either way the count is
/// exact, so the accept/return logic is identical.
enum CostEvaluator {
    Incremental(SubcubeCounter),
    Search(Box<ModelCounter>),
}

impl CostEvaluator {
    fn new(
        inst: &AdsatInstance,
        neg: &NegationAssignment,
        count_options: CountOptions,
    ) -> Result<(CostEvaluator, f64, bool)> {
        let n = inst.n_bits();
        if SubcubeCounter::profitable_for_counting(n, inst.k()) && inst.n_clauses() < 60_000 {
            let counter = SubcubeCounter::new(inst, neg);
            let (sigma, unsat) = (sigma_u64(counter.count(), n), counter.is_unsat());
            Ok((CostEvaluator::Incremental(counter), sigma, unsat))
        } else {
            let mut counter = Box::new(ModelCounter::with_options(count_options));
            let count = counter.count(&materialize(inst, neg))?;
            let unsat = count.is_zero();
            let sigma = sigma_from_count(&count, n);
            Ok((CostEvaluator::Search(counter), sigma, unsat))
        }
    }

    /// Flips `edge` in `neg` and returns the new (sigma, unsat).
    fn flip(
        &mut self,
        inst: &AdsatInstance,
        neg: &mut NegationAssignment,
        edge: usize,
    ) -> Result<(f64, bool)> {
        neg.flip(edge);
        match self {
            CostEvaluator::Incremental(c) => {
                c.flip_edge(inst, edge / inst.k(), edge % inst.k(), neg.edge(edge));
                Ok((sigma_u64(c.count(), inst.n_bits()), c.is_unsat()))
            }
            CostEvaluator::Search(mc) => {
                let count = mc.count(&materialize(inst, neg))?;
                let unsat = count.is_zero();
                Ok((sigma_from_count(&count, inst.n_bits()), unsat))
            }
        }
    }

    /// Reverts a rejected flip.
    fn unflip(&mut self, inst: &AdsatInstance, neg: &mut NegationAssignment, edge: usize) {
        neg.flip(edge);
        if let CostEvaluator::Incremental(c) = self {
            c.flip_edge(inst, edge / inst.k(), edge % inst.k(), neg.edge(edge));
        }
    }
}

fn sigma_u64(count: u64, n_bits: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        (count as f64 + 1.0).log2() / n_bits as f64
    }
}

fn verify_unsat(inst: &AdsatInstance, neg: &NegationAssignment) {
    assert!(
        !satcore::dpll_solve(&materialize(inst, neg)).is_sat(),
        "counter reported UNSAT but DPLL found a model"
    );
}

/// Restarted annealing: each restart draws a fresh random balanced start
/// and runs the plain schedule; stops at the first restart that makes the
/// formula UNSAT.
pub fn restart_sa(
    inst: &AdsatInstance,
    restarts: u64,
    steps: u64,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    restart_sa_with(inst, restarts, steps, CountOptions::default(), rng)
}

pub fn restart_sa_with(
    inst: &AdsatInstance,
    restarts: u64,
    steps: u64,
    count_options: CountOptions,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    restart_sa_traced(inst, restarts, steps, count_options, None, rng)
}

pub fn restart_sa_traced(
    inst: &AdsatInstance,
    restarts: u64,
    steps: u64,
    count_options: CountOptions,
    mut trace: Option<&mut Vec<RestartTraceRow>>,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    if restarts == 0 {
        return Err(Error::InvalidParams("restarts must be >= 1".into()));
    }
    let schedule = Schedule::plain(steps);
    let mut best = f64::INFINITY;
    for r in 1..=restarts {
        let j0 = NegationAssignment::random_balanced(inst, rng);
        let mut rows = trace.as_deref_mut().map(|_| Vec::new());
        let out = sa_adsat_with(
            inst,
            j0,
            steps,
            &schedule,
            0,
            count_options,
            rows.as_mut(),
            rng,
        )?;
        if let (Some(sink), Some(rows)) = (trace.as_deref_mut(), rows) {
            sink.extend(rows.into_iter().map(|row| RestartTraceRow { restart: r, row }));
        }
        if out.unsat_witness.is_some() {
            return Ok(RestartOutcome {
                sigma_star: 0.0,
                r_g: Some(r),
                unsat_witness: out.unsat_witness,
                restarts_run: r,
            });
        }
        best = best.min(out.sigma_star);
    }
    Ok(RestartOutcome {
        sigma_star: best,
        r_g: None,
        unsat_witness: None,
        restarts_run: restarts,
    })
}

/// Default clause surplus for the improved variant: half the bit count,
/// rounded up, which parks the expanded formula near or above the
/// classical SAT threshold for the densities studied here.
pub fn default_delta_m(n_bits: usize) -> usize {
    n_bits.div_ceil(2)
}

/// The improved variant: per restart, extend the instance with `delta_m`
/// fresh clauses, start from an alternately balanced configuration of the
/// expanded formula, and anneal a chunk on each prefix from the fully
/// expanded formula down to the original one, carrying over the
/// UNSAT-witnessing (or else last accepted) negations restricted to the
/// surviving clauses. Only the original formula going UNSAT ends a
/// restart early.
pub fn improved_variant(
    inst: &AdsatInstance,
    delta_m: usize,
    restarts: u64,
    steps_per_chunk: u64,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    improved_variant_with(
        inst,
        delta_m,
        restarts,
        steps_per_chunk,
        CountOptions::default(),
        rng,
    )
}

pub fn improved_variant_with(
    inst: &AdsatInstance,
    delta_m: usize,
    restarts: u64,
    steps_per_chunk: u64,
    count_options: CountOptions,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    improved_variant_traced(
        inst,
        delta_m,
        restarts,
        steps_per_chunk,
        count_options,
        None,
        rng,
    )
}

pub fn improved_variant_traced(
    inst: &AdsatInstance,
    delta_m: usize,
    restarts: u64,
    steps_per_chunk: u64,
    count_options: CountOptions,
    mut trace: Option<&mut Vec<RestartTraceRow>>,
    rng: &mut impl Rng,
) -> Result<RestartOutcome> {
    if restarts == 0 {
        return Err(Error::InvalidParams("restarts must be >= 1".into()));
    }
    let schedule = Schedule::chunked(steps_per_chunk, delta_m as u64);
    let base_m = inst.n_clauses();
    let mut best = f64::INFINITY;
    for r in 1..=restarts {
        let expanded = inst.extended_with_random_clauses(delta_m, rng)?;
        let mut current = NegationAssignment::alternately_balanced(&expanded);
        let mut final_outcome = None;
        for s in (0..=delta_m).rev() {
            let phi_s = expanded.truncated(base_m + s);
            let chunk = (delta_m - s) as u64;
            let mut rows = trace.as_deref_mut().map(|_| Vec::new());
            let out = sa_adsat_with(
                &phi_s,
                current.clone(),
                steps_per_chunk,
                &schedule,
                chunk * steps_per_chunk,
                count_options,
                rows.as_mut(),
                rng,
            )?;
            if let (Some(sink), Some(rows)) = (trace.as_deref_mut(), rows) {
                sink.extend(rows.into_iter().map(|row| RestartTraceRow { restart: r, row }));
            }
            if s == 0 {
                final_outcome = Some(out);
                break;
            }
            let carried = match out.unsat_witness {
                Some(w) => w,
                None => out.last_negations,
            };
            current = carried.restricted(&expanded.truncated(base_m + s - 1));
        }
        let out = final_outcome.expect("loop always reaches s = 0");
        if out.unsat_witness.is_some() {
            return Ok(RestartOutcome {
                sigma_star: 0.0,
                r_g: Some(r),
                unsat_witness: out.unsat_witness,
                restarts_run: r,
            });
        }
        best = best.min(out.sigma_star);
    }
    Ok(RestartOutcome {
        sigma_star: best,
        r_g: None,
        unsat_witness: None,
        restarts_run: restarts,
    })
}
