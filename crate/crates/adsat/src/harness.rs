//! Experiment orchestration: seeded phase-transition sweeps with CSV
//! output, critical-density interpolation, restart-budget bookkeeping and
//! balance statistics.
//!
//! Every per-graph run gets a child seed derived from the master seed and
//! the point coordinates (never from the grid position), so permuting or
//! extending the grid leaves individual verdicts untouched and any sweep
//! is reproducible bit for bit.

use crate::anneal;
use crate::complete::{complete_adsat_with_cap, AdsatStatus};
use crate::instance::{
    generate_random_instance, generate_regular_instance, AdsatInstance, Density, EnsembleParams,
    NegationAssignment,
};
use crate::satcore::CountOptions;
use crate::{adsat2, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const CSV_SCHEMA: &str = "adsat-sweep-v1";

/// Which decision procedure a sweep runs per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Complete,
    Sa,
    Iv,
    Adsat2,
}

impl AlgorithmKind {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmKind::Complete => "complete",
            AlgorithmKind::Sa => "sa",
            AlgorithmKind::Iv => "iv",
            AlgorithmKind::Adsat2 => "adsat2",
        }
    }

    pub fn parse(s: &str) -> Option<AlgorithmKind> {
        match s {
            "complete" => Some(AlgorithmKind::Complete),
            "sa" => Some(AlgorithmKind::Sa),
            "iv" => Some(AlgorithmKind::Iv),
            "adsat2" => Some(AlgorithmKind::Adsat2),
            _ => None,
        }
    }
}

/// Grid of sweep points: clause densities for the uniform ensemble or
/// degrees for regular graphs.
#[derive(Debug, Clone)]
pub enum GridSpec {
    Alpha(Vec<f64>),
    LDegrees(Vec<u32>),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub grid: GridSpec,
    pub graphs_per_point: usize,
    pub algorithm: AlgorithmKind,
    pub iters: u64,
    pub restarts: u64,
    /// Clause surplus for the improved variant; `None` takes
    /// [`anneal::default_delta_m`].
    pub delta_m: Option<usize>,
    pub master_seed: u64,
    /// Free-negation cap for the complete algorithm.
    pub free_bit_cap: usize,
    /// Node budget per model count; exceeding it marks the graph as a
    /// budget error instead of aborting the sweep.
    pub count_budget: Option<u64>,
}

impl SweepConfig {
    fn count_options(&self) -> CountOptions {
        CountOptions {
            node_budget: self.count_budget,
            ..CountOptions::default()
        }
    }
}

/// Aggregates for one grid point. Sigma statistics run over all graphs
/// that produced a minimum complexity (annealing algorithms, non-errored);
/// the restart statistics run over the UNSAT-decided graphs only.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub algorithm: AlgorithmKind,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub m: usize,
    pub l: Option<u32>,
    pub graphs: usize,
    pub unsat: usize,
    pub phi_unsat: f64,
    pub sigma_mean: Option<f64>,
    pub sigma_std: Option<f64>,
    pub mean_log2_rg_over_n: Option<f64>,
    pub std_log2_rg_over_n: Option<f64>,
    pub budget_errors: usize,
    pub wall_ms: u128,
}

/// Outcome of one graph inside a sweep point.
#[derive(Debug, Clone)]
pub struct GraphRun {
    pub graph_index: usize,
    pub instance: AdsatInstance,
    pub unsat: bool,
    pub sigma_star: Option<f64>,
    pub r_g: Option<u64>,
    pub budget_error: bool,
    pub witness: Option<NegationAssignment>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for one (point, graph) cell, a function of the point's
/// coordinates rather than its grid position.
pub fn child_seed(master: u64, n: usize, k: usize, m: usize, l: u32, graph: usize) -> u64 {
    let mut s = splitmix64(master);
    for v in [n as u64, k as u64, m as u64, l as u64, graph as u64] {
        s = splitmix64(s ^ v);
    }
    s
}

fn density_of(cfg: &SweepConfig, point: usize) -> (Density, f64, Option<u32>) {
    match &cfg.grid {
        GridSpec::Alpha(vals) => (Density::Alpha(vals[point]), vals[point], None),
        GridSpec::LDegrees(ls) => {
            let l = ls[point];
            let alpha = l as f64 / cfg.k as f64;
            (Density::LDegree(l), alpha, Some(l))
        }
    }
}

fn grid_len(cfg: &SweepConfig) -> usize {
    match &cfg.grid {
        GridSpec::Alpha(v) => v.len(),
        GridSpec::LDegrees(v) => v.len(),
    }
}

/// Runs one graph cell: generate the instance from its child seed, decide
/// it with the configured algorithm. Budget and cap errors are recorded on
/// the run; anything else propagates.
fn run_graph(cfg: &SweepConfig, density: Density, graph_index: usize) -> Result<GraphRun> {
    let params = EnsembleParams {
        n: cfg.n,
        k: cfg.k,
        density,
    };
    let m = params.clause_count()?;
    let l = match density {
        Density::LDegree(l) => l,
        Density::Alpha(_) => 0,
    };
    let seed = child_seed(cfg.master_seed, cfg.n, cfg.k, m, l, graph_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instance = match density {
        Density::Alpha(_) => generate_random_instance(&params, &mut rng)?,
        Density::LDegree(l) => generate_regular_instance(cfg.n, l, cfg.k, &mut rng)?,
    };
    let mut run = GraphRun {
        graph_index,
        instance,
        unsat: false,
        sigma_star: None,
        r_g: None,
        budget_error: false,
        witness: None,
    };
    match cfg.algorithm {
        AlgorithmKind::Complete => match complete_adsat_with_cap(&run.instance, cfg.free_bit_cap)
        {
            Ok(verdict) => {
                run.unsat = verdict.status == AdsatStatus::Unsat;
                run.witness = verdict.witness_negations;
            }
            Err(Error::CapExceeded { .. }) => run.budget_error = true,
            Err(e) => return Err(e),
        },
        AlgorithmKind::Adsat2 => {
            let out = adsat2::decide_2adsat(&run.instance)?;
            run.unsat = out.status == AdsatStatus::Unsat;
        }
        AlgorithmKind::Sa => {
            match anneal::restart_sa_with(
                &run.instance,
                cfg.restarts,
                cfg.iters,
                cfg.count_options(),
                &mut rng,
            ) {
                Ok(out) => apply_restart_outcome(&mut run, out),
                Err(Error::BudgetExceeded { .. }) => run.budget_error = true,
                Err(e) => return Err(e),
            }
        }
        AlgorithmKind::Iv => {
            let delta_m = cfg.delta_m.unwrap_or_else(|| anneal::default_delta_m(cfg.n));
            match anneal::improved_variant_with(
                &run.instance,
                delta_m,
                cfg.restarts,
                cfg.iters,
                cfg.count_options(),
                &mut rng,
            ) {
                Ok(out) => apply_restart_outcome(&mut run, out),
                Err(Error::BudgetExceeded { .. }) => run.budget_error = true,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(run)
}

fn apply_restart_outcome(run: &mut GraphRun, out: anneal::RestartOutcome) {
    run.unsat = out.r_g.is_some();
    run.sigma_star = Some(out.sigma_star);
    run.r_g = out.r_g;
    run.witness = out.unsat_witness;
}

/// Runs all graphs of one grid point in parallel (each cell owns its RNG;
/// results come back in graph order, so aggregation is deterministic).
pub fn run_point(cfg: &SweepConfig, point: usize) -> Result<Vec<GraphRun>> {
    let (density, _, _) = density_of(cfg, point);
    (0..cfg.graphs_per_point)
        .into_par_iter()
        .map(|g| run_graph(cfg, density, g))
        .collect()
}

fn aggregate(cfg: &SweepConfig, point: usize, runs: &[GraphRun], wall_ms: u128) -> SweepRecord {
    let (_, alpha, l) = density_of(cfg, point);
    let m = runs
        .first()
        .map(|r| r.instance.n_clauses())
        .unwrap_or_else(|| (alpha * cfg.n as f64).round() as usize);
    let graphs = runs.len();
    let unsat = runs.iter().filter(|r| r.unsat).count();
    let budget_errors = runs.iter().filter(|r| r.budget_error).count();
    let sigmas: Vec<f64> = runs.iter().filter_map(|r| r.sigma_star).collect();
    let (sigma_mean, sigma_std) = mean_and_sample_std(&sigmas);
    let rgs: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.r_g)
        .map(|r| (r as f64).log2() / cfg.n as f64)
        .collect();
    let (rg_mean, rg_std) = mean_and_sample_std(&rgs);
    SweepRecord {
        algorithm: cfg.algorithm,
        n: cfg.n,
        k: cfg.k,
        alpha,
        m,
        l,
        graphs,
        unsat,
        phi_unsat: if graphs == 0 {
            0.0
        } else {
            unsat as f64 / graphs as f64
        },
        sigma_mean,
        sigma_std,
        mean_log2_rg_over_n: rg_mean,
        std_log2_rg_over_n: rg_std,
        budget_errors,
        wall_ms,
    }
}

fn mean_and_sample_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Runs the whole sweep. With an output path, results are flushed to CSV
/// after every point; with `resume`, points whose rows already exist in
/// that file are skipped and their records kept.
pub fn run_sweep(
    cfg: &SweepConfig,
    out: Option<&Path>,
    resume: bool,
) -> Result<Vec<SweepRecord>> {
    if cfg.algorithm == AlgorithmKind::Adsat2 && cfg.k != 2 {
        return Err(Error::WrongClauseWidth {
            expected: 2,
            found: cfg.k,
        });
    }
    if cfg.graphs_per_point == 0 {
        return Ok(Vec::new());
    }
    let mut existing: Vec<SweepRecord> = Vec::new();
    if resume {
        if let Some(path) = out {
            if path.exists() {
                existing = parse_csv(&std::fs::read_to_string(path)?)?;
            }
        }
    }
    let mut records: Vec<SweepRecord> = Vec::new();
    for point in 0..grid_len(cfg) {
        let (density, _, l) = density_of(cfg, point);
        let params = EnsembleParams {
            n: cfg.n,
            k: cfg.k,
            density,
        };
        let m = params.clause_count()?;
        if let Some(prev) = existing.iter().find(|r| {
            r.algorithm == cfg.algorithm
                && r.n == cfg.n
                && r.k == cfg.k
                && r.m == m
                && r.l == l
                && r.graphs == cfg.graphs_per_point
        }) {
            records.push(prev.clone());
            continue;
        }
        let start = Instant::now();
        let runs = run_point(cfg, point)?;
        let record = aggregate(cfg, point, &runs, start.elapsed().as_millis());
        records.push(record);
        if let Some(path) = out {
            std::fs::write(path, to_csv(&records))?;
        }
    }
    Ok(records)
}

// ----------------------------------------------------------------------
// CSV
// ----------------------------------------------------------------------

pub fn csv_header() -> String {
    "schema,algorithm,n,k,alpha,m,l,graphs,unsat,phi_unsat,sigma_mean,sigma_std,\
     mean_log2_rg_n,std_log2_rg_n,budget_errors,wall_ms\n"
        .to_string()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = csv_header();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{},{},{:.6},{},{},{},{},{},{}",
            CSV_SCHEMA,
            r.algorithm.label(),
            r.n,
            r.k,
            r.alpha,
            r.m,
            r.l.map(|l| l.to_string()).unwrap_or_default(),
            r.graphs,
            r.unsat,
            r.phi_unsat,
            fmt_opt(r.sigma_mean),
            fmt_opt(r.sigma_std),
            fmt_opt(r.mean_log2_rg_over_n),
            fmt_opt(r.std_log2_rg_over_n),
            r.budget_errors,
            r.wall_ms,
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if !line.starts_with("schema,") {
                return Err(Error::Parse {
                    line: 1,
                    msg: "missing CSV header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 16 || f[0] != CSV_SCHEMA {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 16 {CSV_SCHEMA} fields"),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad {what}"),
            })
        };
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad {what}"),
            })
        };
        let opt_f64 = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f64(s, what).map(Some)
            }
        };
        records.push(SweepRecord {
            algorithm: AlgorithmKind::parse(f[1]).ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "bad algorithm".into(),
            })?,
            n: parse_usize(f[2], "n")?,
            k: parse_usize(f[3], "k")?,
            alpha: parse_f64(f[4], "alpha")?,
            m: parse_usize(f[5], "m")?,
            l: if f[6].is_empty() {
                None
            } else {
                Some(parse_usize(f[6], "l")? as u32)
            },
            graphs: parse_usize(f[7], "graphs")?,
            unsat: parse_usize(f[8], "unsat")?,
            phi_unsat: parse_f64(f[9], "phi_unsat")?,
            sigma_mean: opt_f64(f[10], "sigma_mean")?,
            sigma_std: opt_f64(f[11], "sigma_std")?,
            mean_log2_rg_over_n: opt_f64(f[12], "mean_log2_rg_n")?,
            std_log2_rg_over_n: opt_f64(f[13], "std_log2_rg_n")?,
            budget_errors: parse_usize(f[14], "budget_errors")?,
            wall_ms: parse_usize(f[15], "wall_ms")? as u128,
        });
    }
    Ok(records)
}

// ----------------------------------------------------------------------
// Derived statistics
// ----------------------------------------------------------------------

/// Critical-density estimate: the five grid points with `phi` closest to
/// 1/2 are fitted with a least-squares line and the crossing of 1/2 is
/// read off the fit.
#[derive(Debug, Clone)]
pub struct AlphaStarEstimate {
    pub alpha_star: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Set when the input never straddles 1/2: the crossing is an
    /// extrapolation beyond the data.
    pub extrapolated: bool,
    pub selected: Vec<(f64, f64)>,
}

pub fn alpha_star(points: &[(f64, f64)]) -> Result<AlphaStarEstimate> {
    if points.len() < 5 {
        return Err(Error::InvalidParams(format!(
            "alpha-star interpolation needs >= 5 grid points, got {}",
            points.len()
        )));
    }
    let mut ranked: Vec<(f64, f64)> = points.to_vec();
    ranked.sort_by(|a, b| {
        let da = (a.1 - 0.5).abs();
        let db = (b.1 - 0.5).abs();
        da.partial_cmp(&db)
            .unwrap()
            .then(a.0.partial_cmp(&b.0).unwrap())
    });
    let selected: Vec<(f64, f64)> = ranked[..5].to_vec();
    let n = 5.0;
    let mean_a = selected.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_p = selected.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = selected.iter().map(|p| (p.0 - mean_a).powi(2)).sum();
    let sxy: f64 = selected
        .iter()
        .map(|p| (p.0 - mean_a) * (p.1 - mean_p))
        .sum();
    if sxx == 0.0 || sxy == 0.0 {
        return Err(Error::DegenerateFit(
            "fitted line has zero slope; phi does not vary across the selected points".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_p - slope * mean_a;
    let alpha_star = (0.5 - intercept) / slope;
    let any_low = points.iter().any(|p| p.1 <= 0.5);
    let any_high = points.iter().any(|p| p.1 >= 0.5);
    Ok(AlphaStarEstimate {
        alpha_star,
        slope,
        intercept,
        extrapolated: !(any_low && any_high),
        selected,
    })
}

/// Restart-budget scaling variable: N / log2(R).
pub fn gamma_of(n: usize, restarts: u64) -> Result<f64> {
    if restarts < 2 {
        return Err(Error::InvalidParams(
            "gamma is defined for R >= 2".into(),
        ));
    }
    Ok(n as f64 / (restarts as f64).log2())
}

/// A configuration is balanced when every bit's negated and un-negated
/// occurrence counts differ by at most one.
pub fn is_balanced(inst: &AdsatInstance, neg: &NegationAssignment) -> bool {
    let mut negated = vec![0i64; inst.n_bits()];
    let mut degree = vec![0i64; inst.n_bits()];
    for (a, clause) in inst.clauses().iter().enumerate() {
        for (j, &b) in clause.iter().enumerate() {
            degree[b as usize] += 1;
            if neg.edge(inst.edge_index(a, j)) {
                negated[b as usize] += 1;
            }
        }
    }
    (0..inst.n_bits()).all(|b| (degree[b] - 2 * negated[b]).abs() <= 1)
}

/// Balance statistics over the UNSAT-witness configurations of a batch of
/// runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceStats {
    pub balanced: usize,
    pub total: usize,
}

impl BalanceStats {
    pub fn fraction(&self) -> Option<f64> {
        if self.total == 0 {
            None
        } else {
            Some(self.balanced as f64 / self.total as f64)
        }
    }

    /// Normal-approximation 95% half-width.
    pub fn ci95_half_width(&self) -> Option<f64> {
        let p = self.fraction()?;
        Some(1.96 * (p * (1.0 - p) / self.total as f64).sqrt())
    }
}

pub fn balance_statistics<'a, I>(items: I) -> BalanceStats
where
    I: IntoIterator<Item = (&'a AdsatInstance, Option<&'a NegationAssignment>)>,
{
    let mut stats = BalanceStats {
        balanced: 0,
        total: 0,
    };
    for (inst, witness) in items {
        if let Some(neg) = witness {
            stats.total += 1;
            if is_balanced(inst, neg) {
                stats.balanced += 1;
            }
        }
    }
    stats
}

/// One point of the critical-density-vs-restart-budget curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub restarts: u64,
    pub gamma: f64,
    pub alpha_star: f64,
    pub extrapolated: bool,
}

/// Runs the configured sweep once per restart budget and interpolates the
/// critical density each time. The plateau flag is set when the last two
/// estimates differ by less than `plateau_eps`.
pub fn alpha_star_curve(
    cfg: &SweepConfig,
    restart_grid: &[u64],
    plateau_eps: f64,
) -> Result<(Vec<CurvePoint>, bool)> {
    let mut points = Vec::with_capacity(restart_grid.len());
    for &r in restart_grid {
        let mut sub = cfg.clone();
        sub.restarts = r;
        let records = run_sweep(&sub, None, false)?;
        let phi: Vec<(f64, f64)> = records.iter().map(|rec| (rec.alpha, rec.phi_unsat)).collect();
        let est = alpha_star(&phi)?;
        points.push(CurvePoint {
            restarts: r,
            gamma: gamma_of(cfg.n, r)?,
            alpha_star: est.alpha_star,
            extrapolated: est.extrapolated,
        });
    }
    let plateau = points.len() >= 2 && {
        let a = points[points.len() - 2].alpha_star;
        let b = points[points.len() - 1].alpha_star;
        (a - b).abs() < plateau_eps
    };
    Ok((points, plateau))
}
