//! Command-line front end: instance generation, the exact deciders, the
//! annealing heuristics and the experiment sweeps.

use adsat::anneal::{self, RestartTraceRow};
use adsat::harness::{self, AlgorithmKind, GridSpec, SweepConfig};
use adsat::instance::{
    generate_random_instance, generate_regular_instance, AdsatInstance, EnsembleParams,
    NegationAssignment,
};
use adsat::satcore::{materialize, CountOptions};
use adsat::{complete, decide_2adsat};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "adsat",
    about = "Adversarial SAT solvers and phase-transition experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from the random or regular ensemble.
    Gen(GenArgs),
    /// Decide an instance exactly by enumerating all free negations.
    DecideComplete(DecideCompleteArgs),
    /// Decide a K=2 instance in polynomial time via graph classification.
    #[command(name = "decide-2adsat")]
    Decide2adsat(Decide2Args),
    /// Simulated annealing with restarts on one instance.
    Anneal(AnnealArgs),
    /// The improved (clause-peeling) annealing variant on one instance.
    AnnealIv(AnnealIvArgs),
    /// Phase-transition sweep over a density grid, one CSV row per point.
    Sweep(SweepArgs),
    /// Interpolate the critical density from a sweep CSV.
    AlphaStar(AlphaStarArgs),
    /// Critical density vs restart budget (gamma) curve.
    GammaCurve(GammaCurveArgs),
    /// Fraction of balanced UNSAT-witness configurations.
    BalanceStats(BalanceStatsArgs),
    /// Export an instance (plus optional negations) as DIMACS CNF.
    ToDimacs(ToDimacsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Clause density; M = round(alpha * N).
    #[arg(long, conflicts_with_all = ["m", "l_degree"])]
    alpha: Option<f64>,
    /// Exact clause count.
    #[arg(long, conflicts_with = "l_degree")]
    m: Option<usize>,
    /// Per-bit degree of a regular instance (K*M = L*N).
    #[arg(long)]
    l_degree: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecideCompleteArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Refuse to enumerate more than 2^cap configurations.
    #[arg(long, default_value_t = complete::DEFAULT_FREE_BIT_CAP)]
    cap_bits: usize,
    /// Where to write the UNSAT witness negation file.
    #[arg(long)]
    witness_out: Option<PathBuf>,
}

#[derive(Args)]
struct Decide2Args {
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 500)]
    iters: u64,
    #[arg(long, default_value_t = 100)]
    restarts: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Per-step CSV trace: restart, t, beta, sigma, accepted.
    #[arg(long)]
    schedule_trace: Option<PathBuf>,
    #[arg(long)]
    witness_out: Option<PathBuf>,
    /// Node budget per model count.
    #[arg(long)]
    count_budget: Option<u64>,
}

#[derive(Args)]
struct AnnealIvArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Steps per chunk.
    #[arg(long, default_value_t = 500)]
    iters: u64,
    #[arg(long, default_value_t = 100)]
    restarts: u64,
    /// Extra clauses; defaults to ceil(N/2).
    #[arg(long)]
    delta_m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    schedule_trace: Option<PathBuf>,
    #[arg(long)]
    witness_out: Option<PathBuf>,
    #[arg(long)]
    count_budget: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// Comma-separated degrees for a regular-graph sweep, e.g. "5,6,7".
    #[arg(long, value_delimiter = ',')]
    l_grid: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    graphs: usize,
    /// complete | sa | iv | adsat2
    #[arg(long)]
    algorithm: String,
    #[arg(long, default_value_t = 500)]
    iters: u64,
    #[arg(long, default_value_t = 100)]
    restarts: u64,
    #[arg(long)]
    delta_m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Skip grid points whose rows already exist in the output file.
    #[arg(long, default_value_t = false)]
    resume: bool,
    #[arg(long, default_value_t = complete::DEFAULT_FREE_BIT_CAP)]
    cap_bits: usize,
    #[arg(long)]
    count_budget: Option<u64>,
}

#[derive(Args)]
struct AlphaStarArgs {
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct GammaCurveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    alpha_min: f64,
    #[arg(long)]
    alpha_max: f64,
    #[arg(long)]
    alpha_step: f64,
    #[arg(long, default_value_t = 100)]
    graphs: usize,
    #[arg(long, default_value_t = 2000)]
    iters: u64,
    #[arg(long)]
    delta_m: Option<usize>,
    /// Comma-separated restart budgets, e.g. "250,500,1000,2000,4000".
    #[arg(long, value_delimiter = ',')]
    restarts_grid: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    plateau_eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    count_budget: Option<u64>,
}

#[derive(Args)]
struct BalanceStatsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    graphs: usize,
    /// sa | iv
    #[arg(long, default_value = "iv")]
    algorithm: String,
    #[arg(long, default_value_t = 500)]
    iters: u64,
    #[arg(long, default_value_t = 100)]
    restarts: u64,
    #[arg(long)]
    delta_m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    count_budget: Option<u64>,
}

#[derive(Args)]
struct ToDimacsArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Negation file; all-zero negations when absent.
    #[arg(long)]
    negations: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::DecideComplete(a) => decide_complete(a),
        Command::Decide2adsat(a) => decide_2(a),
        Command::Anneal(a) => anneal_cmd(a),
        Command::AnnealIv(a) => anneal_iv_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::AlphaStar(a) => alpha_star_cmd(a),
        Command::GammaCurve(a) => gamma_curve(a),
        Command::BalanceStats(a) => balance_stats_cmd(a),
        Command::ToDimacs(a) => to_dimacs(a),
    }
}

fn load_instance(path: &Path) -> Result<AdsatInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    AdsatInstance::from_text(&text).context("parsing instance file")
}

fn count_options(budget: Option<u64>) -> CountOptions {
    CountOptions {
        node_budget: budget,
        ..CountOptions::default()
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let inst = if let Some(l) = a.l_degree {
        generate_regular_instance(a.n, l, a.k, &mut rng)?
    } else {
        let alpha = match (a.alpha, a.m) {
            (Some(alpha), None) => alpha,
            (None, Some(m)) => m as f64 / a.n as f64,
            (None, None) => bail!("one of --alpha, --m, --l-degree is required"),
            _ => unreachable!("clap enforces the conflict"),
        };
        generate_random_instance(&EnsembleParams::random(a.n, a.k, alpha), &mut rng)?
    };
    std::fs::write(&a.out, inst.to_text())?;
    println!(
        "wrote {} (N={} M={} K={})",
        a.out.display(),
        inst.n_bits(),
        inst.n_clauses(),
        inst.k()
    );
    Ok(())
}

fn decide_complete(a: DecideCompleteArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let verdict = complete::complete_adsat_with_cap(&inst, a.cap_bits)?;
    println!("status {}", status_label(verdict.status));
    println!("configs_tested {}", verdict.configs_tested);
    if let (Some(path), Some(witness)) = (&a.witness_out, &verdict.witness_negations) {
        std::fs::write(path, witness.to_text(&inst))?;
        println!("witness {}", path.display());
    }
    Ok(())
}

fn status_label(s: complete::AdsatStatus) -> &'static str {
    match s {
        complete::AdsatStatus::Sat => "SAT",
        complete::AdsatStatus::Unsat => "UNSAT",
    }
}

fn decide_2(a: Decide2Args) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let out = decide_2adsat(&inst)?;
    println!("status {}", status_label(out.status));
    for (i, (nodes, class)) in out.components.iter().enumerate() {
        println!(
            "component {i}: class {} nodes {}",
            class.label(),
            nodes
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    Ok(())
}

fn write_trace(path: &Path, rows: &[RestartTraceRow]) -> Result<()> {
    let mut out = String::from("restart,t,beta,sigma,accepted\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            r.restart,
            r.row.step,
            r.row.beta,
            r.row.sigma_candidate,
            u8::from(r.row.accepted)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn report_restart_outcome(
    inst: &AdsatInstance,
    out: &anneal::RestartOutcome,
    witness_out: Option<&Path>,
) -> Result<()> {
    println!(
        "status {}",
        if out.r_g.is_some() { "UNSAT" } else { "SAT-so-far" }
    );
    println!("sigma_star {:.6}", out.sigma_star);
    if let Some(r) = out.r_g {
        println!("r_g {r}");
    }
    println!("restarts_run {}", out.restarts_run);
    if let (Some(path), Some(witness)) = (witness_out, &out.unsat_witness) {
        std::fs::write(path, witness.to_text(inst))?;
        println!("witness {}", path.display());
    }
    Ok(())
}

fn anneal_cmd(a: AnnealArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = a.schedule_trace.as_ref().map(|_| Vec::new());
    let out = anneal::restart_sa_traced(
        &inst,
        a.restarts,
        a.iters,
        count_options(a.count_budget),
        rows.as_mut(),
        &mut rng,
    )?;
    if let (Some(path), Some(rows)) = (&a.schedule_trace, &rows) {
        write_trace(path, rows)?;
    }
    report_restart_outcome(&inst, &out, a.witness_out.as_deref())
}

fn anneal_iv_cmd(a: AnnealIvArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let delta_m = a.delta_m.unwrap_or_else(|| anneal::default_delta_m(inst.n_bits()));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = a.schedule_trace.as_ref().map(|_| Vec::new());
    let out = anneal::improved_variant_traced(
        &inst,
        delta_m,
        a.restarts,
        a.iters,
        count_options(a.count_budget),
        rows.as_mut(),
        &mut rng,
    )?;
    if let (Some(path), Some(rows)) = (&a.schedule_trace, &rows) {
        write_trace(path, rows)?;
    }
    println!("delta_m {delta_m}");
    report_restart_outcome(&inst, &out, a.witness_out.as_deref())
}

fn alpha_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || max < min {
        bail!("need alpha-min <= alpha-max and a positive alpha-step");
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let alpha = min + step * i as f64;
        if alpha > max + step * 0.5 {
            break;
        }
        grid.push(alpha);
        i += 1;
    }
    Ok(grid)
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let algorithm = AlgorithmKind::parse(&a.algorithm)
        .with_context(|| format!("unknown algorithm `{}`", a.algorithm))?;
    let grid = if !a.l_grid.is_empty() {
        GridSpec::LDegrees(a.l_grid.clone())
    } else {
        match (a.alpha_min, a.alpha_max, a.alpha_step) {
            (Some(lo), Some(hi), Some(step)) => GridSpec::Alpha(alpha_grid(lo, hi, step)?),
            _ => bail!("provide --alpha-min/--alpha-max/--alpha-step or --l-grid"),
        }
    };
    Ok(SweepConfig {
        n: a.n,
        k: a.k,
        grid,
        graphs_per_point: a.graphs,
        algorithm,
        iters: a.iters,
        restarts: a.restarts,
        delta_m: a.delta_m,
        master_seed: a.seed,
        free_bit_cap: a.cap_bits,
        count_budget: a.count_budget,
    })
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = sweep_config(&a)?;
    let records = harness::run_sweep(&cfg, Some(&a.out), a.resume)?;
    for r in &records {
        println!(
            "alpha {:.4} m {} phi_unsat {:.3} ({} / {} unsat, {} budget errors)",
            r.alpha, r.m, r.phi_unsat, r.unsat, r.graphs, r.budget_errors
        );
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn alpha_star_cmd(a: AlphaStarArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.csv)?;
    let records = harness::parse_csv(&text)?;
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.alpha, r.phi_unsat)).collect();
    let est = harness::alpha_star(&points)?;
    println!("alpha_star {:.6}", est.alpha_star);
    println!("slope {:.6}", est.slope);
    println!("extrapolated {}", est.extrapolated);
    for (alpha, phi) in &est.selected {
        println!("selected {alpha:.6} {phi:.6}");
    }
    Ok(())
}

fn gamma_curve(a: GammaCurveArgs) -> Result<()> {
    if a.restarts_grid.is_empty() {
        bail!("--restarts-grid must list at least one restart budget");
    }
    let cfg = SweepConfig {
        n: a.n,
        k: a.k,
        grid: GridSpec::Alpha(alpha_grid(a.alpha_min, a.alpha_max, a.alpha_step)?),
        graphs_per_point: a.graphs,
        algorithm: AlgorithmKind::Iv,
        iters: a.iters,
        restarts: 0, // replaced per grid value
        delta_m: a.delta_m,
        master_seed: a.seed,
        free_bit_cap: complete::DEFAULT_FREE_BIT_CAP,
        count_budget: a.count_budget,
    };
    let (points, plateau) = harness::alpha_star_curve(&cfg, &a.restarts_grid, a.plateau_eps)?;
    let mut csv = String::from("restarts,gamma,alpha_star,extrapolated\n");
    for p in &points {
        println!(
            "R {} gamma {:.6} alpha_star {:.6}{}",
            p.restarts,
            p.gamma,
            p.alpha_star,
            if p.extrapolated { " (extrapolated)" } else { "" }
        );
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{}",
            p.restarts, p.gamma, p.alpha_star, p.extrapolated
        );
    }
    println!("plateau {plateau}");
    if let Some(path) = &a.out {
        std::fs::write(path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn balance_stats_cmd(a: BalanceStatsArgs) -> Result<()> {
    let algorithm = match a.algorithm.as_str() {
        "sa" => AlgorithmKind::Sa,
        "iv" => AlgorithmKind::Iv,
        other => bail!("balance-stats supports sa or iv, got `{other}`"),
    };
    let cfg = SweepConfig {
        n: a.n,
        k: a.k,
        grid: GridSpec::Alpha(vec![a.alpha]),
        graphs_per_point: a.graphs,
        algorithm,
        iters: a.iters,
        restarts: a.restarts,
        delta_m: a.delta_m,
        master_seed: a.seed,
        free_bit_cap: complete::DEFAULT_FREE_BIT_CAP,
        count_budget: a.count_budget,
    };
    let runs = harness::run_point(&cfg, 0)?;
    let stats = harness::balance_statistics(
        runs.iter().map(|r| (&r.instance, r.witness.as_ref())),
    );
    println!("graphs {}", runs.len());
    println!("unsat_witnesses {}", stats.total);
    match (stats.fraction(), stats.ci95_half_width()) {
        (Some(frac), Some(ci)) => {
            println!("balanced_fraction {frac:.6}");
            println!("ci95_half_width {ci:.6}");
        }
        _ => println!("balanced_fraction n/a (no UNSAT witnesses)"),
    }
    Ok(())
}

fn to_dimacs(a: ToDimacsArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let neg = match &a.negations {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            NegationAssignment::from_text(&inst, &text)?
        }
        None => NegationAssignment::zeros(&inst),
    };
    let dimacs = materialize(&inst, &neg).to_dimacs();
    match &a.out {
        Some(path) => {
            std::fs::write(path, dimacs)?;
            println!("wrote {}", path.display());
        }
        None => print!("{dimacs}"),
    }
    Ok(())
}
