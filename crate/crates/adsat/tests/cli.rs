//! End-to-end checks of the command-line interface and the on-disk file
//! formats, driving the real binary.

use std::path::Path;
use std::process::Command;

fn adsat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adsat"))
}

fn run(args: &[&str]) -> (String, String, bool) {
    let out = adsat().args(args).output().expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.success(),
    )
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_decide_anneal_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.adsat");
    let (stdout, stderr, ok) = run(&[
        "gen", "--n", "7", "--k", "3", "--alpha", "1.6", "--seed", "5", "--out",
        &path_str(&inst),
    ]);
    assert!(ok, "gen failed: {stderr}");
    assert!(stdout.contains("N=7"));

    let witness = dir.path().join("w.neg");
    let (stdout, stderr, ok) = run(&[
        "decide-complete",
        "--instance",
        &path_str(&inst),
        "--cap-bits",
        "40",
        "--witness-out",
        &path_str(&witness),
    ]);
    assert!(ok, "decide-complete failed: {stderr}");
    assert!(stdout.contains("status "));
    assert!(stdout.contains("configs_tested "));
    let unsat = stdout.contains("status UNSAT");
    assert_eq!(witness.exists(), unsat);

    let trace = dir.path().join("trace.csv");
    let (stdout, stderr, ok) = run(&[
        "anneal",
        "--instance",
        &path_str(&inst),
        "--iters",
        "80",
        "--restarts",
        "20",
        "--seed",
        "3",
        "--schedule-trace",
        &path_str(&trace),
    ]);
    assert!(ok, "anneal failed: {stderr}");
    assert!(stdout.contains("sigma_star "));
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("restart,t,beta,sigma,accepted\n"));
    assert!(trace_text.lines().count() > 1);
    // beta at t=100 on the plain ramp is 20.
    let beta_at_100: Vec<&str> = trace_text
        .lines()
        .filter(|l| l.split(',').nth(1) == Some("100"))
        .collect();
    for line in beta_at_100 {
        let beta: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((beta - 20.0).abs() < 1e-5);
    }

    let (stdout, stderr, ok) = run(&[
        "anneal-iv",
        "--instance",
        &path_str(&inst),
        "--iters",
        "60",
        "--restarts",
        "10",
        "--delta-m",
        "3",
        "--seed",
        "3",
    ]);
    assert!(ok, "anneal-iv failed: {stderr}");
    assert!(stdout.contains("delta_m 3"));
    assert!(stdout.contains("restarts_run "));
}

#[test]
fn decide_2adsat_prints_component_classes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("k2.adsat");
    // Triangle plus a pendant edge and a separate path: one single-cycle
    // component (after pruning) and one tree component.
    std::fs::write(
        &inst,
        "adsat 6 5 2 random\n0 1\n1 2\n2 0\n2 3\n4 5\n",
    )
    .unwrap();
    let (stdout, _, ok) = run(&["decide-2adsat", "--instance", &path_str(&inst)]);
    assert!(ok);
    assert!(stdout.contains("status SAT"));
    assert!(stdout.contains("class single-cycle"));
    assert!(stdout.contains("class tree"));
}

#[test]
fn malformed_instance_is_rejected_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("bad.adsat");
    std::fs::write(&inst, "adsat 3 1 3 random\n0 1\n").unwrap();
    let (_, stderr, ok) = run(&["decide-complete", "--instance", &path_str(&inst)]);
    assert!(!ok);
    assert!(stderr.contains("parse") || stderr.contains("line"), "stderr: {stderr}");
}

#[test]
fn sweep_resume_and_alpha_star() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--n",
        "6",
        "--k",
        "3",
        "--alpha-min",
        "0.84",
        "--alpha-max",
        "2.5",
        "--alpha-step",
        "0.1666666",
        "--graphs",
        "24",
        "--algorithm",
        "sa",
        "--iters",
        "50",
        "--restarts",
        "12",
        "--seed",
        "99",
        "--out",
    ];
    let mut full = args.to_vec();
    let csv_s = path_str(&csv);
    full.push(&csv_s);
    let (stdout, stderr, ok) = adsat()
        .args(&full)
        .output()
        .map(|o| {
            (
                String::from_utf8_lossy(&o.stdout).into_owned(),
                String::from_utf8_lossy(&o.stderr).into_owned(),
                o.status.success(),
            )
        })
        .unwrap();
    assert!(ok, "sweep failed: {stderr}");
    assert!(stdout.contains("wrote"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("schema,algorithm,"));
    let rows = text.lines().count() - 1;
    assert_eq!(rows, 11);

    // Resume rewrites nothing: identical bytes (wall times included,
    // because every point is skipped).
    let mut resumed = full.clone();
    resumed.push("--resume");
    let out = adsat().args(&resumed).output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);

    let (stdout, stderr, ok) = run(&["alpha-star", "--csv", &csv_s]);
    assert!(ok, "alpha-star failed: {stderr}");
    assert!(stdout.contains("alpha_star "), "stdout: {stdout}");
}

#[test]
fn dimacs_export_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("inst.adsat");
    std::fs::write(&inst_path, "adsat 4 2 3 random\n0 1 2\n1 2 3\n").unwrap();
    let (stdout, _, ok) = run(&["to-dimacs", "--instance", &path_str(&inst_path)]);
    assert!(ok);
    assert!(stdout.starts_with("p cnf 4 2\n"));
    assert!(stdout.contains("1 2 3 0"));

    // With a negation file: bit 1's second occurrence may carry a 1.
    let neg_path = dir.path().join("neg.neg");
    std::fs::write(&neg_path, "neg 2 3\n0 0 0\n1 0 0\n").unwrap();
    let (stdout, _, ok) = run(&[
        "to-dimacs",
        "--instance",
        &path_str(&inst_path),
        "--negations",
        &path_str(&neg_path),
    ]);
    assert!(ok);
    assert!(stdout.contains("-2 3 4 0"), "stdout: {stdout}");
}

#[test]
fn balance_stats_reports_fraction() {
    let (stdout, stderr, ok) = run(&[
        "balance-stats",
        "--n",
        "8",
        "--k",
        "3",
        "--alpha",
        "2.5",
        "--graphs",
        "10",
        "--algorithm",
        "iv",
        "--iters",
        "60",
        "--restarts",
        "20",
        "--delta-m",
        "3",
        "--seed",
        "11",
    ]);
    assert!(ok, "balance-stats failed: {stderr}");
    assert!(stdout.contains("unsat_witnesses "));
    assert!(
        stdout.contains("balanced_fraction"),
        "stdout: {stdout}"
    );
}
