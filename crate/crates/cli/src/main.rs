use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use ara::constraint::{HeuristicMode, SolverConfig};
use ara::report::{exit_code, run, write_report, RunConfig, Status};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ara",
    version,
    about = "Amortised innermost runtime analysis of term rewrite systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a polynomial certificate of increasing degree.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Heuristic {
    None,
    Shift,
    Interleave,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// TRS in TPDB format.
    file: PathBuf,
    /// Highest polynomial degree to try.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    max_degree: u32,
    /// Constructor annotation shape; `none` leaves base vectors to the solver.
    #[arg(long, value_enum, default_value = "none")]
    heuristic: Heuristic,
    /// Use cost-free derivations at every degree (default: from degree 2 on).
    #[arg(long)]
    costfree: bool,
    /// Relative mode: certify some non-empty subset of the strict rules.
    #[arg(long)]
    relative: bool,
    /// SMT solver executable (default: $ARA_SOLVER, then z3).
    #[arg(long)]
    solver: Option<String>,
    /// Arguments for the solver, replacing the defaults.
    #[arg(long, allow_hyphen_values = true)]
    solver_args: Option<String>,
    /// Wall-clock limit per solver call, in seconds.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    /// Maximal start-term size for empirical verification; 0 skips it.
    #[arg(long, default_value_t = 6)]
    verify: usize,
    /// Write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print the derivation of every rule with the solved annotations.
    #[arg(long)]
    explain: bool,
}

fn config(a: AnalyzeArgs) -> RunConfig {
    let mut solver = match &a.solver {
        Some(p) => SolverConfig::for_path(p),
        None => SolverConfig::from_env(),
    };
    if let Some(args) = &a.solver_args {
        solver.args = args.split_whitespace().map(str::to_string).collect();
    }
    solver.timeout = Duration::from_secs(a.timeout);
    let mut c = RunConfig::new(a.file);
    c.max_degree = a.max_degree as usize;
    c.heuristic = match a.heuristic {
        Heuristic::None => HeuristicMode::None,
        Heuristic::Shift => HeuristicMode::Shift,
        Heuristic::Interleave => HeuristicMode::Interleave,
    };
    c.cost_free = a.costfree.then_some(true);
    c.relative = a.relative;
    c.solver = solver;
    c.verify_size = a.verify;
    c.json_out = a.json;
    c.explain = a.explain;
    c
}

fn main() -> ExitCode {
    let Command::Analyze(args) = Cli::parse().command;
    let config = config(args);
    let report = run(&config);
    for e in &report.explanation {
        println!("{e}");
    }
    for a in &report.attempts {
        eprintln!(
            "degree {}: {} ({} unknowns, {} atoms, {}, {:.2} s)",
            a.degree,
            a.outcome,
            a.variables,
            a.atoms,
            if a.linear_only {
                "linear"
            } else {
                "non-linear"
            },
            a.seconds
        );
    }
    for d in &report.diagnostics {
        eprintln!("note: {d}");
    }
    if let Some(v) = &report.verification {
        let slack = v
            .soundness
            .max_slack
            .as_ref()
            .map_or("-".to_string(), ara::annotation::rational_string);
        println!(
            "verification (size <= {}): {} start terms, {} violations, {} exhausted, min slack {}; potential bound {}",
            v.max_size,
            v.soundness.terms_checked,
            v.soundness.violations.len(),
            v.soundness.budget_exhausted.len(),
            slack,
            if v.potential_bound.passed() { "ok" } else { "FAILED" }
        );
    }
    match report.status {
        Status::InputError(_) | Status::SolverError(_) => eprintln!("{}", report.summary()),
        _ => println!("{}", report.summary()),
    }
    if let Some(path) = &config.json_out {
        if let Err(e) = write_report(&report, path) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(exit_code(&report.status) as u8)
}
