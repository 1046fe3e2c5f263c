use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bubble_lp::certificates;
use bubble_lp::config::{Mode, OutputFormat, Strictness};
use bubble_lp::io::{self, Report};
use bubble_lp::{solve_feasibility, Config, Problem, SolveError, Verdict};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

const EXIT_FEASIBLE: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bubble-lp", version, about = "Exact LP feasibility for {Ax = b, x >= 0}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide feasibility of the problem in FILE and print a report.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Re-check a JSON report against the problem it was produced for.
    Check { file: PathBuf, report: PathBuf },
    /// Print a random problem in the text format.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Largest absolute value of an entry.
        #[arg(long, default_value_t = 5)]
        coeff_bound: i64,
        /// Choose b = A x0 for a random x0 >= 0.
        #[arg(long)]
        planted: bool,
    },
    /// Solve a fixed suite of random instances and summarise.
    Bench {
        #[arg(long, value_enum, default_value_t = Suite::Small)]
        suite: Suite,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Small,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    FloatShadow,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrictnessArg {
    Abort,
    Warn,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Abort once a rational in the solver state needs this many bits.
    #[arg(long)]
    max_bits: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reaction to a failed potential check (default: warn in release builds).
    #[arg(long, value_enum)]
    strictness: Option<StrictnessArg>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Leave the audit trail out of the report.
    #[arg(long)]
    no_audit: bool,
    /// Keep the unrounded bubble coefficients.
    #[arg(long)]
    no_rounding: bool,
    /// Re-derive every bubble step independently.
    #[arg(long)]
    cross_check: bool,
}

impl ConfigArgs {
    fn to_config(&self) -> Config {
        let mut c = Config::default();
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Exact => Mode::Exact,
                ModeArg::FloatShadow => Mode::FloatShadow,
            };
        }
        if let Some(b) = self.max_bits {
            c.max_bits = b;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(s) = self.strictness {
            c.strictness = match s {
                StrictnessArg::Abort => Strictness::Abort,
                StrictnessArg::Warn => Strictness::Warn,
            };
        }
        if let Some(f) = self.format {
            c.format = match f {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Text => OutputFormat::Text,
            };
        }
        c.emit_audit = !self.no_audit;
        c.rounding = !self.no_rounding;
        c.cross_check |= self.cross_check;
        c
    }
}

fn read_problem(path: &Path) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    io::parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn error_code(e: &SolveError) -> u8 {
    match e {
        SolveError::Dimension(_) => EXIT_INPUT,
        _ => EXIT_INTERNAL,
    }
}

fn solve(file: &Path, config: &Config) -> u8 {
    let problem = match read_problem(file) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match solve_feasibility(&problem, config) {
        Ok(sol) => {
            print!("{}", io::emit_report(&sol, config));
            match sol.verdict {
                Verdict::Feasible(_) => EXIT_FEASIBLE,
                Verdict::Infeasible => EXIT_INFEASIBLE,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn check(file: &Path, report_path: &Path) -> u8 {
    let problem = match read_problem(file) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let report: Report = match std::fs::read_to_string(report_path)
        .map_err(|e| e.to_string())
        .and_then(|t| io::parse_report(&t).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", report_path.display());
            return EXIT_INPUT;
        }
    };
    let mut failures = Vec::new();
    match (report.verdict.as_str(), &report.x) {
        ("feasible", Some(x)) => {
            if !certificates::check_feasible(&problem, x) {
                failures.push("x is not a feasible point".to_string());
            }
        }
        ("infeasible", None) => {
            if report.audit_log().is_none() {
                failures.push("infeasible report carries no audit trail".to_string());
            }
        }
        _ => failures.push(format!("inconsistent verdict {:?}", report.verdict)),
    }
    if let Some(log) = report.audit_log() {
        if let Err(why) = certificates::replay_audit_detailed(&problem, &log) {
            failures.push(format!("audit replay: {why}"));
        }
        let terminal_feasible = matches!(log.terminal, certificates::Terminal::Feasible { .. });
        if terminal_feasible != (report.verdict == "feasible") {
            failures.push("verdict disagrees with the audit terminal".to_string());
        }
    }
    if failures.is_empty() {
        println!("ok: {} report verified", report.verdict);
        EXIT_FEASIBLE
    } else {
        for f in &failures {
            println!("rejected: {f}");
        }
        EXIT_INFEASIBLE
    }
}

fn bench(config: &Config) -> u8 {
    let instances: Vec<(u64, usize, usize, bool)> = (0..100u64)
        .map(|k| {
            let n = 2 + (k % 7) as usize;
            let m = (1 + ((k / 7) % 4) as usize).min(n);
            (config.seed.wrapping_add(k), m, n, k % 2 == 0)
        })
        .collect();
    let start = Instant::now();
    let results: Vec<_> = instances
        .par_iter()
        .map(|&(seed, m, n, planted)| {
            let p = io::gen_random(seed, m, n, 5, planted);
            let t = Instant::now();
            let r = solve_feasibility(&p, config);
            (p, r, t.elapsed())
        })
        .collect();
    let (mut feasible, mut infeasible, mut failed, mut bad_audit) = (0, 0, 0, 0);
    let (mut outer, mut inner, mut max_bits) = (0usize, 0u64, 0u64);
    for (p, r, _) in &results {
        match r {
            Ok(sol) => {
                match sol.verdict {
                    Verdict::Feasible(_) => feasible += 1,
                    Verdict::Infeasible => infeasible += 1,
                }
                if !certificates::replay_audit(p, &sol.audit) {
                    bad_audit += 1;
                }
                outer += sol.stats.outer_iters;
                inner += sol.stats.bubble_iters_total;
                max_bits = max_bits.max(sol.stats.max_bitsize);
            }
            Err(e) => {
                log::error!("{e}");
                failed += 1;
            }
        }
    }
    let slowest = results.iter().map(|r| r.2).max().unwrap_or_default();
    println!("instances: {}", results.len());
    println!("feasible: {feasible}, infeasible: {infeasible}, failed: {failed}, bad audits: {bad_audit}");
    println!("outer iterations: {outer}, bubble iterations: {inner}, max bit size: {max_bits}");
    println!(
        "wall time: {:.2}s, slowest instance: {:.3}s",
        start.elapsed().as_secs_f64(),
        slowest.as_secs_f64()
    );
    if failed + bad_audit == 0 {
        EXIT_FEASIBLE
    } else {
        EXIT_INTERNAL
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { file, config } => solve(&file, &config.to_config()),
        Command::Check { file, report } => check(&file, &report),
        Command::Random { seed, m, n, coeff_bound, planted } => {
            if m > n || coeff_bound < 1 {
                eprintln!("error: random needs m <= n and coeff-bound >= 1");
                EXIT_INPUT
            } else {
                print!("{}", io::format_problem(&io::gen_random(seed, m, n, coeff_bound, planted)));
                EXIT_FEASIBLE
            }
        }
        Command::Bench { suite: Suite::Small, config } => bench(&config.to_config()),
    };
    ExitCode::from(code)
}
