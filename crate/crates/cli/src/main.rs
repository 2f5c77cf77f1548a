//! `spillover-eq`: solve, verify and analyse two-player all-pay contests
//! with prize spillovers.
//!
//! Exit codes: 0 on success, 1 when the contest fails validation or a run
//! fails, 2 on usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spillover_core::equilibrium::{AtomRule, SolveOptions, DEFAULT_GRID_N, DEFAULT_VERIFY_TOL};
use spillover_core::vie::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use spillover_core::Method;

#[derive(Debug, Parser)]
#[command(name = "spillover-eq", version, about = "Equilibria of all-pay contests with prize spillovers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the equilibrium and write CDFs and densities per grid node.
    Solve(Common),
    /// Solve, then check indifference, deviations, method and oracle agreement.
    Verify(Common),
    /// Solve across a range of one parameter.
    Sweep(SweepArgs),
    /// Check that a two-player equilibrium survives in a multiplayer contest.
    Multi(MultiArgs),
    /// Scale the advantaged player's prize so no rent remains.
    Balance(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Matrix,
    Picard,
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AtomRuleArg {
    Paper,
    Indifferent,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Contest configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Grid cells on [0, horizon].
    #[arg(long, default_value_t = DEFAULT_GRID_N, value_parser = parse_grid_n)]
    grid_n: usize,
    /// Score horizon; chosen automatically when absent.
    #[arg(long, value_parser = parse_positive)]
    horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Matrix)]
    method: MethodArg,
    /// Verification and deviation tolerance, relative to the larger cost at the support bound.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOL, value_parser = parse_positive)]
    tol: f64,
    /// Stopping tolerance for the Picard method.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_positive)]
    picard_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = AtomRuleArg::Paper)]
    atom_rule: AtomRuleArg,
}

impl Common {
    fn method(&self) -> Method {
        match self.method {
            MethodArg::Matrix => Method::Matrix,
            MethodArg::Picard => Method::Picard {
                tol: self.picard_tol,
                max_iter: self.max_iter,
            },
            MethodArg::Cdf => Method::CdfDirect,
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            grid_n: self.grid_n,
            horizon: self.horizon,
            method: self.method(),
            atom_rule: match self.atom_rule {
                AtomRuleArg::Paper => AtomRule::Paper,
                AtomRuleArg::Indifferent => AtomRule::Indifferent,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter to vary.
    #[arg(long)]
    param: String,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    /// Number of intervals; the sweep solves at steps + 1 values.
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Locate the first sign change of payoff_1 − payoff_2 by bisection.
    #[arg(long)]
    crossover: bool,
    /// With --crossover, bisect on P(player 1 wins) − TARGET instead.
    #[arg(long, requires = "crossover")]
    win_prob_target: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MultiArgs {
    #[command(flatten)]
    common: Common,
    /// Participating pair, 1-based, e.g. "1,2".
    #[arg(long, default_value = "1,2", value_parser = parse_duo)]
    duo: [usize; 2],
}

fn parse_grid_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 16 {
        return Err(format!("grid size must be at least 16, got {n}"));
    }
    Ok(n)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(format!("expected a positive number, got {s}"));
    }
    Ok(x)
}

fn parse_duo(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected two comma-separated player numbers, got {s:?}"));
    };
    let idx = |t: &str| match t.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k - 1),
        _ => Err(format!("player numbers start at 1, got {t:?}")),
    };
    let (a, b) = (idx(a)?, idx(b)?);
    if a == b {
        return Err("the two players must differ".into());
    }
    Ok([a, b])
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPILLOVER_EQ_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("SPILLOVER_EQ_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Multi(a) => commands::multi(a),
        Command::Balance(a) => commands::balance(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
