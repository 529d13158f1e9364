//! Batch front-end for the covert-D2D model: analytic/Monte-Carlo
//! validation, lower-stage detection curves, equilibrium solves, and
//! parameter sweeps, all emitting reproducible CSV.

// negated float comparisons are NaN-rejecting on purpose in input checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod csvout;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{
    cmd_equilibrium, cmd_lower_stage, cmd_sweep, cmd_validate, EquilibriumArgs, Kind,
    LowerStageArgs, ValidateArgs, ALL_KINDS,
};
use covertd2d::Scheme;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "covertd2d",
    version,
    about = "Covert SWIPT-enabled D2D network model: validation, detection curves, equilibria, sweeps",
    after_help = "Exit codes: 0 success, 2 validation/config failure, 3 infeasible game, 4 numerical nonconvergence."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare analytic probabilities against seeded Monte Carlo estimates
    Validate(ValidateCli),
    /// Detection-error curve over a threshold grid plus the optimal threshold
    LowerStage(LowerStageCli),
    /// Solve the two-stage game for one scheme
    Equilibrium(EquilibriumCli),
    /// Run a parameter sweep described by a sweep-spec file
    Sweep(SweepCli),
}

#[derive(Args)]
struct ValidateCli {
    /// Config file (flat key = value); defaults used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated kinds: sinr-ps, ph-ps, sinr-ts, ph-ts, fa, md (default: all)
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<String>,
    /// Monte Carlo trials per grid point
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// SWIPT power probed, dBm
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    ps_dbm: f64,
    /// Points on the rho grid over [0.1, 1.0]
    #[arg(long, default_value_t = 10)]
    rho_points: usize,
    /// Points on the geometric tau grid
    #[arg(long, default_value_t = 20)]
    tau_points: usize,
    #[arg(long, default_value_t = -17.0, allow_negative_numbers = true)]
    tau_min_dbm: f64,
    #[arg(long, default_value_t = 17.0, allow_negative_numbers = true)]
    tau_max_dbm: f64,
    /// Simulation window radius, meters
    #[arg(long, default_value_t = 30.0)]
    radius: f64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerStageCli {
    #[arg(long)]
    config: Option<PathBuf>,
    /// SWIPT power, dBm
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    ps_dbm: f64,
    /// Number of grid points on the tau axis
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
    tau_min_dbm: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    tau_max_dbm: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumCli {
    #[arg(long)]
    config: Option<PathBuf>,
    /// SWIPT scheme: ps or ts
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    population: usize,
    #[arg(long, default_value_t = 120)]
    generations: usize,
    /// Use an adaptive penalty instead of rejecting infeasible individuals
    #[arg(long, default_value_t = false)]
    adaptive_penalty: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the utility surface over (p_s, rho) to this CSV
    #[arg(long)]
    surface: Option<PathBuf>,
    /// Surface grid resolution per axis
    #[arg(long, default_value_t = 40)]
    surface_grid: usize,
}

#[derive(Args)]
struct SweepCli {
    /// Sweep-spec file (flat key = value; see README)
    #[arg(long)]
    spec: PathBuf,
    /// Output CSV path (overrides the spec's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(a) => {
            let kinds = if a.kinds.is_empty() {
                ALL_KINDS.to_vec()
            } else {
                a.kinds.iter().map(|s| Kind::parse(s)).collect::<Result<Vec<Kind>, CliError>>()?
            };
            cmd_validate(&ValidateArgs {
                config: a.config,
                kinds,
                trials: a.trials,
                seed: a.seed,
                ps_dbm: a.ps_dbm,
                rho_points: a.rho_points,
                tau_points: a.tau_points,
                tau_min_dbm: a.tau_min_dbm,
                tau_max_dbm: a.tau_max_dbm,
                radius: a.radius,
                out: a.out,
            })
        }
        Command::LowerStage(a) => cmd_lower_stage(&LowerStageArgs {
            config: a.config,
            ps_dbm: a.ps_dbm,
            grid: a.grid,
            tau_min_dbm: a.tau_min_dbm,
            tau_max_dbm: a.tau_max_dbm,
            out: a.out,
        }),
        Command::Equilibrium(a) => {
            let scheme: Scheme = a.scheme.parse().map_err(CliError::Usage)?;
            cmd_equilibrium(&EquilibriumArgs {
                config: a.config,
                scheme,
                seed: a.seed,
                population: a.population,
                generations: a.generations,
                adaptive_penalty: a.adaptive_penalty,
                out: a.out,
                surface: a.surface,
                surface_grid: a.surface_grid,
            })
        }
        Command::Sweep(a) => cmd_sweep(&a.spec, a.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
