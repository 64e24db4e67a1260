mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use output::Sink;
use scenario::{ModeName, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical diagnostic: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "netfair",
    version,
    about = "Network fairness analytics and mining-game experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Missing sections take their defaults.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Frontrunning probability across throughput multipliers.
    PfSweep(#[command(flatten)] Common),
    /// Publishing-fairness ratio across slower-block delays or block rates.
    AlphaSweep(#[command(flatten)] Common),
    /// One seeded mining simulation.
    Sim {
        #[command(flatten)]
        common: Common,
        /// Also write the block tree as NDJSON.
        #[arg(long)]
        dump_blocks: bool,
    },
    /// Fast-versus-slow payoff matrix from repeated simulations.
    Payoff(#[command(flatten)] Common),
    /// Dominance reduction and equilibria of a payoff matrix CSV.
    Solve {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeName>,
        /// Profile to check, e.g. "S1=0.74,S2=0.26/S2=0.32,S3=0.68". Repeatable.
        #[arg(long)]
        profile: Vec<String>,
    },
    /// Frontrunning and undercutting on parallel chains.
    Ohie {
        /// Chain-state file; overrides the scenario's.
        state: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        honest_reward: Option<f64>,
        #[arg(long)]
        no_petty_majority: bool,
        /// Block to frontrun, as chain:position.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        next_rank: Option<u64>,
    },
}

fn prepare(common: &Common) -> Result<(Scenario, Sink), CliError> {
    let mut s = Scenario::load(common.scenario.as_deref())?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(eps) = common.epsilon {
        s.alpha_sweep.epsilon = eps;
        s.game.epsilon = eps;
    }
    if let Some(tol) = common.tolerance {
        s.game.tolerance = tol;
    }
    if let Some(runs) = common.runs {
        s.game.runs = runs;
    }
    Ok((s, Sink::new(common.out.clone())?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PfSweep(c) => {
            let (s, sink) = prepare(&c)?;
            commands::pf_sweep(&s, &sink)
        }
        Command::AlphaSweep(c) => {
            let (s, sink) = prepare(&c)?;
            commands::alpha_sweep(&s, &sink)
        }
        Command::Sim {
            common,
            dump_blocks,
        } => {
            let (mut s, sink) = prepare(&common)?;
            s.sim.dump_blocks |= dump_blocks;
            commands::sim(&s, &sink)
        }
        Command::Payoff(c) => {
            let (s, sink) = prepare(&c)?;
            commands::payoff(&s, &sink)
        }
        Command::Solve {
            matrix,
            common,
            mode,
            profile,
        } => {
            let (mut s, sink) = prepare(&common)?;
            if let Some(m) = mode {
                s.game.mode = m;
            }
            s.game.profiles.extend(profile);
            commands::solve(&s, &matrix, &sink)
        }
        Command::Ohie {
            state,
            common,
            honest_reward,
            no_petty_majority,
            target,
            next_rank,
        } => {
            let (mut s, sink) = prepare(&common)?;
            if state.is_some() {
                s.ohie.state = state;
            }
            if let Some(h) = honest_reward {
                s.ohie.honest_reward = h;
            }
            if no_petty_majority {
                s.ohie.petty_majority = false;
            }
            if target.is_some() {
                s.ohie.target = target;
            }
            if next_rank.is_some() {
                s.ohie.candidate_next_rank = next_rank;
            }
            commands::ohie(&s, &sink)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netfair: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
