//! `fairsplit`: nucleolus and estate-division calculator.
//!
//! Exit codes: 0 success, 1 internal solver failure, 2 invalid input,
//! 3 infeasible game (no imputation exists), 4 unsupported player count,
//! 5 simulation hit its step cap before reaching a stationary state.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fairsplit::bankruptcy::{
    bankruptcy_game, talmud_division, BankruptcyError, BankruptcyInstance,
};
use fairsplit::game::{CoalitionGame, GameError, DEFAULT_EPS_TIE};
use fairsplit::hydraulic::{self, SimConfig, SimError};
use fairsplit::nucleolus::{nucleolus, NucleolusError};

#[derive(Parser)]
#[command(name = "fairsplit", version, about = "Fair division of coalition worth", long_about = None)]
struct Cli {
    /// Print an aligned listing instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    /// Tolerance for the efficiency check reported with each allocation.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eps_eff: f64,

    /// Band below the maximum complaint within which coalitions are
    /// reported as tied (default 1e-9).
    #[arg(long, global = true)]
    eps_tie: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the nucleolus by sequential min-max linear programs.
    Nucleolus {
        /// Game description: {"players": n, "values": {"1,2": worth, ...}}.
        game_file: PathBuf,
    },
    /// Relax a three-player game to its nucleolus by level balancing.
    Simulate {
        game_file: PathBuf,
        /// Cap on how far a single step may slide.
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
        /// Give up after this many steps.
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        /// Write the sampled step trace as CSV to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Divide an estate among creditors by the Talmud rule.
    Bankruptcy {
        /// Estate to divide.
        #[arg(long)]
        estate: f64,
        /// Comma-separated claims, e.g. --debts 100,200,300.
        #[arg(long)]
        debts: String,
    },
    /// Run both solvers on the same game and report the allocation gap.
    Compare { game_file: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Internal(String),
    Input(String),
    Infeasible(String),
    Unsupported(String),
    NonConvergence(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Internal(m)
            | CliError::Input(m)
            | CliError::Infeasible(m)
            | CliError::Unsupported(m)
            | CliError::NonConvergence(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::NonConvergence(_) => 5,
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NucleolusError> for CliError {
    fn from(e: NucleolusError) -> Self {
        match e {
            NucleolusError::InfeasibleGame => CliError::Infeasible(e.to_string()),
            NucleolusError::UnsupportedPlayerCount(_) => CliError::Unsupported(e.to_string()),
            NucleolusError::Game(_) => CliError::Input(e.to_string()),
            NucleolusError::Solver(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<BankruptcyError> for CliError {
    fn from(e: BankruptcyError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn map_sim_err(e: SimError) -> CliError {
    match e {
        SimError::UnsupportedPlayerCount(_) => CliError::Unsupported(e.to_string()),
        SimError::InvalidConfig(_) => CliError::Input(e.to_string()),
        SimError::MaxStepsExceeded { .. } => CliError::NonConvergence(e.to_string()),
    }
}

fn load_game(path: &Path) -> Result<CoalitionGame, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(CoalitionGame::from_json_str(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Prints the report, exiting quietly if the consumer closed the pipe.
fn emit(text: &str) -> Result<(), CliError> {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    let done = out
        .write_all(text.as_bytes())
        .and_then(|()| out.write_all(b"\n"))
        .and_then(|()| out.flush());
    match done {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(CliError::Internal(format!("cannot write report: {e}"))),
    }
}

fn parse_debts(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|token| {
            token
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("cannot parse debt {token:?}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    if !(cli.eps_eff.is_finite() && cli.eps_eff >= 0.0) {
        return Err(CliError::Input(
            "--eps-eff must be non-negative".to_string(),
        ));
    }
    let eps_tie = cli.eps_tie.unwrap_or(DEFAULT_EPS_TIE);
    if !(eps_tie.is_finite() && eps_tie >= 0.0) {
        return Err(CliError::Input(
            "--eps-tie must be non-negative".to_string(),
        ));
    }

    match &cli.command {
        Command::Nucleolus { game_file } => {
            let game = load_game(game_file)?;
            let result = nucleolus(&game)?;
            let rep = report::nucleolus_report(&game, &result, cli.eps_eff, eps_tie)?;
            emit(&report::render(&rep, cli.pretty))?;
        }
        Command::Simulate {
            game_file,
            eta,
            max_steps,
            trace,
        } => {
            let game = load_game(game_file)?;
            let cfg = SimConfig {
                step_size: *eta,
                max_steps: *max_steps,
                ..SimConfig::default()
            };
            match hydraulic::run(&game, &cfg) {
                Ok((x, tr)) => {
                    if let Some(path) = trace {
                        write_file(path, &tr.to_csv())?;
                    }
                    let rep = report::simulate_report(&game, &x, &tr, true, cli.eps_eff, eps_tie)?;
                    emit(&report::render(&rep, cli.pretty))?;
                }
                Err(SimError::MaxStepsExceeded {
                    max_steps,
                    allocation: _,
                    trace: tr,
                }) => {
                    // The partial trace is still written so the run can be
                    // inspected.
                    if let Some(path) = trace {
                        write_file(path, &tr.to_csv())?;
                    }
                    return Err(CliError::NonConvergence(format!(
                        "no stationary state within {max_steps} steps"
                    )));
                }
                Err(e) => return Err(map_sim_err(e)),
            }
        }
        Command::Bankruptcy { estate, debts } => {
            let debts = parse_debts(debts)?;
            let instance = BankruptcyInstance::new(*estate, debts)?;
            let x = talmud_division(&instance)?;
            let game = bankruptcy_game(&instance);
            let rep = report::bankruptcy_report(&instance, &game, &x, cli.eps_eff, eps_tie)?;
            emit(&report::render(&rep, cli.pretty))?;
        }
        Command::Compare { game_file } => {
            let game = load_game(game_file)?;
            let result = nucleolus(&game)?;
            let (sx, tr) = hydraulic::run(&game, &SimConfig::default()).map_err(map_sim_err)?;
            let gap = result.x.max_norm_distance(&sx);
            let lp = report::nucleolus_report(&game, &result, cli.eps_eff, eps_tie)?;
            let sim = report::simulate_report(&game, &sx, &tr, true, cli.eps_eff, eps_tie)?;
            emit(&report::render(
                &report::compare_report(lp, sim, gap),
                cli.pretty,
            ))?;
        }
    }
    Ok(())
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
