use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surplus_id_cli::commands::SimulateArgs;
use surplus_id_cli::format::{load_market, to_json, MatrixRole};
use surplus_id_cli::report::ErrorReport;
use surplus_id_cli::{cmd_check, cmd_geometry, cmd_identify, cmd_simulate, cmd_solve, exit, CliError, EntropyChoice, Outcome};

#[derive(Debug, Parser)]
#[command(name = "surplus-id", version, about = "Rationalize and identify matching surplus on finite type spaces")]
struct Cli {
    /// Feasibility tolerance for margins and nonnegativity.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the unregularized welfare problem for `phi`.
    Solve {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide whether `mu` is rationalizable (exit 0) or not (exit 1).
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// Recover a surplus from `mu`.
    Identify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = EntropyChoice::Shannon)]
        entropy: EntropyChoice,
    },
    /// Draw a finite market from `phi` and write the true and empirical matchings.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        households: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        round_trip: bool,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Columnar plot data for a 2×2 market.
    Geometry {
        #[arg(long)]
        input: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = cli.tol;
    match &cli.command {
        Command::Solve { input } => cmd_solve(&load_market(input, MatrixRole::Surplus, tol)?),
        Command::Check { input } => cmd_check(&load_market(input, MatrixRole::Matching, tol)?),
        Command::Identify { input, entropy } => cmd_identify(&load_market(input, MatrixRole::Matching, tol)?, *entropy),
        Command::Simulate {
            input,
            households,
            seed,
            round_trip,
            out,
        } => {
            let market = load_market(input, MatrixRole::Surplus, tol)?;
            std::fs::create_dir_all(out).map_err(|source| CliError::Io {
                path: out.clone(),
                source,
            })?;
            let args = SimulateArgs {
                households: *households,
                seed: *seed,
                round_trip: *round_trip,
                out_dir: out,
            };
            cmd_simulate(&market, &args)
        }
        Command::Geometry { input, out } => {
            let outcome = cmd_geometry(&load_market(input, MatrixRole::Matching, tol)?, tol)?;
            match out {
                Some(path) => {
                    surplus_id_cli::format::write_file(path, &outcome.stdout)?;
                    Ok(Outcome {
                        stdout: String::new(),
                        ..outcome
                    })
                }
                None => Ok(outcome),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT_ERROR } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            let _ = std::io::stdout().flush();
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprint!("{}", to_json(&ErrorReport::from(&e)));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
