use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meascool_cli::{execute, load, parse_config, CliError, Command, RawConfig};

#[derive(Parser)]
#[command(
    name = "meascool",
    version,
    about = "Measurement-induced cooling of a thermal resonator"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Export a cooling-coefficient table and its protected levels.
    Coeffs(Common),
    /// Run the measurement schedule and record per-step observables.
    Run(Common),
    /// Run the schedule over the `[sweep]` grid.
    Sweep(Common),
    /// Compare closed-form coefficients with exact block propagators.
    OracleCheck(Common),
    /// Estimate the survival curve from sampled trajectories.
    Trajectories(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; may be omitted when --preset is given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Figure preset laid under the config file (e.g. fig4, fig5c, fig8).
    #[arg(long)]
    preset: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Coeffs(a) => (Command::Coeffs, a),
        Sub::Run(a) => (Command::Run, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::OracleCheck(a) => (Command::OracleCheck, a),
        Sub::Trajectories(a) => (Command::Trajectories, a),
    };
    match dispatch(command, &args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command, args: &Common) -> Result<Vec<PathBuf>, CliError> {
    let config = match &args.config {
        Some(path) => parse_config(path, args.preset.as_deref())?,
        None => load(RawConfig::default(), args.preset.as_deref())?,
    };
    Ok(execute(command, &config, &args.out_dir)?.files)
}
