use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use penrose_fife::cli::{self, CliError, Suite};

#[derive(Parser)]
#[command(name = "pfsim", version, about = "Penrose-Fife phase-transition simulator and property harness")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate from a `key = value` config file.
    Run { config: PathBuf },
    /// Run a property suite: conservation, dissipation, contraction,
    /// smoothing, separation or all.
    Verify { suite: String },
    /// Convergence study against the radial similarity solution.
    BenchSimilarity {
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Exact Moser exponent ladder.
    Moser {
        #[arg(long)]
        eps: String,
        #[arg(long)]
        p0: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match command {
        Command::Run { config } => {
            let cfg = cli::parse_config(&config)?;
            cli::cmd_run(&cfg, &mut out)
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(CliError::Usage)?;
            cli::cmd_verify(suite, &mut out)
        }
        Command::BenchSimilarity { levels } => cli::cmd_bench_similarity(levels, &mut out),
        Command::Moser { eps, p0, levels } => cli::cmd_moser(&eps, &p0, levels, &mut out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pfsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
