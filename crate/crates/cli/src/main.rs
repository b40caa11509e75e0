use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lfl_cli::acceptance::{run_suite, Suite};
use lfl_cli::commands::{cmd_bounds, cmd_example, cmd_run, default_workers};
use lfl_cli::error::{CliError, CliResult, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "lfl", version, about = "Langevin Monte Carlo sampling lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write estimates.csv.
    Run {
        config: PathBuf,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// FI and TV of the two-mode mixture pair for each separation m.
    Example {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<f64>,
    },
    /// Evaluate one bound: `bounds thm1 K0=1 L=1 d=1 N=100`.
    Bounds {
        theorem: String,
        params: Vec<String>,
    },
    /// Run the acceptance suite (`fast` or `full`).
    Acceptance { suite: String },
}

fn execute(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match cli.command {
        Command::Run { config, workers, out: dir } => {
            let path = cmd_run(&config, workers.unwrap_or_else(default_workers), dir.as_deref())?;
            writeln!(out, "{}", path.display()).map_err(io)?;
        }
        Command::Example { m } => write!(out, "{}", cmd_example(&m)?).map_err(io)?,
        Command::Bounds { theorem, params } => write!(out, "{}", cmd_bounds(&theorem, &params)?.render()).map_err(io)?,
        Command::Acceptance { suite } => {
            let suite = Suite::parse(&suite)?;
            let failed = run_suite(suite, &mut out)?;
            if failed > 0 {
                return Err(CliError::AcceptanceFailed { failed });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
