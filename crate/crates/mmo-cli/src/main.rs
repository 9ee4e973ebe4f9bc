use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mmo", about = "Closed-form robust MIMO design: solver, sweeps and self-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single instance and print the solution factors.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a Monte Carlo sweep and write the CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output path; overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full invariant suite; exits nonzero on any failure.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, mmo_cli::CliError> {
    match cli.command {
        Command::Solve { config } => {
            let cfg = mmo_cli::parse_config(&config)?;
            print!("{}", mmo_cli::solve_report(&cfg)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let mut cfg = mmo_cli::parse_config(&config)?;
            if let Some(out) = out {
                cfg.output_path = Some(out);
            }
            let rows = mmo_cli::run(&cfg)?;
            match &cfg.output_path {
                Some(path) => eprintln!("wrote {} rows to {}", rows.len(), path.display()),
                None => print!("{}", mmo_cli::to_csv(&rows)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { seed } => {
            let report = mmo_cli::full_verify(seed);
            print!("{report}");
            let (passed, total) = (
                report.checks.iter().filter(|c| c.passed).count(),
                report.checks.len(),
            );
            println!("{passed}/{total} checks passed");
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
