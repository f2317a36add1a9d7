use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use essnorm_lab::experiments::scenarios::EXIT_CONFIG_ERROR as EXIT_CONFIG;
use essnorm_lab::experiments::{emit, load_config, run_scenario, RunError, Scenario};

/// Environment variable holding the worker-thread count.
const WORKERS_ENV: &str = "ESSNORM_WORKERS";

#[derive(Parser)]
#[command(name = "essnorm-lab", version, about = "Essential-norm experiments on desk-scale L_p spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write `<scenario>.csv` plus a report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the scenario names.
    ListScenarios,
}


fn read_config(path: &Path) -> Result<essnorm_lab::experiments::ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    load_config(&text).map_err(|e| {
        eprintln!("config error in {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn configure_workers() -> Result<(), ExitCode> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            eprintln!("config error: {WORKERS_ENV} must be a positive integer, got {raw:?}");
            return Err(ExitCode::from(EXIT_CONFIG));
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| {
            eprintln!("error: cannot start {n} workers: {e}");
            ExitCode::from(EXIT_CONFIG)
        })
}

fn run(config: &Path, out: &Path) -> Result<ExitCode, ExitCode> {
    configure_workers()?;
    let config = read_config(config)?;
    let result = run_scenario(&config).map_err(|e| {
        match e {
            RunError::Config(e) => eprintln!("config error: {e}"),
            RunError::Compute(e) => eprintln!("scenario precondition failed: {e}"),
        }
        ExitCode::from(EXIT_CONFIG)
    })?;
    let written = emit(&result, out).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    print!("{}", essnorm_lab::experiments::emit::report_text(&result));
    println!("wrote {}", written.csv.display());
    println!("wrote {}", written.report.display());
    Ok(ExitCode::from(result.exit_code()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => run(&config, &out),
        Command::Validate { config } => read_config(&config).map(|c| {
            println!("ok: {} configuration is valid", c.scenario);
            ExitCode::SUCCESS
        }),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<22}{}", s.name(), s.description());
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    outcome.unwrap_or_else(|code| code)
}
