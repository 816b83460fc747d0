use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cocycle_lab::harness::{compare_runs, parse_config, run_oracle, run_scenario, HarnessError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "cocycle-lab", version, about = "Run cocycle scenarios and compare their outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print nothing except errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario with the fast estimators.
    Run(RunArgs),
    /// Run a scenario with linear scans and stepwise products only.
    Oracle(RunArgs),
    /// Compare two run directories.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Root directory for run outputs.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Wall-clock limit; diagnostics that do not finish are marked truncated.
    #[arg(long)]
    max_seconds: Option<f64>,
}

fn load(args: &RunArgs) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = parse_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.max_seconds {
        if !(t > 0.0) {
            return Err(HarnessError::Report {
                path: "--max-seconds".into(),
                msg: format!("{t} must be positive"),
            });
        }
        cfg.budgets.max_seconds = Some(t);
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.command {
        Command::Run(args) | Command::Oracle(args) => {
            let cfg = load(args)?;
            let start = Instant::now();
            let outcome = if matches!(cli.command, Command::Run(_)) {
                run_scenario(&cfg, &args.out)?
            } else {
                run_oracle(&cfg, &args.out)?
            };
            if !cli.quiet {
                print!("{}", outcome.report.to_text());
                println!("artifacts  {}", outcome.dir.display());
                eprintln!("wall time  {:.2} s", start.elapsed().as_secs_f64());
            }
            Ok(outcome.exit_code())
        }
        Command::Compare { a, b } => {
            let cmp = compare_runs(Path::new(a), Path::new(b))?;
            if !cli.quiet {
                print!("{}", cmp.to_text());
            }
            Ok(cmp.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
