use std::process::ExitCode;

use clap::Parser;
use pegasus_cli::{run_to, RunConfig, RunError};

/// Scenario-based policy search experiments.
#[derive(Debug, Parser)]
#[command(name = "pegasus", version)]
struct Args {
    /// JSON run config, or the output of an earlier run.
    #[arg(long)]
    config: String,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<(), RunError> {
    let mut config = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    if let Some(out) = args.out {
        config.output_path = Some(out);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(
                pegasus_cli::ConfigError::Invalid { key: "threads".into(), reason: "must be positive".into() }.into()
            );
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| RunError::Runtime(e.to_string()))?;
    }
    run_to(&config, &mut std::io::stdout().lock())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pegasus: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
