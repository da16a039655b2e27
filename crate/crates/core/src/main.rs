use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tailgap::cli::{self, Command, OutputFormat, Overrides, RunError};

/// Tail probabilities versus tail expectations for heavy-tailed laws.
#[derive(Debug, Parser)]
#[command(name = "tailgap", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(raw) = std::env::var("TAILGAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| RunError::Validation(format!("TAILGAP_THREADS must be a nonnegative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = RunError::Validation(e.to_string().lines().next().unwrap_or_default().to_string());
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(cli::EXIT_VALIDATION as u8);
        }
    };
    let result = configure_threads().and_then(|()| {
        let config = cli::load_config(&args.config)?;
        let overrides = Overrides {
            seed: args.seed,
            out: args.out,
            format: args.format,
        };
        cli::run(args.command, &config, &overrides)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
