use clap::Parser;
use dskg_cli::{run, CliError, RunConfig, RunOptions, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Klein–Gordon solvers and verification suites on de Sitter spacetime.
#[derive(Debug, Parser)]
#[command(name = "dskg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the `output` field of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Repeat the solve with doubled quadrature nodes and fail if the
    /// result moves by more than 1e-6 relative.
    #[arg(long)]
    self_check: bool,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DSKG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DSKG_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = RunConfig::load(&cli.config).map_err(CliError::from).and_then(|config| {
        let opts = RunOptions { command: cli.command, out: cli.out.clone(), self_check: cli.self_check };
        run(&config, &opts)
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            let status = outcome.summary["status"].as_str().unwrap_or("?").to_uppercase();
            println!("{}: {} -> {}", cli.command.name(), status, outcome.out_dir.display());
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
