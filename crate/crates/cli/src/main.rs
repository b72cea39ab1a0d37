//! Command-line experiment runner.
//!
//! `qdfs run --experiment <name> [--config <path>] [--set key=value ...] --out <path>`
//! executes one experiment and writes CSV output; `qdfs verify --suite fast|full`
//! runs the verification suite. Worker count defaults to the available
//! parallelism and can be pinned with the QDFS_WORKERS environment variable.

use clap::{Args, Parser, Subcommand};
use qdfs_cli::config::{Experiment, ExperimentConfig};
use qdfs_cli::verify::{run_suite, to_json_line, Suite};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qdfs", version, about = "Protected-search experiments on paired spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV output.
    Run(RunArgs),
    /// Run the verification suite and report per-criterion results.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name: basis | spectrum | grover-cont | aqc-run |
    /// trotter-sweep | schedule | krotov | noise-bench
    #[arg(long)]
    experiment: String,
    /// Optional key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// fast (sub-minute criteria) or full (everything).
    #[arg(long, default_value = "fast")]
    suite: String,
    /// Optional JSON-lines summary path (defaults to verify-<suite>.jsonl for
    /// the full suite).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_workers();
    match cli.command {
        Command::Run(args) => match run_command(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(code)
            }
        },
        Command::Verify(args) => match verify_command(args) {
            Ok(all_passed) => {
                if all_passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

fn configure_workers() {
    if let Ok(value) = std::env::var("QDFS_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global();
            }
        }
    }
}

fn run_command(args: RunArgs) -> Result<(), (u8, String)> {
    let experiment =
        Experiment::parse(&args.experiment).map_err(|e| (2u8, e.to_string()))?;
    let config = ExperimentConfig::load(experiment, args.config.as_deref(), &args.set)
        .map_err(|e| (2u8, e.to_string()))?;
    qdfs_cli::experiments::run(&config, &args.out)
        .map_err(|e| (e.exit_code() as u8, e.to_string()))
}

fn verify_command(args: VerifyArgs) -> Result<bool, String> {
    let suite = match args.suite.as_str() {
        "fast" => Suite::Fast,
        "full" => Suite::Full,
        other => return Err(format!("unknown suite '{other}' (expected fast or full)")),
    };
    let reports = run_suite(suite);
    let mut all_passed = true;
    for report in &reports {
        let verdict = if report.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion-{:02} {} ({:.0} ms) measured={}",
            report.id,
            report.name,
            report.wall_ms,
            serde_json::to_string(&report.measured).unwrap_or_default()
        );
        all_passed &= report.passed;
    }
    println!(
        "{}: {}/{} criteria passed",
        if all_passed { "OK" } else { "FAILED" },
        reports.iter().filter(|r| r.passed).count(),
        reports.len()
    );

    let out_path = args.out.or_else(|| {
        (suite == Suite::Full).then(|| PathBuf::from("verify-full.jsonl"))
    });
    if let Some(path) = out_path {
        let mut file = std::fs::File::create(&path)
            .map_err(|e| format!("cannot write {path:?}: {e}"))?;
        for report in &reports {
            writeln!(file, "{}", to_json_line(report))
                .map_err(|e| format!("cannot write {path:?}: {e}"))?;
        }
    }
    Ok(all_passed)
}
