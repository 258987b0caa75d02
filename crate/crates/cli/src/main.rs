//! `ermstab` command-line driver.
//!
//! Exit codes: 0 success, 1 internal/IO/parse error, 2 invalid config or
//! unknown example, 3 INCONSISTENT verdict or failed claim, 4
//! NO_CONVERGENT_SELECTION. `ERMSTAB_WORKERS` sets the worker count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ermstab_cli::commands::{self, EXAMPLES};
use ermstab_cli::report::{export, ExportFormat};
use ermstab_cli::{exit, CliError, ReportDocument};

#[derive(Parser)]
#[command(
    name = "ermstab",
    version,
    about = "Set-valued stability experiments for convex ERM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a canned reproduction.
    Reproduce {
        /// One of prop-3-1, prop-3-2, thm-5-1-demo, prop-6-2, cor-4-2.
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured stability pipeline.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write report series as CSV columns or the normalized document.
    Export {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "columnar")]
        format: ExportFormat,
        /// Defaults to `<report stem>_export` next to the report.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Quadratic-growth deviation bound on the configured family and random instances.
    Qg {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ERMSTAB_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::field(
            "ERMSTAB_WORKERS",
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::field("ERMSTAB_WORKERS", e))
}

fn emit(report: &ReportDocument, out: Option<PathBuf>) -> Result<i32, CliError> {
    match out {
        Some(path) => {
            report.write(&path)?;
            print!("{}", report.summary());
            println!("report written to {}", path.display());
        }
        None => {
            eprint!("{}", report.summary());
            print!("{}", report.to_text());
        }
    }
    Ok(report.exit_code)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_workers()?;
    match cli.command {
        Command::Reproduce { id, out } => {
            if !EXAMPLES.contains(&id.as_str()) {
                return Err(CliError::UnknownExample(id));
            }
            let report = commands::reproduce(&id)?;
            match out {
                Some(_) => emit(&report, out),
                None => {
                    print!("{}", report.summary());
                    Ok(report.exit_code)
                }
            }
        }
        Command::Analyze { config, seed, out } => {
            let cfg = commands::load_config(&config, seed)?;
            let report = commands::analyze(&cfg)?;
            emit(&report, commands::output_path(out, Some(&cfg)))
        }
        Command::Export {
            report,
            format,
            out_dir,
        } => {
            let doc = ReportDocument::read(&report)?;
            let dir = out_dir.unwrap_or_else(|| {
                let stem = report
                    .file_stem()
                    .map_or("report".into(), |s| s.to_string_lossy().into_owned());
                report.with_file_name(format!("{stem}_export"))
            });
            for path in export(&doc, format, &dir)? {
                println!("{}", path.display());
            }
            Ok(exit::OK)
        }
        Command::Verify {
            what:
                Verify::Qg {
                    config,
                    trials,
                    seed,
                    out,
                },
        } => {
            let cfg = commands::load_config(&config, seed)?;
            let report = commands::verify_qg(&cfg, trials)?;
            emit(&report, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
