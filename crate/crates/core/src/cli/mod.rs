//! Batch front-end.
//!
//! `transfield <command> [--config FILE] [--kappa K]... [--out DIR]`. Every
//! command prints a JSON check report on stdout and writes it, together with
//! its data files, under the output directory. Exit status is 0 when all
//! checks pass, 1 when some fail and 2 on usage, configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod fieldfile;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Result;
use crate::exec::Execution;
use config::{FieldKind, RunConfig};
use report::{write_atomic, CheckReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "transfield", version, about = "Transverse-field spectral and form checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extension parameter; repeat to give several. Replaces the configured list.
    #[arg(long = "kappa", global = true, allow_negative_numbers = true)]
    kappa: Vec<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    serial: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the effective configuration as JSON.
    PrintConfig,
    /// Orthonormality and angular-Laplacian checks of the vector harmonics.
    VshCheck,
    /// Phase shifts and eigen-residuals of the spectral family, one CSV per κ.
    Spectrum,
    /// Extended quadratic form of a field file for every κ.
    Qform {
        #[arg(long)]
        field: PathBuf,
    },
    /// Transverse profiles of a field file.
    Decompose {
        #[arg(long)]
        field: PathBuf,
    },
    /// Exact checks of the finite-mode Fock algebra.
    FockCheck,
    /// Write a sample field file on the configured grid.
    MakeField {
        #[arg(long, value_enum)]
        kind: Option<FieldKind>,
        /// Target file; defaults to `field_<kind>.txt` in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !cli.kappa.is_empty() {
        cfg.kappas = cli.kappa.clone();
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.serial {
        cfg.execution = Execution::Serial;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(cfg: &RunConfig, report: &CheckReport) -> Result<i32> {
    let name = format!("{}_report.json", report.command.replace('-', "_"));
    let text = report.to_json();
    write_atomic(&cfg.output_dir.join(name), text.as_bytes())?;
    print!("{text}");
    Ok(if report.pass { EXIT_PASS } else { EXIT_CHECKS_FAILED })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = effective_config(cli)?;
    let report = match &cli.command {
        Command::PrintConfig => {
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serialises"));
            return Ok(EXIT_PASS);
        }
        Command::VshCheck => commands::vsh_check(&cfg)?,
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Qform { field } => commands::qform(&cfg, field)?,
        Command::Decompose { field } => commands::decompose_cmd(&cfg, field)?,
        Command::FockCheck => commands::fock_check(&cfg)?,
        Command::MakeField { kind, output } => {
            let (report, path) = commands::make_field(&cfg, kind.unwrap_or(cfg.field.kind), output.as_deref())?;
            log::info!("wrote {}", path.display());
            report
        }
    };
    finish(&cfg, &report)
}

/// Parse `args` (program name first) and run one command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
