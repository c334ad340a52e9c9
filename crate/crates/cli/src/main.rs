use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nfvlab_cli::{load_config, presets, run, write_outputs};
use nfvlab_core::{BitMatrix, NfvCode};

#[derive(Parser)]
#[command(name = "nfvlab", version, about = "Coded NFV decoding: bounds, simulation, queueing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv and manifest.json.
    Run {
        /// JSON config file (a manifest.json from an earlier run also works).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Embedded preset; see `nfvlab presets`.
        #[arg(long)]
        preset: Option<String>,
        /// Override a config key, e.g. `--set system.delta=0.02`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "NFVLAB_THREADS")]
        threads: Option<usize>,
    },
    /// Structural metrics of a generator matrix file.
    CodeInfo { matrix: PathBuf },
    /// List the embedded presets.
    Presets {
        /// Print the preset's JSON config.
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed early, e.g. `nfvlab presets | head`
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let mut stdout = io::stdout().lock();
    match Cli::parse().command {
        Command::Run {
            config,
            preset,
            sets,
            out,
            seed,
            threads,
        } => {
            let cfg = load_config(preset.as_deref(), config.as_deref(), &sets, seed)?;
            let outcome = run(&cfg, threads.filter(|&t| t > 0))?;
            write_outputs(&outcome, &out)?;
            writeln!(
                stdout,
                "wrote {} rows to {}",
                outcome.table.rows.len(),
                out.join("results.csv").display()
            )?;
        }
        Command::CodeInfo { matrix } => {
            let text = std::fs::read_to_string(&matrix)
                .with_context(|| format!("reading {}", matrix.display()))?;
            let g = BitMatrix::parse_file(&text)?;
            let code = NfvCode::new(matrix.display().to_string(), g)?;
            write!(stdout, "{}", nfvlab_cli::run::code_info_report(&code)?)?;
        }
        Command::Presets { name: None } => {
            for n in presets::NAMES {
                writeln!(stdout, "{n:<14} {}", presets::describe(n))?;
            }
        }
        Command::Presets { name: Some(n) } => {
            let v = presets::get(&n).with_context(|| format!("unknown preset `{n}`"))?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    Ok(())
}
