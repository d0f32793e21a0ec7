use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use d2d_core::experiment::{
    emit_plot_data, read_results, run_experiment, workers_from_env, write_bounds, write_fit, WORKERS_ENV,
};
use d2d_core::{Error, ExperimentSpec, ResultRow};
use log::info;

/// Invalid config file, config values or input CSV.
const EXIT_CONFIG: u8 = 2;
/// Anything that went wrong while running a valid config.
const EXIT_RUNTIME: u8 = 1;

#[derive(Parser)]
#[command(name = "d2dsim", version, about = "Protocol-model D2D caching network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (n, trial) of a config and write results, summary, fit and timings CSVs.
    #[command(after_help = "Worker threads default to one per core; override with D2DSIM_WORKERS.")]
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir` (or `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the regime and theoretical scaling exponents of a config as CSV.
    Bounds {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit log-log slopes to a results CSV.
    Fit {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot-ready `.dat` files from a results CSV.
    Plotdata {
        results: PathBuf,
        /// Output directory; defaults to `plot` next to the results file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_results(path: &Path) -> Result<Vec<ResultRow>, Failure> {
    let file = File::open(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_results(BufReader::new(file))?)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out } => {
            let spec = ExperimentSpec::from_file(&config)?;
            let workers = workers_from_env()?;
            let dir = out.unwrap_or_else(|| spec.output_dir.clone());
            info!(
                "{}: {} sizes x {} trials, workers {}",
                spec.params.scheme,
                spec.n_grid.len(),
                spec.trials,
                workers.map_or_else(|| format!("default ({WORKERS_ENV} unset)"), |w| w.to_string())
            );
            let output = run_experiment(&spec, workers)?;
            output.write_all(&dir)?;
            let rows: Vec<_> = output.rows().collect();
            write_fit(&rows, io::stdout().lock())?;
            info!("wrote {}", dir.display());
        }
        Command::Bounds { config, out } => {
            let spec = ExperimentSpec::from_file(&config)?;
            let mut w = sink(out.as_deref())?;
            write_bounds(&spec.bounds()?, &mut w)?;
            w.flush()?;
        }
        Command::Fit { results, out } => {
            let rows = load_results(&results)?;
            let mut w = sink(out.as_deref())?;
            write_fit(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Plotdata { results, out } => {
            let rows = load_results(&results)?;
            let dir = out.unwrap_or_else(|| results.parent().unwrap_or(Path::new(".")).join("plot"));
            for p in emit_plot_data(&rows, &dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("d2dsim: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("d2dsim: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
