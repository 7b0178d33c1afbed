use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qbattery_cli::config::{parse_config, Config, SweepConfig};
use qbattery_cli::{
    reproduce, run_single, run_sweep, Figure, ReproduceError, RunError, SweepError,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qbattery",
    version,
    about = "Charging and self-discharge of a two-qubit open quantum battery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration and write its CSV table.
    Run {
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of a parameter sweep.
    Sweep {
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a figure or table dataset.
    Reproduce {
        /// fig2, fig3, fig4 or table-p
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check a configuration without running it.
    Validate { config: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.to_string(),
        }
    }

    fn solver(message: impl ToString) -> Self {
        Failure {
            code: EXIT_SOLVER,
            message: message.to_string(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(_) => Failure::config(e),
            _ => Failure::solver(e),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(_) => Failure::config(e),
            _ => Failure::solver(e),
        }
    }
}

impl From<ReproduceError> for Failure {
    fn from(e: ReproduceError) -> Self {
        match e {
            ReproduceError::UnknownFigure(_) => Failure::config(e),
            ReproduceError::Run(r) => r.into(),
            _ => Failure::solver(e),
        }
    }
}

fn load(path: &Path) -> Result<Config, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out } => {
            let cfg = match load(&config)? {
                Config::Run(cfg) => cfg,
                Config::Sweep(_) => {
                    return Err(Failure::config(format!(
                        "{}: sweep keys present, use `qbattery sweep`",
                        config.display()
                    )))
                }
            };
            let csv = run_single(&cfg)?.to_csv_string();
            match out {
                Some(path) => fs::write(&path, csv)
                    .map_err(|e| Failure::solver(format!("{}: {e}", path.display()))),
                None => io::stdout()
                    .write_all(csv.as_bytes())
                    .map_err(Failure::solver),
            }
        }
        Command::Sweep { config, out, jobs } => {
            let sweep = match load(&config)? {
                Config::Sweep(s) => s,
                Config::Run(r) => SweepConfig::single(r),
            };
            let dir = out
                .or_else(|| sweep.out_dir.clone())
                .ok_or_else(|| Failure::config("no output directory: pass --out or set out_dir"))?;
            let jobs =
                jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = run_sweep(&sweep, &dir, jobs)?;
            let failed: Vec<_> = report.failures().collect();
            eprintln!(
                "[sweep] {} of {} points written to {}",
                report.outcomes.len() - failed.len(),
                report.outcomes.len(),
                dir.display()
            );
            if failed.is_empty() {
                return Ok(());
            }
            for f in &failed {
                eprintln!(
                    "[sweep] point {} {:?}: {}",
                    f.index,
                    f.tuple,
                    f.error.as_deref().unwrap_or("")
                );
            }
            Err(Failure {
                code: EXIT_PARTIAL,
                message: format!("{} sweep points failed", failed.len()),
            })
        }
        Command::Reproduce { id, out } => {
            let figure: Figure = id.parse().map_err(Failure::config)?;
            let paths = reproduce(figure, &out)?;
            eprintln!(
                "[reproduce] {} files written to {}",
                paths.len(),
                out.display()
            );
            Ok(())
        }
        Command::Validate { config } => {
            let (base, points) = match load(&config)? {
                Config::Run(r) => (r, 1),
                Config::Sweep(s) => {
                    for tuple in s.tuples() {
                        s.point(&tuple)
                            .map_err(|e| Failure::config(format!("sweep point {tuple:?}: {e}")))?;
                    }
                    let size = s.size();
                    (s.base, size)
                }
            };
            let regime = base.params.classify_regime();
            println!(
                "ok: {} run, {} point(s), R = {}, {} / {}",
                base.mode,
                points,
                base.params.memory_ratio(),
                regime.markovianity,
                regime.damping
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
