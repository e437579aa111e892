use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ivr_harness::analysis::{compare, convergence_csv, converge, diagnose_width, width_csv};
use ivr_harness::experiment::{read_run, run, write_run};
use ivr_harness::{preset, ExperimentConfig, HarnessError, MethodChoice, Result, PRESETS};

/// Semiclassical IVR propagators against a split-operator reference.
#[derive(Parser)]
#[command(name = "ivr", version)]
struct Cli {
    /// Worker threads for the trajectory ensemble (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Config file (a run manifest works too).
    config: Option<PathBuf>,
    /// Built-in config instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Output directory; overrides the config and IVR_OUTPUT_DIR.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Override the trajectory count.
    #[arg(long, short = 'n')]
    trajectories: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write CSVs and a manifest.
    Run {
        #[command(flatten)]
        source: Source,
        /// Also write a gnuplot script.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Rank the methods of a finished run by deviation from a baseline.
    Compare {
        dir: PathBuf,
        #[arg(long, default_value = "quantum")]
        baseline: String,
    },
    /// Monte Carlo convergence against the largest trajectory count.
    Converge {
        #[command(flatten)]
        source: Source,
        /// Trajectory counts, e.g. 1000,2000,4000.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Real parts of the thawed width and its square and fourth roots along one trajectory.
    DiagnoseWidth {
        #[command(flatten)]
        source: Source,
        /// Initial position; defaults to the packet centre.
        #[arg(long, allow_negative_numbers = true)]
        qi: Option<f64>,
        /// Initial momentum; defaults to the packet centre.
        #[arg(long = "pi", allow_negative_numbers = true)]
        p_i: Option<f64>,
    },
    /// Print a built-in config.
    Preset { name: String },
}

fn load(source: &Source) -> Result<ExperimentConfig> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name).ok_or_else(|| {
            HarnessError::Config(format!("unknown preset {name:?}; available: {}", PRESETS.join(", ")))
        })?,
        _ => return Err(HarnessError::Config("give a config file or --preset".into())),
    };
    if let Some(n) = source.trajectories {
        cfg.sampling.trajectories = n;
    }
    if let Some(seed) = source.seed {
        cfg.sampling.seed = seed;
    }
    if let Some(dir) = &source.output {
        cfg.output.dir = dir.clone();
    } else if let Some(dir) = std::env::var_os("IVR_OUTPUT_DIR") {
        cfg.output.dir = dir.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn save(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::io(format!("cannot create {}", parent.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| HarnessError::io(format!("cannot write {}", path.display()), e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { source, gnuplot } => {
            let cfg = load(&source)?;
            let series = run(&cfg, cli.threads)?;
            for path in write_run(&cfg, &series, &cfg.output.dir, gnuplot)? {
                println!("{}", path.display());
            }
            for s in &series {
                if s.diagnostics.harmonic_fallbacks > 0 {
                    eprintln!("{}: {} samples fell back to the thawed monodromy", s.method, s.diagnostics.harmonic_fallbacks);
                }
                if s.diagnostics.uncovered_terms > 0 {
                    eprintln!("{}: {} Gaussian terms were truncated by the norm grid", s.method, s.diagnostics.uncovered_terms);
                }
            }
        }
        Command::Compare { dir, baseline } => {
            let baseline: MethodChoice = baseline.parse().map_err(HarnessError::Config)?;
            let stored = read_run(&dir)?;
            let report = compare(&stored.series, baseline)?;
            let label = baseline.label();
            save(&dir.join(format!("report-{label}.txt")), &report.text())?;
            save(&dir.join(format!("report-{label}.json")), &report.json())?;
            print!("{}", report.text());
        }
        Command::Converge { source, n_list } => {
            let cfg = load(&source)?;
            let rows = converge(&cfg, &n_list, cli.threads)?;
            let text = convergence_csv(&rows);
            save(&cfg.output.dir.join("converge.csv"), &text)?;
            print!("{text}");
        }
        Command::DiagnoseWidth { source, qi, p_i } => {
            let cfg = load(&source)?;
            let d = diagnose_width(&cfg, qi.unwrap_or(cfg.state.q0), p_i.unwrap_or(cfg.state.p0))?;
            let path = cfg.output.dir.join("width.csv");
            save(&path, &width_csv(&d))?;
            println!("{}", path.display());
        }
        Command::Preset { name } => {
            let cfg = preset(&name).ok_or_else(|| {
                HarnessError::Config(format!("unknown preset {name:?}; available: {}", PRESETS.join(", ")))
            })?;
            print!("{}", cfg.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
