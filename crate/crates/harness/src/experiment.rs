//! Running a configured experiment and reading and writing its files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ivr_core::ivr::{Diagnostics, Ensemble};
use ivr_core::quantum::quantum_series;
use ivr_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MethodChoice};
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: &str = "t,re_c,im_c,abs_c,norm,mc_error";
pub const MANIFEST: &str = "manifest.toml";

/// One autocorrelation series as written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodSeries {
    pub method: MethodChoice,
    pub times: Vec<f64>,
    pub c: Vec<Complex64>,
    /// `NaN` where no norm was computed.
    pub norm: Vec<f64>,
    pub mc_error: Vec<f64>,
    pub trajectories: usize,
    pub diagnostics: Diagnostics,
    pub wall_seconds: f64,
}

/// Runs every method of `cfg`. Semiclassical methods share one trajectory ensemble.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<MethodSeries>> {
    cfg.validate()?;
    let potential = cfg.potential()?;
    let initial = cfg.initial_state()?;
    let times = cfg.times();
    let mut out: Vec<MethodSeries> = Vec::new();

    let variants: Vec<_> = cfg.semiclassical().collect();
    if !variants.is_empty() {
        let start = Instant::now();
        let mut ensemble = Ensemble::new(
            &potential,
            initial,
            &variants,
            times.clone(),
            cfg.ensemble_config(&potential, threads),
        )?;
        if let Some(grid) = cfg.norm_grid() {
            ensemble = ensemble.with_norm(grid?);
        }
        let series = ensemble.run(cfg.sampling.trajectories, cfg.sampling.seed)?;
        let wall = start.elapsed().as_secs_f64();
        for s in series {
            let n = times.len();
            out.push(MethodSeries {
                    method: MethodChoice::Semiclassical(s.method.variant),
                    times: s.times,
                    c: s.c,
                    norm: s.norm.unwrap_or_else(|| vec![f64::NAN; n]),
                    mc_error: s.mc_error,
                    trajectories: s.n_trajectories,
                    diagnostics: s.diagnostics,
                wall_seconds: wall,
            });
        }
    }

    if cfg.methods.contains(&MethodChoice::Quantum) {
        let grid = cfg.quantum_grid().expect("validated")?;
        let start = Instant::now();
        let q = quantum_series(&potential, &initial, &grid, &times, cfg.arithmetic())?;
        out.push(MethodSeries {
                method: MethodChoice::Quantum,
                mc_error: vec![0.0; q.times.len()],
                times: q.times,
                c: q.c,
                norm: q.norm,
                trajectories: 0,
                diagnostics: Diagnostics::default(),
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }

    Ok(cfg
        .methods
        .iter()
        .map(|m| {
            let at = out.iter().position(|s| s.method == *m).expect("every method ran");
            out.swap_remove(at)
        })
        .collect())
}

/// CSV text with 17 significant digits in every numeric column.
pub fn csv(series: &MethodSeries) -> String {
    let mut s = String::with_capacity(128 * (series.times.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for k in 0..series.times.len() {
        let c = series.c[k];
        writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            series.times[k],
            c.re,
            c.im,
            c.norm(),
            series.norm[k],
            series.mc_error[k]
        )
        .expect("writing to a string");
    }
    s
}

pub fn csv_file(method: &MethodChoice) -> String {
    format!("{}.csv", method.label())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub config_hash: String,
    pub seed: u64,
    pub harness_version: String,
    pub files: Vec<String>,
    pub methods: BTreeMap<String, MethodRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub trajectories: usize,
    pub wall_seconds: f64,
    pub harmonic_fallbacks: usize,
    pub uncovered_terms: usize,
}

fn manifest_text(cfg: &ExperimentConfig, series: &[MethodSeries]) -> String {
    let info = ManifestInfo {
        config_hash: cfg.hash(),
        seed: cfg.sampling.seed,
        harness_version: env!("CARGO_PKG_VERSION").into(),
        files: series.iter().map(|s| csv_file(&s.method)).collect(),
        methods: series
            .iter()
            .map(|s| {
                (
                    s.method.to_string(),
                    MethodRecord {
                        trajectories: s.trajectories,
                        wall_seconds: s.wall_seconds,
                        harmonic_fallbacks: s.diagnostics.harmonic_fallbacks,
                        uncovered_terms: s.diagnostics.uncovered_terms,
                    },
                )
            })
            .collect(),
    };
    let mut table = toml::Table::try_from(cfg).expect("config serializes");
    table.insert("manifest".into(), toml::Value::try_from(info).expect("manifest serializes"));
    format!(
        "# ivr run manifest; `ivr run {MANIFEST}` repeats this run\n{}",
        toml::to_string(&table).expect("manifest serializes")
    )
}

fn gnuplot_script(cfg: &ExperimentConfig, series: &[MethodSeries]) -> String {
    let plots = |column: usize| {
        series
            .iter()
            .map(|s| format!("'{}' using 1:{column} with lines title '{}'", csv_file(&s.method), s.method))
            .collect::<Vec<_>>()
            .join(", \\\n     ")
    };
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n\
         set terminal pngcairo size 900,600\n\
         set output 'autocorrelation.png'\nset ylabel '|c(t)|'\nset title '{name}'\nplot {abs}\n\
         set output 'norm.png'\nset ylabel 'norm'\nplot {norm}\n",
        name = cfg.name,
        abs = plots(4),
        norm = plots(5),
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(format!("cannot write {}", path.display()), e))
}

/// Writes one CSV per method, the manifest and optionally a gnuplot script.
pub fn write_run(cfg: &ExperimentConfig, series: &[MethodSeries], dir: &Path, gnuplot: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| HarnessError::io(format!("cannot create output directory {}", dir.display()), e))?;
    let mut written = Vec::new();
    for s in series {
        let path = dir.join(csv_file(&s.method));
        write(&path, &csv(s))?;
        written.push(path);
    }
    let path = dir.join(MANIFEST);
    write(&path, &manifest_text(cfg, series))?;
    written.push(path);
    if gnuplot {
        let path = dir.join("plot.gp");
        write(&path, &gnuplot_script(cfg, series))?;
        written.push(path);
    }
    Ok(written)
}

/// A run read back from disk.
#[derive(Clone, Debug)]
pub struct StoredRun {
    pub config: ExperimentConfig,
    pub manifest: ManifestInfo,
    pub series: Vec<MethodSeries>,
}

#[derive(Deserialize)]
struct ManifestOnly {
    manifest: ManifestInfo,
}

pub fn read_run(dir: &Path) -> Result<StoredRun> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| HarnessError::io(format!("cannot read {}", path.display()), e))?;
    let config = ExperimentConfig::parse(&text)?;
    let manifest = toml::from_str::<ManifestOnly>(&text)
        .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?
        .manifest;
    let mut series = Vec::new();
    for method in &config.methods {
        let record = manifest.methods.get(&method.to_string());
        let path = dir.join(csv_file(method));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| HarnessError::io(format!("cannot read {}", path.display()), e))?;
        let mut s = parse_csv(&text).map_err(|m| HarnessError::Input(format!("{}: {m}", path.display())))?;
        s.method = *method;
        if let Some(r) = record {
            s.trajectories = r.trajectories;
            s.wall_seconds = r.wall_seconds;
            s.diagnostics = Diagnostics {
                harmonic_fallbacks: r.harmonic_fallbacks,
                uncovered_terms: r.uncovered_terms,
            };
        }
        series.push(s);
    }
    Ok(StoredRun { config, manifest, series })
}

fn parse_csv(text: &str) -> std::result::Result<MethodSeries, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(format!("expected header {CSV_HEADER:?}"));
    }
    let mut s = MethodSeries {
        method: MethodChoice::Quantum,
        times: Vec::new(),
        c: Vec::new(),
        norm: Vec::new(),
        mc_error: Vec::new(),
        trajectories: 0,
        diagnostics: Diagnostics::default(),
        wall_seconds: 0.0,
    };
    for (i, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", i + 2))?;
        if v.len() != 6 {
            return Err(format!("line {}: expected 6 columns, got {}", i + 2, v.len()));
        }
        s.times.push(v[0]);
        s.c.push(Complex64::new(v[1], v[2]));
        s.norm.push(v[4]);
        s.mc_error.push(v[5]);
    }
    Ok(s)
}
