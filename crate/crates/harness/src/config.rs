//! Experiment configuration files and the built-in presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ivr_core::classical::IntegratorConfig;
use ivr_core::gaussian::{GaussianState, SpatialGrid};
use ivr_core::ivr::{CoveragePolicy, EnsembleConfig, NormGrid, SamplingDensity, Variant};
use ivr_core::potentials::{Potential, PotentialKind};
use ivr_core::quantum::{Arithmetic, GridSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Any of `hk`, `tga`, `root-tga:N`, `gh-tga`, `quantum`.
    pub methods: Vec<MethodChoice>,
    pub potential: PotentialConfig,
    pub state: StateConfig,
    pub time: TimeConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormConfig>,
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialConfig {
    Harmonic { mass: f64, omega: f64 },
    Morse { mass: f64, depth: f64, range: f64 },
    Baranger { mass: f64, strength: f64, offset: f64, stiffness: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub q0: f64,
    pub p0: f64,
    pub gamma: f64,
    pub hbar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub n_output: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub trajectories: usize,
    pub seed: u64,
    #[serde(default)]
    pub density: DensityChoice,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityChoice {
    #[default]
    Magnitude,
    SquaredMagnitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    /// Omitted: the potential's default step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub track_stride: usize,
}

fn one() -> usize {
    1
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { dt: None, track_stride: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
    #[serde(default)]
    pub arithmetic: ArithmeticChoice,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticChoice {
    #[default]
    Compensated,
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub policy: PolicyChoice,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    #[default]
    Truncate,
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// One requested series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MethodChoice {
    Semiclassical(Variant),
    Quantum,
}

impl MethodChoice {
    /// File stem and report label.
    pub fn label(&self) -> String {
        match self {
            MethodChoice::Semiclassical(v) => v.to_string(),
            MethodChoice::Quantum => "quantum".into(),
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodChoice::Semiclassical(Variant::HermanKluk) => write!(f, "hk"),
            MethodChoice::Semiclassical(Variant::Thawed) => write!(f, "tga"),
            MethodChoice::Semiclassical(Variant::RootThawed(n)) => write!(f, "root-tga:{n}"),
            MethodChoice::Semiclassical(Variant::GlobalHarmonic) => write!(f, "gh-tga"),
            MethodChoice::Quantum => write!(f, "quantum"),
        }
    }
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let variant = match s.trim().to_ascii_lowercase().as_str() {
            "hk" => Variant::HermanKluk,
            "tga" => Variant::Thawed,
            "gh-tga" => Variant::GlobalHarmonic,
            "quantum" => return Ok(MethodChoice::Quantum),
            other => match other.strip_prefix("root-tga:") {
                Some(n) => Variant::RootThawed(
                    n.parse()
                        .map_err(|_| format!("root order in {s:?} is not an integer"))?,
                ),
                None => {
                    return Err(format!(
                        "unknown method {s:?}; expected hk, tga, root-tga:N, gh-tga or quantum"
                    ))
                }
            },
        };
        variant.validate().map_err(|e| e.to_string())?;
        Ok(MethodChoice::Semiclassical(variant))
    }
}

impl Serialize for MethodChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    /// Parses a config file. A run manifest is accepted too: its `[manifest]`
    /// table is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let cfg: Self = if table.contains_key("manifest") {
            let mut table = table;
            table.remove("manifest");
            table.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        Sha256::digest(canonical.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.methods.is_empty() {
            return bad("methods: the method list is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("methods: {m} is listed twice"));
            }
        }
        if self.methods.contains(&MethodChoice::Quantum) && self.quantum.is_none() {
            return bad("methods: quantum requested but there is no [quantum] grid".into());
        }
        if !(self.time.t_max > 0.0 && self.time.t_max.is_finite()) || self.time.n_output == 0 {
            return bad("time: t_max must be positive and n_output at least 1".into());
        }
        if self.sampling.trajectories == 0 && self.semiclassical().next().is_some() {
            return bad("sampling.trajectories must be positive".into());
        }
        if self.integrator.track_stride == 0 {
            return bad("integrator.track_stride must be at least 1".into());
        }
        let wrap = |section: &str, e: ivr_core::Error| HarnessError::Config(format!("{section}: {e}"));
        self.potential().map_err(|e| wrap("potential", e))?;
        self.initial_state().map_err(|e| wrap("state", e))?;
        if let Some(dt) = self.integrator.dt {
            IntegratorConfig::new(dt).map_err(|e| wrap("integrator", e))?;
        }
        if let Some(q) = self.quantum_grid() {
            q.map_err(|e| wrap("quantum", e))?;
        }
        if let Some(n) = self.norm_grid() {
            n.map_err(|e| wrap("norm", e))?;
        }
        Ok(())
    }

    pub fn potential(&self) -> ivr_core::Result<Potential<f64>> {
        let (kind, mass) = match self.potential {
            PotentialConfig::Harmonic { mass, omega } => (PotentialKind::Harmonic { omega }, mass),
            PotentialConfig::Morse { mass, depth, range } => (PotentialKind::Morse { depth, range }, mass),
            PotentialConfig::Baranger { mass, strength, offset, stiffness } => {
                (PotentialKind::Baranger { strength, offset, stiffness }, mass)
            }
        };
        Potential::new(kind, mass)
    }

    pub fn initial_state(&self) -> ivr_core::Result<GaussianState<f64>> {
        let s = self.state;
        GaussianState::coherent(s.q0, s.p0, s.gamma, s.hbar)
    }

    /// `n_output + 1` equally spaced times from 0 to `t_max`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.time.n_output;
        (0..=n).map(|k| self.time.t_max * k as f64 / n as f64).collect()
    }

    pub fn semiclassical(&self) -> impl Iterator<Item = Variant> + '_ {
        self.methods.iter().filter_map(|m| match m {
            MethodChoice::Semiclassical(v) => Some(*v),
            MethodChoice::Quantum => None,
        })
    }

    pub fn integrator(&self, potential: &Potential<f64>) -> IntegratorConfig<f64> {
        match self.integrator.dt {
            Some(dt) => IntegratorConfig { dt },
            None => IntegratorConfig::default_for(potential),
        }
    }

    pub fn ensemble_config(&self, potential: &Potential<f64>, threads: Option<usize>) -> EnsembleConfig<f64> {
        let mut cfg = EnsembleConfig::new(self.integrator(potential));
        cfg.track_stride = self.integrator.track_stride;
        cfg.sampling = match self.sampling.density {
            DensityChoice::Magnitude => SamplingDensity::Magnitude,
            DensityChoice::SquaredMagnitude => SamplingDensity::SquaredMagnitude,
        };
        cfg.threads = threads;
        cfg
    }

    pub fn quantum_grid(&self) -> Option<ivr_core::Result<GridSpec<f64>>> {
        self.quantum.map(|q| GridSpec::new(q.x_min, q.x_max, q.n_points, q.dt))
    }

    pub fn arithmetic(&self) -> Arithmetic {
        match self.quantum.map(|q| q.arithmetic).unwrap_or_default() {
            ArithmeticChoice::Compensated => Arithmetic::Compensated,
            ArithmeticChoice::Fast => Arithmetic::Fast,
        }
    }

    pub fn norm_grid(&self) -> Option<ivr_core::Result<NormGrid<f64>>> {
        self.norm.map(|n| {
            Ok(NormGrid {
                grid: SpatialGrid::new(n.x_min, n.x_max, n.n_points)?,
                policy: match n.policy {
                    PolicyChoice::Truncate => CoveragePolicy::Truncate,
                    PolicyChoice::Strict => CoveragePolicy::Strict,
                },
            })
        })
    }
}

pub const PRESETS: [&str; 2] = ["baranger-paper", "morse-paper"];

/// Built-in configurations by name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    use MethodChoice::{Quantum, Semiclassical as S};
    match name {
        "baranger-paper" => Some(ExperimentConfig {
            name: name.into(),
            methods: vec![
                S(Variant::HermanKluk),
                S(Variant::Thawed),
                S(Variant::RootThawed(2)),
                S(Variant::RootThawed(4)),
                Quantum,
            ],
            potential: PotentialConfig::Baranger { mass: 1.0, strength: 1.0, offset: 5.0, stiffness: 1.0 },
            state: StateConfig { q0: 0.0, p0: 1.0, gamma: 100.0 / 9.0, hbar: 0.05 },
            time: TimeConfig { t_max: 110.0, n_output: 440 },
            sampling: SamplingConfig { trajectories: 5000, seed: 1, density: DensityChoice::Magnitude },
            integrator: IntegratorSection { dt: Some(1e-3), track_stride: 1 },
            quantum: Some(QuantumConfig {
                x_min: -12.0,
                x_max: 12.0,
                n_points: 1024,
                dt: 5e-4,
                arithmetic: ArithmeticChoice::Compensated,
            }),
            norm: Some(NormConfig { x_min: -16.0, x_max: 16.0, n_points: 2048, policy: PolicyChoice::Truncate }),
            output: OutputConfig { dir: "runs/baranger-paper".into() },
        }),
        // hbar = 1 is a choice of scaled units
        "morse-paper" => Some(ExperimentConfig {
            name: name.into(),
            methods: vec![S(Variant::HermanKluk), S(Variant::Thawed), S(Variant::GlobalHarmonic), Quantum],
            potential: PotentialConfig::Morse { mass: 1.0, depth: 30.0, range: 0.08 },
            state: StateConfig { q0: 0.0, p0: 0.0, gamma: 12.0, hbar: 1.0 },
            time: TimeConfig { t_max: 100.0, n_output: 400 },
            sampling: SamplingConfig { trajectories: 5000, seed: 1, density: DensityChoice::Magnitude },
            integrator: IntegratorSection::default(),
            quantum: Some(QuantumConfig {
                x_min: -25.0,
                x_max: -25.0 + 0.1 * 32768.0,
                n_points: 32768,
                dt: 5e-4,
                arithmetic: ArithmeticChoice::Fast,
            }),
            norm: Some(NormConfig { x_min: -25.0, x_max: 295.0, n_points: 4096, policy: PolicyChoice::Truncate }),
            output: OutputConfig { dir: "runs/morse-paper".into() },
        }),
        _ => None,
    }
}
