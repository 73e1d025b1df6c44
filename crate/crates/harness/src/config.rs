//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use mqc_core::hpe::{PrecisionModel, ScaleSet};
use mqc_core::samplers::MAX_EXACT_VERTICES;
use mqc_core::topology::{grid_graph, path_graph};
use mqc_core::{chimera_graph, complete_graph, ChimeraSpec, Graph, Interval, PairingStrategy, SamplerKind, SamplerParams};

use crate::{HarnessError, Result};

/// Environment variable that replaces `output_dir` when set.
pub const OUT_DIR_ENV: &str = "MQC_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    Chimera { rows: usize, cols: usize, shore: usize },
    Complete { n: usize },
    Grid { rows: usize, cols: usize },
    Path { n: usize },
}

impl Topology {
    pub fn graph(&self) -> Result<Graph> {
        Ok(match *self {
            Topology::Chimera { rows, cols, shore } => chimera_graph(ChimeraSpec::new(rows, cols, shore))?,
            Topology::Complete { n } => complete_graph(n)?,
            Topology::Grid { rows, cols } => grid_graph(rows, cols)?,
            Topology::Path { n } => path_graph(n)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Raw,
    Sampling,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::Sampling => "sampling",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Mode::Raw => 1,
            Mode::Sampling => 2,
        }
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Mode::Raw),
            "sampling" => Ok(Mode::Sampling),
            other => Err(HarnessError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MqcSequential,
    MqcRank,
    MqcMaxdiff,
    BuiltinPp,
    SamplePersistence,
    Hpe,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MqcSequential,
        Method::MqcRank,
        Method::MqcMaxdiff,
        Method::BuiltinPp,
        Method::SamplePersistence,
        Method::Hpe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MqcSequential => "mqc_sequential",
            Method::MqcRank => "mqc_rank",
            Method::MqcMaxdiff => "mqc_maxdiff",
            Method::BuiltinPp => "builtin_pp",
            Method::SamplePersistence => "sample_persistence",
            Method::Hpe => "hpe",
        }
    }

    pub fn strategy(self) -> Option<PairingStrategy> {
        match self {
            Method::MqcSequential => Some(PairingStrategy::Sequential),
            Method::MqcRank => Some(PairingStrategy::RankOrder),
            Method::MqcMaxdiff => Some(PairingStrategy::MaxDifference),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown method `{s}`")))
    }
}

/// Sampler used to produce one mode's runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSampler {
    pub sampler: SamplerKind,
    #[serde(default)]
    pub params: SamplerParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersistenceSettings {
    pub threshold: f64,
    pub rounds: usize,
}

impl Default for PersistenceSettings {
    fn default() -> Self {
        Self { threshold: 0.9, rounds: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HpeSettings {
    pub scales: Vec<f64>,
    pub precision: PrecisionModel,
}

impl Default for HpeSettings {
    fn default() -> Self {
        Self {
            scales: ScaleSet::default().scales().to_vec(),
            precision: PrecisionModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            sizes: vec![256, 512, 1024, 2048],
            repeats: 7,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub problems: usize,
    pub gen_seed: u64,
    pub h_range: Interval,
    pub j_range: Interval,
    pub run_counts: Vec<usize>,
    pub modes: Vec<Mode>,
    pub methods: Vec<Method>,
    pub raw: ModeSampler,
    pub sampling: ModeSampler,
    pub width_cap: usize,
    pub persistence: PersistenceSettings,
    pub hpe: HpeSettings,
    pub bench: BenchSettings,
    /// Records the exact ground energy of every problem; needs at most 25 vertices.
    pub oracle: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Chimera { rows: 4, cols: 4, shore: 4 },
            problems: 50,
            gen_seed: 316,
            h_range: Interval::new(-2.0, 2.0),
            j_range: Interval::new(-1.0, 1.0),
            run_counts: vec![200, 400],
            modes: vec![Mode::Raw, Mode::Sampling],
            methods: Method::ALL.to_vec(),
            raw: ModeSampler {
                sampler: SamplerKind::Anneal,
                params: SamplerParams { sweeps: 200, ..Default::default() },
            },
            sampling: ModeSampler {
                sampler: SamplerKind::Gibbs,
                params: SamplerParams::default(),
            },
            width_cap: 4,
            persistence: PersistenceSettings::default(),
            hpe: HpeSettings::default(),
            bench: BenchSettings::default(),
            oracle: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let message = e.message().trim_end().replace('\n', " ");
            HarnessError::Config(match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    let source = text.lines().nth(line - 1).unwrap_or("").trim();
                    format!("line {line} `{source}`: {message}")
                }
                None => message,
            })
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn mode_sampler(&self, mode: Mode) -> &ModeSampler {
        match mode {
            Mode::Raw => &self.raw,
            Mode::Sampling => &self.sampling,
        }
    }

    pub fn scale_set(&self, run_count: usize) -> Result<ScaleSet> {
        let per_scale = (run_count / self.hpe.scales.len().max(1)).max(1);
        Ok(ScaleSet::new(self.hpe.scales.clone(), per_scale)?)
    }

    /// Output directory, honoring [`OUT_DIR_ENV`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let graph = self.topology.graph()?;
        if self.problems == 0 {
            return bad("problems must be positive".into());
        }
        if self.run_counts.is_empty() || self.run_counts.contains(&0) {
            return bad("run_counts must be a nonempty list of positive counts".into());
        }
        if self.modes.is_empty() {
            return bad("modes must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        self.h_range.validate("h_range")?;
        self.j_range.validate("j_range")?;
        if self.width_cap == 0 {
            return bad("width_cap must be positive".into());
        }
        let p = &self.persistence;
        if !(p.threshold > 0.5 && p.threshold <= 1.0) || p.rounds == 0 {
            return bad(format!(
                "persistence needs threshold in (0.5, 1] and positive rounds, got {} and {}",
                p.threshold, p.rounds
            ));
        }
        self.hpe.precision.validate()?;
        ScaleSet::new(self.hpe.scales.clone(), 1)?;
        if self.bench.sizes.is_empty() || self.bench.sizes.contains(&0) || self.bench.repeats == 0 {
            return bad("bench needs positive sizes and repeats".into());
        }
        if self.oracle && graph.vertex_count() > MAX_EXACT_VERTICES {
            return bad(format!(
                "oracle requested for {} vertices; exhaustive search is limited to {MAX_EXACT_VERTICES}",
                graph.vertex_count()
            ));
        }
        Ok(())
    }
}

/// Seed of the sampler producing `mode` runs of size `run_count` for a problem.
pub fn sampler_seed(problem_seed: u64, mode: Mode, run_count: usize) -> u64 {
    mqc_core::rng::sub_seed(mqc_core::rng::sub_seed(problem_seed, mode.tag()), run_count as u64)
}
