//! Run configuration: TOML (or a JSON output carrying a `config` object)
//! merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use delaysync::graph::{builtin, GraphSpec, WeightedGraph};
use delaysync::network::SyncConfig;
use delaysync::sweep::{axis, SweepGrid, DEFAULT_PERTURBED};

pub const WORKERS_ENV: &str = "DELAY_SYNC_WORKERS";

/// `a:b:step`, inclusive of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl RangeSpec {
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        Ok(axis(self.start, self.end, self.step)?)
    }
}

impl TryFrom<String> for RangeSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<RangeSpec> for String {
    fn from(r: RangeSpec) -> String {
        r.to_string()
    }
}

impl std::str::FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{s}` is not of the form a:b:step"));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("range `{s}`: `{p}` is not a number"))
        };
        let (start, end, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(format!("range `{s}` must be finite"));
        }
        if !(step > 0.0) {
            return Err(format!("range `{s}`: step must be positive"));
        }
        if end < start {
            return Err(format!("range `{s}`: end is below start"));
        }
        if start < 0.0 {
            return Err(format!("range `{s}`: values must be nonnegative"));
        }
        Ok(Self { start, end, step })
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// A builtin name or an inline graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Builtin(String),
    Spec(GraphSpec),
}

impl GraphSource {
    /// `--graph` value: a path to a TOML graph file if one exists there,
    /// otherwise a builtin name.
    pub fn from_arg(arg: &str) -> anyhow::Result<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read graph file {}", path.display()))?;
            let spec: GraphSpec =
                toml::from_str(&text).with_context(|| format!("invalid graph file {}", path.display()))?;
            return Ok(Self::Spec(spec));
        }
        if arg.ends_with(".toml") {
            bail!("graph file {} not found", path.display());
        }
        Ok(Self::Builtin(arg.to_string()))
    }

    pub fn build(&self) -> anyhow::Result<WeightedGraph> {
        Ok(match self {
            Self::Builtin(name) => builtin(name)?,
            Self::Spec(spec) => spec.build()?,
        })
    }

    pub fn id(&self) -> String {
        match self {
            Self::Builtin(name) => name.clone(),
            Self::Spec(spec) => format!("{}{}", spec.kind, spec.k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub t_end: f64,
    pub seed: u64,
    pub stride: usize,
    pub step: Option<f64>,
    pub perturbed: Vec<usize>,
    pub out: PathBuf,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            gamma: None,
            tau: None,
            t_end: 100.0,
            seed: 1,
            stride: 10,
            step: None,
            perturbed: DEFAULT_PERTURBED.to_vec(),
            out: PathBuf::from("trajectory.csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub gamma_range: RangeSpec,
    pub tau_range: RangeSpec,
    pub workers: Option<usize>,
    pub seeds: Vec<u64>,
    pub perturbed: Vec<usize>,
    pub out: PathBuf,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            gamma_range: RangeSpec {
                start: 0.25,
                end: 12.0,
                step: 0.25,
            },
            tau_range: RangeSpec {
                start: 0.0,
                end: 6.0,
                step: 0.05,
            },
            workers: None,
            seeds: vec![1],
            perturbed: DEFAULT_PERTURBED.to_vec(),
            out: PathBuf::from("region.csv"),
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> anyhow::Result<SweepGrid> {
        Ok(SweepGrid::new(self.gamma_range.values()?, self.tau_range.values()?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheorySection {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda2: Option<f64>,
    pub lambdak: Option<f64>,
    /// Upper end of the sampled φ curve; four times γ* when absent.
    pub gamma_max: Option<f64>,
    pub samples: usize,
    pub out: PathBuf,
}

impl Default for TheorySection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            lambda2: None,
            lambdak: None,
            gamma_max: None,
            samples: 200,
            out: PathBuf::from("phi_curve.csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// Topologies to sweep when no stored regions are given.
    pub graphs: Vec<String>,
    /// Sweep summaries written by `sweep`.
    pub regions: Vec<PathBuf>,
    /// Relative tolerance for "equal τ*".
    pub tolerance: f64,
    pub out: PathBuf,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            graphs: vec!["g1".into(), "g2".into(), "g4".into()],
            regions: Vec::new(),
            tolerance: 0.1,
            out: PathBuf::from("comparison.json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub graph: Option<GraphSource>,
    pub sync: SyncConfig,
    pub simulate: SimulateSection,
    pub sweep: SweepSection,
    pub theory: TheorySection,
    pub compare: CompareSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: delaysync::HindmarshRose::NAME.into(),
            graph: None,
            sync: SyncConfig::default(),
            simulate: SimulateSection::default(),
            sweep: SweepSection::default(),
            theory: TheorySection::default(),
            compare: CompareSection::default(),
        }
    }
}

/// Wrapper used to re-read an output file that embeds its config.
#[derive(Deserialize)]
struct Embedded {
    config: RunConfig,
}

impl RunConfig {
    /// Reads a TOML config, or the `config` object of a JSON output.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let e: Embedded = serde_json::from_str(&text)
                .with_context(|| format!("{} has no valid `config` object", path.display()))?;
            Ok(e.config)
        } else {
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
        }
    }

    pub fn graph(&self) -> anyhow::Result<(&GraphSource, WeightedGraph)> {
        let src = self
            .graph
            .as_ref()
            .context("no graph given (use --graph or `graph` in the config)")?;
        let g = src
            .build()
            .with_context(|| format!("invalid graph `{}`", src.id()))?;
        Ok((src, g))
    }

    pub fn check_model(&self) -> anyhow::Result<()> {
        delaysync::models::model_by_name(&self.model)?;
        Ok(())
    }

    /// Flag, then config, then the environment, then the machine.
    pub fn resolve_workers(&mut self) -> anyhow::Result<usize> {
        let workers = match self.sweep.workers {
            Some(w) => w,
            None => match std::env::var(WORKERS_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .with_context(|| format!("{WORKERS_ENV}=`{v}` is not a positive integer"))?,
                Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
            },
        };
        if workers == 0 {
            bail!("workers must be at least 1");
        }
        self.sweep.workers = Some(workers);
        Ok(workers)
    }
}
