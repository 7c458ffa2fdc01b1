//! Pipeline configuration file (TOML).
//!
//! ```toml
//! [io]
//! tracks = "scene.csv"
//! model = "model.json"
//!
//! [cluster]
//! mode = "labeled"      # or "kmeans"
//! k = 4
//! seed = 0
//!
//! [reg]
//! epsilon = 1e-6
//!
//! [gmm]
//! N = "10..30"          # or a single integer
//! max_iters = 500
//! tol = 1e-6
//! floor = 1e-6
//! seed = 0
//! restarts = 5
//!
//! [split]
//! train = 128
//! test = 28
//!
//! [synth]
//! frame_count = 156
//! tool_path = "cut_stroke"
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tptrack::frames::{ClusterMode, ClusterSpec, DEFAULT_REG_EPSILON};
use tptrack::gmm::{ComponentCount, TrainConfig};
use tptrack::synth::{SceneConfig, ToolPath};
use tptrack::{Error, Result, SplitSpec};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub io: IoSection,
    #[serde(default)]
    pub cluster: ClusterSection,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub gmm: GmmSection,
    #[serde(default)]
    pub split: Option<SplitSection>,
    #[serde(default)]
    pub synth: SynthSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    pub tracks: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> String {
    "labeled".into()
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            k: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegSection {
    pub epsilon: f64,
}

impl Default for RegSection {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_REG_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComponentsValue {
    Fixed(usize),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmSection {
    #[serde(rename = "N")]
    pub n: Option<ComponentsValue>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub floor: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub frame_count: Option<usize>,
    pub cluster_count: Option<usize>,
    pub points_per_cluster: Option<usize>,
    pub drift_amplitude: Option<f64>,
    pub rotation_amplitude: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub tool_path: Option<String>,
    pub seed: Option<u64>,
}

/// Parses `"min..max"` (inclusive) or a single integer.
pub fn parse_components(text: &str) -> Result<ComponentCount> {
    let bad = || Error::Config(format!("gmm.N must be an integer or \"min..max\", got {text:?}"));
    match text.split_once("..") {
        Some((a, b)) => {
            let min: usize = a.trim().parse().map_err(|_| bad())?;
            let max: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if min == 0 || min > max {
                return Err(bad());
            }
            Ok(ComponentCount::Range { min, max })
        }
        None => text.trim().parse().map(ComponentCount::Fixed).map_err(|_| bad()),
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                Error::NotFound(format!("config file {}", path.display()))
            }
            _ => Error::Io(format!("{}: {e}", path.display())),
        })?;
        Self::from_toml(&text)
    }

    pub fn cluster_spec(&self) -> Result<ClusterSpec> {
        match self.cluster.mode.as_str() {
            "labeled" => Ok(ClusterSpec {
                mode: ClusterMode::Labeled,
                k: self.cluster.k.unwrap_or(0),
                seed: self.cluster.seed,
            }),
            "kmeans" => {
                let k = self
                    .cluster
                    .k
                    .ok_or_else(|| Error::Config("cluster.k is required in kmeans mode".into()))?;
                if k < 2 {
                    return Err(Error::Config("cluster.k must be >= 2".into()));
                }
                Ok(ClusterSpec::kmeans(k, self.cluster.seed))
            }
            other => Err(Error::Config(format!(
                "cluster.mode must be \"labeled\" or \"kmeans\", got {other:?}"
            ))),
        }
    }

    /// Minimum cluster count each frame must support.
    pub fn min_clusters(&self) -> usize {
        match self.cluster.mode.as_str() {
            "kmeans" => self.cluster.k.unwrap_or(1),
            _ => 1,
        }
    }

    pub fn reg_epsilon(&self) -> Result<f64> {
        let e = self.reg.epsilon;
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Config("reg.epsilon must be > 0".into()));
        }
        Ok(e)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let components = match &self.gmm.n {
            None => d.components,
            Some(ComponentsValue::Fixed(n)) => ComponentCount::Fixed(*n),
            Some(ComponentsValue::Text(s)) => parse_components(s)?,
        };
        let cfg = TrainConfig {
            components,
            max_iters: self.gmm.max_iters.unwrap_or(d.max_iters),
            loglik_tol: self.gmm.tol.unwrap_or(d.loglik_tol),
            floor: self.gmm.floor.unwrap_or(d.floor),
            seed: self.gmm.seed.unwrap_or(d.seed),
            restarts: self.gmm.restarts.unwrap_or(d.restarts),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn split_spec(&self) -> Result<Option<SplitSpec>> {
        self.split
            .as_ref()
            .map(|s| SplitSpec::new(s.train, s.test))
            .transpose()
    }

    pub fn scene_config(&self) -> Result<SceneConfig> {
        let d = SceneConfig::default();
        let s = &self.synth;
        let cfg = SceneConfig {
            frame_count: s.frame_count.unwrap_or(d.frame_count),
            cluster_count: s.cluster_count.unwrap_or(d.cluster_count),
            points_per_cluster: s.points_per_cluster.unwrap_or(d.points_per_cluster),
            drift_amplitude: s.drift_amplitude.unwrap_or(d.drift_amplitude),
            rotation_amplitude: s.rotation_amplitude.unwrap_or(d.rotation_amplitude),
            noise_sigma: s.noise_sigma.unwrap_or(d.noise_sigma),
            tool_path: match &s.tool_path {
                Some(p) => p.parse::<ToolPath>()?,
                None => d.tool_path,
            },
            seed: s.seed.unwrap_or(d.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
