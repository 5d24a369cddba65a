use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classify::{SplitMode, DEFAULT_K};
use crate::embedding::{DelayParams, DEFAULT_FNN_RTOL, DEFAULT_MI_BINS};
use crate::synth::ScenarioConfig;
use crate::vectorize::DEFAULT_RESOLUTION;

/// Feature fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMethod {
    /// Raw projected sub-track values (length `N*`).
    Statistic,
    /// Persistence vector of the delay-embedded statistic.
    Persistence,
}

impl FeatureMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMethod::Statistic => "statistic",
            FeatureMethod::Persistence => "persistence",
        }
    }
}

impl std::str::FromStr for FeatureMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "statistic" => Ok(FeatureMethod::Statistic),
            "persistence" => Ok(FeatureMethod::Persistence),
            other => Err(format!("unknown feature method {other:?} (expected statistic or persistence)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub tau: usize,
    /// Estimate `tau` by mutual information and `dim` by false nearest
    /// neighbors from the training series of each length.
    pub auto: bool,
    pub max_tau: usize,
    pub max_dim: usize,
    pub mi_bins: usize,
    pub fnn_rtol: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        let d = DelayParams::default();
        Self {
            dim: d.dim,
            tau: d.tau,
            auto: false,
            max_tau: 10,
            max_dim: 5,
            mi_bins: DEFAULT_MI_BINS,
            fnn_rtol: DEFAULT_FNN_RTOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ImageConfig {
    pub resolution: usize,
    /// Kernel standard deviation; defaults to `p_max / 20`.
    pub sigma: Option<f64>,
    /// Persistence range; defaults to the largest finite persistence in the
    /// training split of each length.
    pub p_max: Option<f64>,
}

impl Default for ImageConfig {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            sigma: None,
            p_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", tag = "mode", deny_unknown_fields)]
pub enum SplitStrategy {
    Shuffled,
    /// Leading windows train, trailing windows test. `gap` defaults to
    /// `N* - 1`, which keeps every test window disjoint from every training
    /// window.
    Blocked {
        #[serde(default)]
        gap: Option<usize>,
    },
}

impl SplitStrategy {
    pub fn resolve(self, window: usize) -> SplitMode {
        match self {
            SplitStrategy::Shuffled => SplitMode::Shuffled,
            SplitStrategy::Blocked { gap } => SplitMode::Blocked {
                gap: gap.unwrap_or(window.saturating_sub(1)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub strategy: SplitStrategy,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            strategy: SplitStrategy::Shuffled,
        }
    }
}

/// Full experiment description. Absent fields take their defaults; a
/// default config runs the built-in synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root seed for the projection vector and the train/test split.
    pub seed: u64,
    /// Scene CSV (`track_id,label,frame,x,y`). Takes precedence over `scenario`.
    pub tracks: Option<PathBuf>,
    /// Synthetic scene, generated with its own seed.
    pub scenario: Option<ScenarioConfig>,
    /// Label of the target class; every other label is a confuser.
    pub target_label: String,
    /// Sub-track lengths `N*`.
    pub lengths: Vec<usize>,
    pub methods: Vec<FeatureMethod>,
    pub embedding: EmbeddingConfig,
    pub image: ImageConfig,
    pub k: usize,
    pub split: SplitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            tracks: None,
            scenario: Some(ScenarioConfig::default()),
            target_label: "target".into(),
            lengths: vec![100, 75, 50],
            methods: vec![FeatureMethod::Statistic, FeatureMethod::Persistence],
            embedding: EmbeddingConfig::default(),
            image: ImageConfig::default(),
            k: DEFAULT_K,
            split: SplitConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn schema_json() -> String {
        serde_json::to_string_pretty(&schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.lengths.is_empty() {
            return bad("no sub-track lengths".into());
        }
        if self.lengths.contains(&0) {
            return bad("sub-track lengths must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("no feature methods".into());
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        let e = &self.embedding;
        if e.dim == 0 || e.tau == 0 {
            return bad(format!("embedding dim and tau must be >= 1 (got {}, {})", e.dim, e.tau));
        }
        if e.auto && (e.max_tau == 0 || e.max_dim == 0 || e.mi_bins < 2 || !(e.fnn_rtol > 0.0)) {
            return bad("auto embedding needs max_tau >= 1, max_dim >= 1, mi_bins >= 2, fnn_rtol > 0".into());
        }
        if self.methods.contains(&FeatureMethod::Persistence) {
            let needed = (e.dim - 1) * e.tau + 2;
            if let Some(&l) = self.lengths.iter().find(|&&l| !e.auto && l < needed) {
                return bad(format!(
                    "sub-track length {l} too short for D={}, tau={}: need at least {needed}",
                    e.dim, e.tau
                ));
            }
        }
        let i = &self.image;
        if i.resolution == 0 {
            return bad("image resolution must be >= 1".into());
        }
        if let Some(s) = i.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma must be positive, got {s}"));
            }
        }
        if let Some(p) = i.p_max {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("p_max must be positive, got {p}"));
            }
        }
        let f = self.split.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {f}"));
        }
        if let Some(sc) = &self.scenario {
            let longest = self.lengths.iter().max().copied().unwrap_or(0);
            sc.validate(longest + 1).map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
