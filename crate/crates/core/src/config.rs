//! Run configuration: one JSON document, every section optional, unknown
//! keys rejected.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "regime": { "target_gmacs": 2.5, "band": 0.05 },
//!   "search": { "count": 320 },
//!   "bootstrap": { "replicates": 1000 },
//!   "evaluator": { "kind": "surrogate", "noise_sigma": 0.0 }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anchors::CropPolicy;
use crate::arch::{HeadConfig, NeckConfig};
use crate::bootstrap::BootstrapParams;
use crate::error::{Error, Result};
use crate::flops::InputSize;
use crate::search::{FlopRegime, SamplerConfig, SearchSpaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    pub regime: FlopRegime,
    pub search_space: SearchSpaceSpec,
    pub sampler: SamplerConfig,
    pub search: SearchConfig,
    pub bootstrap: BootstrapParams,
    pub crop: CropConfig,
    pub evaluator: EvaluatorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: None,
            dataset: DatasetConfig::default(),
            regime: FlopRegime {
                target_gmacs: 2.5,
                band: FlopRegime::default_band(),
            },
            search_space: SearchSpaceSpec::default(),
            sampler: SamplerConfig::default(),
            search: SearchConfig::default(),
            bootstrap: BootstrapParams::default(),
            crop: CropConfig::default(),
            evaluator: EvaluatorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: if e.path().to_string() == "." {
                origin.to_string()
            } else {
                format!("{origin}: {}", e.path())
            },
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |section: &str, e: Error| Error::Config {
            path: section.to_string(),
            message: e.to_string(),
        };
        self.regime.validate().map_err(|e| wrap("regime", e))?;
        self.search_space.validate().map_err(|e| wrap("search_space", e))?;
        self.bootstrap.validate().map_err(|e| wrap("bootstrap", e))?;
        self.crop.policy().validate().map_err(|e| wrap("crop", e))?;
        self.search.input_size().map_err(|e| wrap("search.input", e))?;
        if self.search.count == 0 {
            return Err(wrap("search.count", Error::InvalidArgument("must be positive".into())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    /// Base for the relative paths below.
    pub root: Option<PathBuf>,
    pub gt_file: Option<PathBuf>,
    pub image_root: Option<PathBuf>,
    pub sizes_csv: Option<PathBuf>,
    /// Keep faces flagged invalid (dropped by default).
    pub keep_invalid: bool,
}

impl DatasetConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub count: usize,
    /// Input resolution for multiply-add accounting, `"WxH"`.
    pub input: String,
    /// Neck and head held fixed during the backbone-only step.
    pub step1_neck: NeckConfig,
    pub step1_head: HeadConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            count: 320,
            input: "640x480".into(),
            step1_neck: NeckConfig { n: 32 },
            step1_head: HeadConfig {
                h: 96,
                m: 2,
                depthwise: false,
            },
        }
    }
}

impl SearchConfig {
    pub fn input_size(&self) -> Result<InputSize> {
        self.input.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CropConfig {
    /// `"baseline"` or `"sr"`.
    pub policy: String,
    /// Replaces the named policy's choices when present.
    pub scale_choices: Option<Vec<f64>>,
    pub epochs: u32,
    /// Also report positives before cross-gt deduplication.
    pub raw_counts: bool,
}

impl Default for CropConfig {
    fn default() -> Self {
        CropConfig {
            policy: "baseline".into(),
            scale_choices: None,
            epochs: 1,
            raw_counts: false,
        }
    }
}

impl CropConfig {
    pub fn policy(&self) -> CropPolicy {
        let mut p = CropPolicy::by_name(&self.policy).unwrap_or(CropPolicy {
            scale_choices: Vec::new(),
            output_size: crate::anchors::CANVAS,
        });
        if let Some(c) = &self.scale_choices {
            p.scale_choices = c.clone();
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateParams {
    pub shallow_opt: f64,
    pub backbone_opt: f64,
    pub shallow_width: f64,
    pub backbone_width: f64,
    pub peak: f64,
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            shallow_opt: 0.8,
            backbone_opt: 0.75,
            shallow_width: 0.1,
            backbone_width: 0.1,
            peak: 0.9,
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorConfig {
    Surrogate(SurrogateParams),
    Csv { path: PathBuf },
    Constant { ap: f64 },
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig::Surrogate(SurrogateParams::default())
    }
}
