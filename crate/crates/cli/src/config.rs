use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use synthkit_core::annotate::AnnotationConfig;
use synthkit_core::curate::SizeMetric;
use synthkit_core::eval::EvalConfig;

/// Settings read from a TOML file. Command-line flags take precedence.
///
/// ```toml
/// workers = 4
/// seed = 7
/// sim_cap_ratio = 0.5
/// size_metric = "area"
///
/// [annotation]
/// radius_m = 120.0
///
/// [eval]
/// iou_threshold = 0.5
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub annotation: AnnotationConfig,
    pub eval: EvalConfig,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub sim_cap_ratio: Option<f64>,
    pub size_metric: SizeMetric,
    pub dump_id: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.annotation.validate().with_context(|| format!("{}: [annotation]", path.display()))?;
        cfg.eval.validate().with_context(|| format!("{}: [eval]", path.display()))?;
        Ok(cfg)
    }
}
