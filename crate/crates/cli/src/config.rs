use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use elastic_motion::apps::{Metric, Space};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Every tunable of a run. Loaded from `--config`, then overridden by flags,
/// and echoed into reports and sidecars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub format_version: u32,
    pub frames: usize,
    pub epsilon: f64,
    pub seeds: usize,
    pub metric: Metric,
    pub space: Space,
    pub seam_smoothing: bool,
    pub sanity_bound: f64,
    pub exclude_failures: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format_version: FORMAT_VERSION,
            frames: 128,
            epsilon: 1e-6,
            seeds: 16,
            metric: Metric::GeodesicShape,
            space: Space::Closed,
            seam_smoothing: true,
            sanity_bound: FRAC_PI_2,
            exclude_failures: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if !(3..=100_000).contains(&self.frames) {
            return Err(format!("frames must be in 3..=100000, got {}", self.frames));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        if !(1..=1024).contains(&self.seeds) {
            return Err(format!("seeds must be in 1..=1024, got {}", self.seeds));
        }
        if !(self.sanity_bound > 0.0 && self.sanity_bound <= std::f64::consts::PI) {
            return Err(format!("sanity bound must be in (0, pi], got {}", self.sanity_bound));
        }
        Ok(())
    }
}
