//! Optional TOML configuration. Every field may be omitted; flags given on
//! the command line override whatever is set here.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub friends: FriendsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub rounds: Option<u32>,
    pub lmax: Option<usize>,
    pub alpha: Option<f64>,
    pub delta_flaw: Option<f64>,
    pub cost_floor: Option<f64>,
    pub early_stop: Option<f64>,
    pub shrink: Option<f64>,
    pub warmup_rounds: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub k: Option<usize>,
    pub beam: Option<usize>,
    pub budget: Option<f64>,
    pub max_len: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriendsSection {
    pub d_max: Option<f64>,
    pub next_cohort: Option<usize>,
    pub n: Option<usize>,
    pub tau: Option<usize>,
    pub min_len: Option<usize>,
    pub policy: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_parse() {
        let c: FileConfig = toml::from_str("seed = 7\n[train]\nrounds = 3\n").unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.train.rounds, Some(3));
        assert_eq!(c.generate.k, None);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("[train]\nround = 3\n").is_err());
    }
}
