//! Run configuration documents (TOML or JSON).
//!
//! ```toml
//! [env]
//! tileset = "floor"
//! dims = [8, 8]
//! consistency = "local"
//! radius = 2
//! max_steps = 64
//! seed = 7
//!
//! [env.reward]
//! coverage_weight = 0.5
//! stability_weight = 0.5
//!
//! [train]
//! total_steps = 50000
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, RewardSpec};
use crate::error::{Error, Result};
use crate::solver::Consistency;
use crate::trainer::TrainConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    /// Tileset file path or built-in name.
    pub tileset: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub consistency: Option<Consistency>,
    pub radius: Option<usize>,
    pub max_steps: Option<usize>,
    pub reward: Option<RewardSpec>,
    /// Master seed; overrides `train.master_seed`.
    pub seed: Option<u64>,
}

impl EnvSection {
    /// Applies the fields that are set on top of `base`.
    pub fn apply(&self, mut base: EnvConfig) -> EnvConfig {
        if let Some(d) = &self.dims {
            base.dims = d.clone();
        }
        if let Some(c) = self.consistency {
            base.consistency = c;
        }
        if let Some(r) = self.radius {
            base.radius = r;
        }
        if self.max_steps.is_some() {
            base.max_steps = self.max_steps;
        }
        if let Some(r) = &self.reward {
            base.reward = r.clone();
        }
        base
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvSection,
    pub train: TrainConfig,
}

impl RunConfig {
    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn master_seed(&self) -> u64 {
        self.env.seed.unwrap_or(self.train.master_seed)
    }
}

/// Parses `WxH` or `WxHxD`.
pub fn parse_dims(text: &str) -> std::result::Result<Vec<usize>, String> {
    let dims = text
        .split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad extent {p:?} in {text:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if !(2..=3).contains(&dims.len()) || dims.contains(&0) {
        return Err(format!("expected WxH or WxHxD with positive extents, got {text:?}"));
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json() {
        let t = RunConfig::parse(
            "[env]\ntileset = \"floor\"\ndims = [8, 8]\nconsistency = \"propagate\"\nseed = 3\n\
             [env.reward]\ncoverage_weight = 0.5\nstability_weight = 0.5\n\
             [train]\ntotal_steps = 4096\n",
        )
        .unwrap();
        assert_eq!(t.env.tileset.as_deref(), Some("floor"));
        assert_eq!(t.train.total_steps, 4096);
        assert_eq!(t.train.gamma, 0.99);
        assert_eq!(t.master_seed(), 3);
        let env = t.env.apply(EnvConfig::default());
        assert_eq!(env.consistency, Consistency::Propagate);
        assert_eq!(env.reward.stability_weight, 0.5);

        let j = RunConfig::parse(r#"{"train": {"n_envs": 2}}"#).unwrap();
        assert_eq!(j.train.n_envs, 2);
        assert!(RunConfig::parse("[train]\nbogus = 1\n").is_err());
    }

    #[test]
    fn dims_grammar() {
        assert_eq!(parse_dims("4x4").unwrap(), vec![4, 4]);
        assert_eq!(parse_dims("2x3x4").unwrap(), vec![2, 3, 4]);
        assert!(parse_dims("4").is_err());
        assert!(parse_dims("4x0").is_err());
        assert!(parse_dims("ax4").is_err());
    }
}
