//! Versioned JSON checkpoints.
//!
//! A checkpoint always carries the architecture and the weights (per layer,
//! policy network first). Checkpoints written by the trainer also carry the
//! optimizer state, the training config and the environment (with the
//! tileset inlined), which is everything needed to resume or evaluate.
//! Floats round-trip exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::policy::{Layer, Mlp, PolicyParams};
use crate::tileset::TilesetDoc;
use crate::trainer::{Adam, TrainConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub obs_dim: usize,
    pub hidden: usize,
    pub n_actions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSnapshot {
    pub tileset: TilesetDoc,
    pub config: EnvConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub arch: Architecture,
    pub policy: Vec<LayerWeights>,
    pub value: Vec<LayerWeights>,
    /// Environment steps consumed so far.
    pub step: u64,
    /// Updates completed so far.
    #[serde(default)]
    pub update: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Adam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvSnapshot>,
}

fn weights(mlp: &Mlp) -> Vec<LayerWeights> {
    mlp.layers
        .iter()
        .map(|l| LayerWeights {
            w: l.w.clone(),
            b: l.b.clone(),
        })
        .collect()
}

fn rebuild(layers: &[LayerWeights], sizes: [usize; 4], which: &str) -> Result<Mlp> {
    if layers.len() != 3 {
        return Err(Error::MalformedDocument(format!(
            "{which} network has {} layers, expected 3",
            layers.len()
        )));
    }
    let layers = layers
        .iter()
        .zip(sizes.windows(2))
        .map(|(l, io)| {
            let (inputs, outputs) = (io[0], io[1]);
            if l.w.len() != inputs * outputs || l.b.len() != outputs {
                return Err(Error::MalformedDocument(format!(
                    "{which} layer {inputs}->{outputs} has {} weights and {} biases",
                    l.w.len(),
                    l.b.len()
                )));
            }
            Ok(Layer {
                inputs,
                outputs,
                w: l.w.clone(),
                b: l.b.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mlp { layers })
}

impl Checkpoint {
    pub fn from_params(params: &PolicyParams, step: u64, update: u64) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            arch: Architecture {
                obs_dim: params.obs_dim,
                hidden: params.hidden,
                n_actions: params.n_actions,
            },
            policy: weights(&params.policy),
            value: weights(&params.value),
            step,
            update,
            optimizer: None,
            train: None,
            env: None,
        }
    }

    pub fn to_params(&self) -> Result<PolicyParams> {
        let Architecture {
            obs_dim,
            hidden,
            n_actions,
        } = self.arch;
        if obs_dim == 0 || hidden == 0 || n_actions == 0 {
            return Err(Error::BadArchitecture(format!("{:?}", self.arch)));
        }
        let params = PolicyParams {
            obs_dim,
            hidden,
            n_actions,
            policy: rebuild(&self.policy, [obs_dim, hidden, hidden, n_actions], "policy")?,
            value: rebuild(&self.value, [obs_dim, hidden, hidden, 1], "value")?,
        };
        if !params.is_finite() {
            return Err(Error::MalformedDocument("non-finite weight".into()));
        }
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::MalformedDocument(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip_bitwise() {
        let p = PolicyParams::init(13, 3, 7, 42).unwrap();
        let ckpt = Checkpoint::from_params(&p, 1234, 5);
        let back = Checkpoint::from_json(&ckpt.to_json()).unwrap();
        assert_eq!(back, ckpt);
        let q = back.to_params().unwrap();
        assert!(p.iter().zip(q.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back.step, 1234);
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = PolicyParams::init(4, 2, 3, 0).unwrap();
        let mut ckpt = Checkpoint::from_params(&p, 0, 0);
        ckpt.policy[1].b.pop();
        assert!(matches!(ckpt.to_params(), Err(Error::MalformedDocument(_))));
        let mut ckpt = Checkpoint::from_params(&p, 0, 0);
        ckpt.version = 9;
        assert!(Checkpoint::from_json(&ckpt.to_json()).is_err());
    }
}
