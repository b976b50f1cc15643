//! Tile-selection policy and value function.
//!
//! Two independent tanh MLPs map an observation to action logits and to a
//! scalar state value. Masked-out actions get a `-inf` logit before the
//! softmax, so they carry exactly zero probability. [`gradients`] returns the
//! exact gradient of the clipped-surrogate PPO loss by reverse accumulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::Observation;
use crate::error::{Error, Result};
use crate::tileset::TileId;

/// Default hidden width.
pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            w: vec![0.0; inputs * outputs],
            b: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.b.iter().zip(self.w.chunks_exact(self.inputs)).map(|(b, row)| {
            b + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
        }));
    }
}

/// Fully connected network with tanh hidden layers and a linear output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, zero biases.
    fn init(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let layers = sizes
            .windows(2)
            .map(|pair| {
                let mut layer = Layer::zeros(pair[0], pair[1]);
                let bound = 1.0 / (pair[0] as f64).sqrt();
                for w in &mut layer.w {
                    *w = rng.random_range(-bound..bound);
                }
                layer
            })
            .collect();
        Mlp { layers }
    }

    fn zeros_like(&self) -> Self {
        Mlp {
            layers: self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.tanh());
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass keeping every layer's input for the backward pass.
    fn forward_cached(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(layer.outputs);
            layer.forward(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.tanh());
            }
            inputs.push(std::mem::replace(&mut cur, next));
        }
        (inputs, cur)
    }

    /// Accumulates `d loss / d params` into `grads` given `d loss / d output`.
    fn backward(&self, inputs: &[Vec<f64>], grad_out: &[f64], grads: &mut Mlp) {
        let mut delta = grad_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &inputs[i];
            let g = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.b[o] += d;
                let row = &mut g.w[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, &xi) in row.iter_mut().zip(x) {
                    *gw += d * xi;
                }
            }
            if i == 0 {
                break;
            }
            // x is tanh output of the previous layer: d tanh = 1 - x^2.
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.w[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, &xi) in prev.iter_mut().zip(x) {
                *p *= 1.0 - xi * xi;
            }
            delta = prev;
        }
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }
}

/// Weights of the policy and value networks.
///
/// The same type doubles as the gradient container.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub obs_dim: usize,
    pub hidden: usize,
    pub n_actions: usize,
    pub policy: Mlp,
    pub value: Mlp,
}

impl PolicyParams {
    pub fn init(obs_dim: usize, n_actions: usize, hidden: usize, seed: u64) -> Result<Self> {
        if obs_dim == 0 || n_actions == 0 || hidden == 0 {
            return Err(Error::BadArchitecture(format!(
                "obs_dim={obs_dim}, n_actions={n_actions}, hidden={hidden}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = Mlp::init(&[obs_dim, hidden, hidden, n_actions], &mut rng);
        let value = Mlp::init(&[obs_dim, hidden, hidden, 1], &mut rng);
        Ok(PolicyParams {
            obs_dim,
            hidden,
            n_actions,
            policy,
            value,
        })
    }

    pub fn zeros_like(&self) -> Self {
        PolicyParams {
            policy: self.policy.zeros_like(),
            value: self.value.zeros_like(),
            ..*self
        }
    }

    pub fn num_params(&self) -> usize {
        self.iter().count()
    }

    /// All parameters, policy network first, each layer weights then biases.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.policy.params().chain(self.value.params())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.policy.params_mut().chain(self.value.params_mut())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|p| p.is_finite())
    }

    fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim {
            return Err(Error::DimensionMismatch {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        Ok(())
    }

    pub fn logits(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.check_obs(obs)?;
        Ok(self.policy.forward(obs))
    }

    pub fn policy_forward(&self, obs: &[f64], mask: &[bool]) -> Result<MaskedDistribution> {
        if mask.len() != self.n_actions {
            return Err(Error::DimensionMismatch {
                expected: self.n_actions,
                got: mask.len(),
            });
        }
        MaskedDistribution::from_logits(&self.logits(obs)?, mask)
    }

    pub fn value_forward(&self, obs: &[f64]) -> Result<f64> {
        self.check_obs(obs)?;
        Ok(self.value.forward(obs)[0])
    }
}

/// Categorical distribution restricted to the unmasked actions.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedDistribution {
    pub probs: Vec<f64>,
    /// `ln probs`, `-inf` where masked.
    pub log_probs: Vec<f64>,
    pub mask: Vec<bool>,
}

impl MaskedDistribution {
    pub fn from_logits(logits: &[f64], mask: &[bool]) -> Result<Self> {
        if logits.len() != mask.len() {
            return Err(Error::DimensionMismatch {
                expected: mask.len(),
                got: logits.len(),
            });
        }
        let log_probs = masked_log_softmax(logits, mask)?;
        let probs = log_probs.iter().map(|l| l.exp()).collect();
        Ok(MaskedDistribution {
            probs,
            log_probs,
            mask: mask.to_vec(),
        })
    }

    /// Normalizes non-negative weights over the mask.
    pub fn from_weights(weights: &[f64], mask: &[bool]) -> Result<Self> {
        let total: f64 = weights.iter().zip(mask).filter(|(_, &m)| m).map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(Error::EmptyMask);
        }
        let probs: Vec<f64> = weights
            .iter()
            .zip(mask)
            .map(|(&w, &m)| if m { w / total } else { 0.0 })
            .collect();
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(MaskedDistribution {
            probs,
            log_probs,
            mask: mask.to_vec(),
        })
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.log_probs)
            .filter(|(p, _)| **p > 0.0)
            .fold(0.0, |h, (p, l)| h - p * l)
    }

    /// Most probable action and its log-probability; lowest id on ties.
    pub fn argmax(&self) -> (TileId, f64) {
        let mut best = None;
        for (a, (&p, &m)) in self.probs.iter().zip(&self.mask).enumerate() {
            if m && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((a, p));
            }
        }
        let (a, _) = best.expect("distribution has an unmasked action");
        (a, self.log_probs[a])
    }
}

/// `log softmax` over the unmasked entries; masked entries are `-inf`.
pub fn masked_log_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&z, _)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::EmptyMask);
    }
    let sum: f64 = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&z, _)| (z - max).exp())
        .sum();
    let lse = max + sum.ln();
    Ok(logits
        .iter()
        .zip(mask)
        .map(|(&z, &m)| if m { z - lse } else { f64::NEG_INFINITY })
        .collect())
}

/// Draws an action; returns it with its log-probability.
pub fn sample_action<R: Rng + ?Sized>(dist: &MaskedDistribution, rng: &mut R) -> (TileId, f64) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (a, (&p, &m)) in dist.probs.iter().zip(&dist.mask).enumerate() {
        if !m || p == 0.0 {
            continue;
        }
        acc += p;
        last = Some(a);
        if u < acc {
            return (a, dist.log_probs[a]);
        }
    }
    // Rounding left `acc` a hair below 1.
    let a = last.expect("distribution has an unmasked action");
    (a, dist.log_probs[a])
}

/// Anything that maps observations to action distributions.
pub trait Policy {
    fn distribution(&self, obs: &Observation) -> Result<MaskedDistribution>;

    /// State-value estimate; policies without a critic return 0.
    fn value(&self, _obs: &Observation) -> Result<f64> {
        Ok(0.0)
    }
}

impl Policy for PolicyParams {
    fn distribution(&self, obs: &Observation) -> Result<MaskedDistribution> {
        self.policy_forward(&obs.features, &obs.mask)
    }

    fn value(&self, obs: &Observation) -> Result<f64> {
        self.value_forward(&obs.features)
    }
}

/// Baseline policy: picks uniformly, or proportionally to tile weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPolicy {
    weights: Vec<f64>,
}

impl RandomPolicy {
    pub fn uniform(n_actions: usize) -> Self {
        RandomPolicy {
            weights: vec![1.0; n_actions],
        }
    }

    pub fn weighted(weights: Vec<f64>) -> Self {
        RandomPolicy { weights }
    }
}

impl Policy for RandomPolicy {
    fn distribution(&self, obs: &Observation) -> Result<MaskedDistribution> {
        MaskedDistribution::from_weights(&self.weights, &obs.mask)
    }
}

// ---------------------------------------------------------------------------
// Loss and gradients

/// Coefficients of the clipped-surrogate loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec {
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec {
            clip_eps: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
        }
    }
}

/// One training example.
#[derive(Clone, Copy, Debug)]
pub struct Sample<'a> {
    pub obs: &'a [f64],
    pub mask: &'a [bool],
    pub action: TileId,
    pub old_logprob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Minibatch means of the loss terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossStats {
    /// `policy_loss + value_coef * value_loss - entropy_coef * entropy`.
    pub loss: f64,
    /// `-mean(min(ratio * A, clip(ratio) * A))`.
    pub policy_loss: f64,
    /// `mean((V - return)^2)`.
    pub value_loss: f64,
    pub entropy: f64,
    /// `mean(old_logprob - logprob)`.
    pub approx_kl: f64,
    /// Share of samples with `|ratio - 1| > clip_eps`.
    pub clip_fraction: f64,
}

/// Per-sample loss terms plus the gradient w.r.t. the logits and the value.
struct SampleTerms {
    surrogate: f64,
    value_err: f64,
    entropy: f64,
    kl: f64,
    clipped: bool,
    d_logits: Vec<f64>,
    d_value: f64,
}

fn sample_terms(
    logits: &[f64],
    value: f64,
    s: &Sample<'_>,
    spec: &LossSpec,
    n: f64,
) -> Result<SampleTerms> {
    let logp = masked_log_softmax(logits, s.mask)?;
    if !s.mask.get(s.action).copied().unwrap_or(false) {
        return Err(Error::IllegalAction(s.action));
    }
    let lp = logp[s.action];
    let ratio = (lp - s.old_logprob).exp();
    let clipped_ratio = ratio.clamp(1.0 - spec.clip_eps, 1.0 + spec.clip_eps);
    let unclipped_obj = ratio * s.advantage;
    let clipped_obj = clipped_ratio * s.advantage;
    // The min picks the unclipped branch (gradient ratio * A) unless the
    // clipped branch is strictly smaller, where the gradient vanishes.
    let (surrogate, d_lp) = if unclipped_obj <= clipped_obj {
        (unclipped_obj, ratio * s.advantage)
    } else {
        (clipped_obj, 0.0)
    };

    let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
    let entropy = -probs
        .iter()
        .zip(&logp)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, l)| p * l)
        .sum::<f64>();

    // loss_i = (-surrogate - entropy_coef * H) / n
    let mut d_logits = vec![0.0; logits.len()];
    for (j, dz) in d_logits.iter_mut().enumerate() {
        if !s.mask[j] {
            continue;
        }
        let p = probs[j];
        let d_lp_dz = f64::from(u8::from(j == s.action)) - p;
        let d_h_dz = -p * (logp[j] + entropy);
        *dz = (-d_lp * d_lp_dz - spec.entropy_coef * d_h_dz) / n;
    }
    let value_err = value - s.ret;
    Ok(SampleTerms {
        surrogate,
        value_err,
        entropy,
        kl: s.old_logprob - lp,
        clipped: (ratio - 1.0).abs() > spec.clip_eps,
        d_logits,
        d_value: 2.0 * spec.value_coef * value_err / n,
    })
}

fn check_sample(params: &PolicyParams, s: &Sample<'_>) -> Result<()> {
    params.check_obs(s.obs)?;
    if s.mask.len() != params.n_actions {
        return Err(Error::DimensionMismatch {
            expected: params.n_actions,
            got: s.mask.len(),
        });
    }
    Ok(())
}

fn accumulate(stats: &mut LossStats, t: &SampleTerms, n: f64) {
    stats.policy_loss -= t.surrogate / n;
    stats.value_loss += t.value_err * t.value_err / n;
    stats.entropy += t.entropy / n;
    stats.approx_kl += t.kl / n;
    stats.clip_fraction += f64::from(u8::from(t.clipped)) / n;
}

fn finish(mut stats: LossStats, spec: &LossSpec) -> LossStats {
    stats.loss = stats.policy_loss + spec.value_coef * stats.value_loss
        - spec.entropy_coef * stats.entropy;
    stats
}

/// Loss over a minibatch without gradients.
pub fn loss(params: &PolicyParams, batch: &[Sample<'_>], spec: &LossSpec) -> Result<LossStats> {
    if batch.is_empty() {
        return Err(Error::LengthMismatch("empty minibatch".into()));
    }
    let n = batch.len() as f64;
    let mut stats = LossStats::default();
    for s in batch {
        check_sample(params, s)?;
        let logits = params.policy.forward(s.obs);
        let value = params.value.forward(s.obs)[0];
        let t = sample_terms(&logits, value, s, spec, n)?;
        accumulate(&mut stats, &t, n);
    }
    Ok(finish(stats, spec))
}

/// Exact gradient of [`loss`] w.r.t. every parameter.
pub fn gradients(
    params: &PolicyParams,
    batch: &[Sample<'_>],
    spec: &LossSpec,
) -> Result<(PolicyParams, LossStats)> {
    if batch.is_empty() {
        return Err(Error::LengthMismatch("empty minibatch".into()));
    }
    let n = batch.len() as f64;
    let mut grads = params.zeros_like();
    let mut stats = LossStats::default();
    for s in batch {
        check_sample(params, s)?;
        let (p_inputs, logits) = params.policy.forward_cached(s.obs);
        let (v_inputs, value) = params.value.forward_cached(s.obs);
        let t = sample_terms(&logits, value[0], s, spec, n)?;
        accumulate(&mut stats, &t, n);
        params.policy.backward(&p_inputs, &t.d_logits, &mut grads.policy);
        params.value.backward(&v_inputs, &[t.d_value], &mut grads.value);
    }
    Ok((grads, finish(stats, spec)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn init_is_seeded_and_shaped() {
        let a = PolicyParams::init(10, 3, 8, 1).unwrap();
        let b = PolicyParams::init(10, 3, 8, 1).unwrap();
        let c = PolicyParams::init(10, 3, 8, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.policy, c.policy);
        let shapes: Vec<(usize, usize)> =
            a.policy.layers.iter().map(|l| (l.inputs, l.outputs)).collect();
        assert_eq!(shapes, vec![(10, 8), (8, 8), (8, 3)]);
        let shapes: Vec<(usize, usize)> =
            a.value.layers.iter().map(|l| (l.inputs, l.outputs)).collect();
        assert_eq!(shapes, vec![(10, 8), (8, 8), (8, 1)]);
        assert!(a.policy.layers.iter().all(|l| l.b.iter().all(|&b| b == 0.0)));
        let bound = 1.0 / 10f64.sqrt();
        assert!(a.policy.layers[0].w.iter().all(|w| w.abs() <= bound));
        assert!(matches!(PolicyParams::init(0, 3, 8, 1), Err(Error::BadArchitecture(_))));
        assert!(matches!(PolicyParams::init(4, 3, 0, 1), Err(Error::BadArchitecture(_))));
    }

    #[test]
    fn single_valid_action_is_certain() {
        let p = PolicyParams::init(6, 4, 5, 3).unwrap();
        let d = p.policy_forward(&obs(6, 0), &[false, false, true, false]).unwrap();
        assert_eq!(d.probs, vec![0.0, 0.0, 1.0, 0.0]);
        let (a, lp) = sample_action(&d, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!((a, lp), (2, 0.0));
    }

    #[test]
    fn zero_weights_give_uniform() {
        let mut p = PolicyParams::init(6, 4, 5, 3).unwrap();
        p.iter_mut().for_each(|w| *w = 0.0);
        let d = p.policy_forward(&obs(6, 1), &[true, false, true, true]).unwrap();
        for (i, &pr) in d.probs.iter().enumerate() {
            let expect = if i == 1 { 0.0 } else { 1.0 / 3.0 };
            assert!((pr - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_mask_and_dims() {
        let p = PolicyParams::init(6, 2, 5, 3).unwrap();
        assert!(matches!(p.policy_forward(&obs(6, 0), &[false, false]), Err(Error::EmptyMask)));
        assert!(matches!(p.value_forward(&obs(5, 0)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn value_head() {
        let mut p = PolicyParams::init(6, 2, 5, 3).unwrap();
        p.value.params_mut().for_each(|w| *w = 0.0);
        p.value.layers.last_mut().unwrap().b[0] = 0.37;
        assert_eq!(p.value_forward(&obs(6, 4)).unwrap(), 0.37);
        let q = PolicyParams::init(6, 2, 5, 9).unwrap();
        let x = obs(6, 2);
        let v = q.value_forward(&x).unwrap();
        assert!(v.is_finite());
        assert_eq!(v, q.value_forward(&x).unwrap());
    }

    #[test]
    fn sampling_frequencies() {
        let d = MaskedDistribution::from_weights(&[0.3, 0.7], &[true, true]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let ones = (0..n).filter(|_| sample_action(&d, &mut rng).0 == 1).count();
        let freq = ones as f64 / n as f64;
        let tol = 3.0 * (0.7f64 * 0.3 / n as f64).sqrt();
        assert!((freq - 0.7).abs() < tol, "{freq}");

        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(sample_action(&d, &mut r1), sample_action(&d, &mut r2));
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        let z = [0.3, -1.2, 2.5, 0.0];
        let m = [true, true, false, true];
        let a = MaskedDistribution::from_logits(&z, &m).unwrap();
        let shifted: Vec<f64> = z.iter().map(|v| v + 123.456).collect();
        let b = MaskedDistribution::from_logits(&shifted, &m).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_branch_selection() {
        // ratio 1.5, A > 0: min(1.5 A, 1.2 A) = 1.2 A and the gradient vanishes.
        let logits = [0.0, 0.0];
        let mask = [true, true];
        let old = (0.5f64).ln() - 1.5f64.ln();
        let s = Sample {
            obs: &[],
            mask: &mask,
            action: 0,
            old_logprob: old,
            advantage: 2.0,
            ret: 0.0,
        };
        let spec = LossSpec { clip_eps: 0.2, value_coef: 0.0, entropy_coef: 0.0 };
        let t = sample_terms(&logits, 0.0, &s, &spec, 1.0).unwrap();
        assert!((t.surrogate - 1.2 * 2.0).abs() < 1e-12);
        assert!(t.clipped);
        assert!(t.d_logits.iter().all(|&g| g == 0.0));
    }
}
