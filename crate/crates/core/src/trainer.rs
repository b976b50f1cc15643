//! Self-play training with PPO.
//!
//! Each update collects whole episodes with the current policy, computes GAE
//! advantages, and runs several epochs of clipped-surrogate minibatch steps
//! with Adam. Every random draw comes from a ChaCha stream keyed by
//! `(master_seed, purpose, update, env index)`, so a run is bitwise
//! reproducible and can resume from any checkpoint.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, EnvSnapshot};
use crate::env::{rollout, rollout_with, ActionMode, Env, EnvConfig, Transition};
use crate::error::{Error, Result};
use crate::policy::{gradients, LossSpec, LossStats, Policy, PolicyParams, Sample, DEFAULT_HIDDEN};
use crate::solver::Status;
use crate::tileset::Ruleset;

pub const METRICS_HEADER: &str =
    "update,steps,mean_reward,mean_coverage,invalid_rate,policy_loss,value_loss,entropy,approx_kl,clip_fraction";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lam: f64,
    pub clip_eps: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    pub steps_per_update: usize,
    pub total_steps: usize,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub n_envs: usize,
    pub master_seed: u64,
    /// Hidden width of both networks.
    pub hidden: usize,
    /// Write `ckpt_<update>.json` every this many updates.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            lam: 0.95,
            clip_eps: 0.2,
            epochs_per_update: 4,
            minibatch_size: 64,
            steps_per_update: 2048,
            total_steps: 100_000,
            learning_rate: 3e-4,
            entropy_coef: 0.01,
            value_coef: 0.5,
            n_envs: 1,
            master_seed: 0,
            hidden: DEFAULT_HIDDEN,
            checkpoint_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lam) {
            return bad("lam must lie in [0, 1]");
        }
        if !(self.clip_eps > 0.0) || !(self.learning_rate > 0.0) {
            return bad("clip_eps and learning_rate must be positive");
        }
        if !(self.entropy_coef >= 0.0) || !(self.value_coef >= 0.0) {
            return bad("loss coefficients must be non-negative");
        }
        if self.epochs_per_update == 0
            || self.minibatch_size == 0
            || self.steps_per_update == 0
            || self.total_steps == 0
            || self.n_envs == 0
            || self.hidden == 0
            || self.checkpoint_every == 0
        {
            return bad("counts must be positive");
        }
        if self.minibatch_size > self.steps_per_update {
            return bad("minibatch_size must not exceed steps_per_update");
        }
        Ok(())
    }

    pub fn loss_spec(&self) -> LossSpec {
        LossSpec {
            clip_eps: self.clip_eps,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }

    /// Number of updates in a full run: `ceil(total_steps / steps_per_update)`.
    pub fn n_updates(&self) -> u64 {
        self.total_steps.div_ceil(self.steps_per_update) as u64
    }
}

// ---------------------------------------------------------------------------
// Random streams

const STREAM_COLLECT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;

/// Independent generator for one `(purpose, round, index)` triple.
pub fn stream_rng(master_seed: u64, purpose: u64, round: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((purpose << 56) ^ (round << 20) ^ index);
    rng
}

// ---------------------------------------------------------------------------
// Advantage estimation

/// Generalized advantage estimates and returns.
///
/// `dones[t]` cuts bootstrapping after step `t`; `last_value` is the value of
/// the state following the final step (ignored if that step is done).
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lam: f64,
    last_value: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(Error::LengthMismatch(format!(
            "rewards {n}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lam * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Shifts to zero mean and, unless the spread is negligible, unit variance.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let scale = if std > 1e-8 { 1.0 / std } else { 1.0 };
    for a in adv.iter_mut() {
        *a = (*a - mean) * scale;
    }
}

// ---------------------------------------------------------------------------
// Optimizer

/// Adam with bias correction and a fixed step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut PolicyParams, grads: &PolicyParams) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// Rollout collection

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub reward: f64,
    pub coverage: f64,
    pub status: Status,
    pub length: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    pub episodes: Vec<EpisodeSummary>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Fills advantages and returns; episodes are whole, so nothing is
    /// bootstrapped past the buffer end.
    pub fn compute_advantages(&mut self, gamma: f64, lam: f64) -> Result<()> {
        let rewards: Vec<f64> = self.transitions.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = self.transitions.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = self.transitions.iter().map(|t| t.done).collect();
        let (adv, ret) = compute_gae(&rewards, &values, &dones, gamma, lam, 0.0)?;
        self.advantages = adv;
        self.returns = ret;
        Ok(())
    }

    pub fn mean_reward(&self) -> f64 {
        mean(self.episodes.iter().map(|e| e.reward))
    }

    pub fn mean_coverage(&self) -> f64 {
        mean(self.episodes.iter().map(|e| e.coverage))
    }

    pub fn invalid_rate(&self) -> f64 {
        mean(self.episodes.iter().map(|e| f64::from(u8::from(e.status == Status::Invalid))))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Collects whole episodes until at least `steps` transitions are gathered.
///
/// Env `i` draws from stream `(master_seed, collect, round, i)` and fills a
/// quota of `ceil(steps / n_envs)`; buffers are concatenated in env order,
/// so the result does not depend on thread scheduling.
pub fn collect_rollouts(
    envs: &mut [Env],
    policy: &(dyn Policy + Sync),
    steps: usize,
    master_seed: u64,
    round: u64,
) -> Result<RolloutBuffer> {
    if envs.is_empty() {
        return Err(Error::BadConfig("no environments".into()));
    }
    let quota = steps.div_ceil(envs.len());
    let run = |(i, env): (usize, &mut Env)| -> Result<(Vec<Transition>, Vec<EpisodeSummary>)> {
        let mut rng = stream_rng(master_seed, STREAM_COLLECT, round, i as u64);
        let mut transitions = Vec::with_capacity(quota + env.max_steps());
        let mut episodes = Vec::new();
        while transitions.len() < quota {
            let traj = rollout(env, policy, &mut rng)?;
            if traj.transitions.is_empty() {
                return Err(Error::BadConfig("episodes end without any decision".into()));
            }
            episodes.push(EpisodeSummary {
                reward: traj.reward,
                coverage: traj.coverage,
                status: traj.status,
                length: traj.transitions.len(),
            });
            transitions.extend(traj.transitions);
        }
        Ok((transitions, episodes))
    };
    let parts: Vec<_> = if envs.len() == 1 {
        envs.iter_mut().enumerate().map(run).collect::<Result<_>>()?
    } else {
        envs.par_iter_mut().enumerate().map(run).collect::<Result<_>>()?
    };
    let mut buffer = RolloutBuffer::default();
    for (t, e) in parts {
        buffer.transitions.extend(t);
        buffer.episodes.extend(e);
    }
    Ok(buffer)
}

// ---------------------------------------------------------------------------
// Update

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Runs `epochs_per_update` shuffled passes of minibatch Adam steps.
///
/// `buffer` must already hold advantages and returns; they are normalized
/// here. Stats are averaged over all minibatches, each measured before its
/// own step.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &mut PolicyParams,
    adam: &mut Adam,
    buffer: &RolloutBuffer,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    let n = buffer.len();
    if n == 0 || buffer.advantages.len() != n || buffer.returns.len() != n {
        return Err(Error::LengthMismatch("buffer lacks advantages or returns".into()));
    }
    let mut adv = buffer.advantages.clone();
    normalize_advantages(&mut adv);
    let spec = cfg.loss_spec();

    let mut order: Vec<usize> = (0..n).collect();
    let mut total = LossStats::default();
    let mut batches = 0usize;
    let mut batch = Vec::with_capacity(cfg.minibatch_size);
    for _ in 0..cfg.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.minibatch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| {
                let t = &buffer.transitions[i];
                Sample {
                    obs: &t.obs.features,
                    mask: &t.obs.mask,
                    action: t.action,
                    old_logprob: t.logprob,
                    advantage: adv[i],
                    ret: buffer.returns[i],
                }
            }));
            let (grads, stats) = gradients(params, &batch, &spec)?;
            adam.step(params, &grads);
            total.policy_loss += stats.policy_loss;
            total.value_loss += stats.value_loss;
            total.entropy += stats.entropy;
            total.approx_kl += stats.approx_kl;
            total.clip_fraction += stats.clip_fraction;
            batches += 1;
        }
    }
    let k = batches as f64;
    Ok(UpdateStats {
        policy_loss: total.policy_loss / k,
        value_loss: total.value_loss / k,
        entropy: total.entropy / k,
        approx_kl: total.approx_kl / k,
        clip_fraction: total.clip_fraction / k,
    })
}

// ---------------------------------------------------------------------------
// Training loop

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub update: u64,
    pub steps: u64,
    pub mean_reward: f64,
    pub mean_coverage: f64,
    pub invalid_rate: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

impl MetricsRow {
    /// One CSV line; floats use the shortest exact representation.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.update,
            self.steps,
            self.mean_reward,
            self.mean_coverage,
            self.invalid_rate,
            self.policy_loss,
            self.value_loss,
            self.entropy,
            self.approx_kl,
            self.clip_fraction
        )
    }
}

/// Training state: parameters, optimizer and progress counters.
pub struct Trainer {
    cfg: TrainConfig,
    env_cfg: EnvConfig,
    rules: Arc<Ruleset>,
    envs: Vec<Env>,
    params: PolicyParams,
    adam: Adam,
    update: u64,
    steps: u64,
}

impl Trainer {
    pub fn new(cfg: TrainConfig, rules: Arc<Ruleset>, env_cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let envs = (0..cfg.n_envs)
            .map(|_| Env::new(rules.clone(), env_cfg.clone()))
            .collect::<Result<Vec<_>>>()?;
        let params =
            PolicyParams::init(envs[0].observation_len(), rules.len(), cfg.hidden, cfg.master_seed)?;
        let adam = Adam::new(cfg.learning_rate, params.num_params());
        Ok(Trainer {
            cfg,
            env_cfg,
            rules,
            envs,
            params,
            adam,
            update: 0,
            steps: 0,
        })
    }

    /// Restores a run from a checkpoint written by [`Trainer::checkpoint`].
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (Some(cfg), Some(env), Some(adam)) = (&ckpt.train, &ckpt.env, &ckpt.optimizer) else {
            return Err(Error::MalformedDocument(
                "checkpoint lacks training state (train, env, optimizer)".into(),
            ));
        };
        let rules = Arc::new(env.tileset.clone().into_ruleset()?);
        let mut trainer = Trainer::new(cfg.clone(), rules, env.config.clone())?;
        let params = ckpt.to_params()?;
        if params.obs_dim != trainer.params.obs_dim || params.n_actions != trainer.params.n_actions {
            return Err(Error::DimensionMismatch {
                expected: trainer.params.obs_dim,
                got: params.obs_dim,
            });
        }
        if adam.m.len() != params.num_params() || adam.v.len() != params.num_params() {
            return Err(Error::MalformedDocument("optimizer state has the wrong size".into()));
        }
        trainer.params = params;
        trainer.adam = adam.clone();
        trainer.update = ckpt.update;
        trainer.steps = ckpt.step;
        Ok(trainer)
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn env_config(&self) -> &EnvConfig {
        &self.env_cfg
    }

    pub fn ruleset(&self) -> &Arc<Ruleset> {
        &self.rules
    }

    pub fn updates_done(&self) -> u64 {
        self.update
    }

    pub fn steps_done(&self) -> u64 {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.update >= self.cfg.n_updates()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ckpt = Checkpoint::from_params(&self.params, self.steps, self.update);
        ckpt.optimizer = Some(self.adam.clone());
        ckpt.train = Some(self.cfg.clone());
        ckpt.env = Some(EnvSnapshot {
            tileset: self.rules.to_doc(),
            config: self.env_cfg.clone(),
        });
        ckpt
    }

    /// Collect, estimate advantages, update.
    pub fn update_once(&mut self) -> Result<MetricsRow> {
        let round = self.update;
        let seed = self.cfg.master_seed;
        let mut buffer =
            collect_rollouts(&mut self.envs, &self.params, self.cfg.steps_per_update, seed, round)?;
        buffer.compute_advantages(self.cfg.gamma, self.cfg.lam)?;
        let mut rng = stream_rng(seed, STREAM_SHUFFLE, round, 0);
        let stats = ppo_update(&mut self.params, &mut self.adam, &buffer, &self.cfg, &mut rng)?;
        self.update += 1;
        self.steps += buffer.len() as u64;
        let row = MetricsRow {
            update: self.update,
            steps: self.steps,
            mean_reward: buffer.mean_reward(),
            mean_coverage: buffer.mean_coverage(),
            invalid_rate: buffer.invalid_rate(),
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
        };
        info!(
            "update {} steps {} reward {:.4} coverage {:.4} kl {:.5}",
            row.update, row.steps, row.mean_reward, row.mean_coverage, row.approx_kl
        );
        Ok(row)
    }

    /// Trains until the step budget is spent.
    ///
    /// With `out_dir`, appends rows to `metrics.csv` (writing the header on a
    /// fresh run), saves `ckpt_<update>.json` every `checkpoint_every`
    /// updates and `ckpt_final.json` at the end.
    pub fn run(&mut self, out_dir: Option<&Path>) -> Result<Vec<MetricsRow>> {
        let mut metrics = match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join("metrics.csv");
                let fresh = self.update == 0;
                let mut f = OpenOptions::new()
                    .create(true)
                    .write(true)
                    .append(!fresh)
                    .truncate(fresh)
                    .open(path)?;
                if fresh {
                    writeln!(f, "{METRICS_HEADER}")?;
                }
                Some(f)
            }
            None => None,
        };
        let mut rows = Vec::new();
        while !self.is_finished() {
            let row = self.update_once()?;
            if let (Some(f), Some(dir)) = (metrics.as_mut(), out_dir) {
                writeln!(f, "{}", row.to_csv())?;
                if self.update.is_multiple_of(self.cfg.checkpoint_every as u64) {
                    self.checkpoint()
                        .save(&dir.join(format!("ckpt_{}.json", self.update)))?;
                }
            }
            rows.push(row);
        }
        if let Some(dir) = out_dir {
            self.checkpoint().save(&dir.join("ckpt_final.json"))?;
        }
        Ok(rows)
    }
}

pub struct TrainOutcome {
    pub params: PolicyParams,
    pub metrics: Vec<MetricsRow>,
}

/// Fresh training run; see [`Trainer::run`] for the files written.
pub fn train(
    cfg: &TrainConfig,
    rules: Arc<Ruleset>,
    env_cfg: &EnvConfig,
    out_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(cfg.clone(), rules, env_cfg.clone())?;
    let metrics = trainer.run(out_dir)?;
    Ok(TrainOutcome {
        params: trainer.params,
        metrics,
    })
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub episodes: usize,
    pub mean_reward: f64,
    /// Population standard deviation of the terminal reward.
    pub std_reward: f64,
    pub mean_coverage: f64,
    pub invalid_rate: f64,
}

pub fn evaluate_policy<R: Rng + ?Sized>(
    policy: &dyn Policy,
    env: &mut Env,
    n_episodes: usize,
    mode: ActionMode,
    rng: &mut R,
) -> Result<EvalStats> {
    if n_episodes == 0 {
        return Err(Error::BadEpisodeCount);
    }
    let mut rewards = Vec::with_capacity(n_episodes);
    let mut coverage = 0.0;
    let mut invalid = 0usize;
    for _ in 0..n_episodes {
        let t = rollout_with(env, policy, mode, rng)?;
        rewards.push(t.reward);
        coverage += t.coverage;
        invalid += usize::from(t.status == Status::Invalid);
    }
    let n = n_episodes as f64;
    let mean_reward = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean_reward).powi(2)).sum::<f64>() / n;
    Ok(EvalStats {
        episodes: n_episodes,
        mean_reward,
        std_reward: var.sqrt(),
        mean_coverage: coverage / n,
        invalid_rate: invalid as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::RandomPolicy;
    use crate::solver::Consistency;
    use crate::tileset::load_tileset;

    #[test]
    fn gae_lambda_zero_is_td_error() {
        let r = [0.0, 0.5, 1.0];
        let v = [0.2, 0.4, 0.1];
        let d = [false, false, true];
        let (a, _) = compute_gae(&r, &v, &d, 0.9, 0.0, 0.0).unwrap();
        let expect = [0.0 + 0.9 * 0.4 - 0.2, 0.5 + 0.9 * 0.1 - 0.4, 1.0 - 0.1];
        for (x, y) in a.iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn gae_monte_carlo_limit() {
        let (a, ret) = compute_gae(&[0.0, 0.0, 0.0, 0.7], &[0.0; 4], &[false, false, false, true], 1.0, 1.0, 0.0)
            .unwrap();
        assert_eq!(a, vec![0.7; 4]);
        assert_eq!(ret, vec![0.7; 4]);
    }

    #[test]
    fn gae_hand_case() {
        let (a, ret) = compute_gae(&[0.0, 1.0], &[0.5, 0.5], &[false, true], 0.9, 0.8, 0.0).unwrap();
        assert!((a[0] - 0.31).abs() < 1e-12 && (a[1] - 0.5).abs() < 1e-12);
        assert!((ret[0] - 0.81).abs() < 1e-12 && (ret[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gae_length_mismatch() {
        assert!(matches!(
            compute_gae(&[0.0], &[0.0, 1.0], &[true], 0.9, 0.9, 0.0),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn advantage_normalization() {
        let mut a = vec![1.0, 2.0, 3.0, 10.0, -4.0];
        normalize_advantages(&mut a);
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-6);
        let mut flat = vec![0.3; 4];
        normalize_advantages(&mut flat);
        assert!(flat.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { minibatch_size: 4096, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { gamma: 0.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        assert_eq!(TrainConfig { total_steps: 5000, steps_per_update: 2048, ..TrainConfig::default() }.n_updates(), 3);
    }

    fn checkerboard_env(dims: Vec<usize>) -> Env {
        let rs = Arc::new(load_tileset(include_str!("../tilesets/checkerboard.json")).unwrap());
        Env::new(rs, EnvConfig { dims, consistency: Consistency::Propagate, ..EnvConfig::default() })
            .unwrap()
    }

    #[test]
    fn evaluate_random_checkerboard() {
        let mut env = checkerboard_env(vec![8, 8]);
        let p = RandomPolicy::uniform(2);
        let a = evaluate_policy(&p, &mut env, 10, ActionMode::Sample, &mut stream_rng(1, 9, 0, 0)).unwrap();
        assert_eq!(a.mean_coverage, 1.0);
        assert_eq!(a.invalid_rate, 0.0);
        let b = evaluate_policy(&p, &mut env, 10, ActionMode::Sample, &mut stream_rng(1, 9, 0, 0)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            evaluate_policy(&p, &mut env, 0, ActionMode::Sample, &mut stream_rng(1, 9, 0, 0)),
            Err(Error::BadEpisodeCount)
        ));
    }

    #[test]
    fn collection_bounds_and_masks() {
        let mut envs = vec![checkerboard_env(vec![5, 5])];
        let params = PolicyParams::init(envs[0].observation_len(), 2, 8, 0).unwrap();
        let buf = collect_rollouts(&mut envs, &params, 100, 3, 0).unwrap();
        assert!(buf.len() >= 100 && buf.len() < 100 + 24);
        for t in &buf.transitions {
            assert!(t.obs.mask[t.action]);
        }
        let again = collect_rollouts(&mut envs, &params, 100, 3, 0).unwrap();
        assert_eq!(buf.transitions, again.transitions);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream_rng(1, STREAM_COLLECT, 0, 0).random();
        let b: u64 = stream_rng(1, STREAM_COLLECT, 0, 1).random();
        let c: u64 = stream_rng(1, STREAM_COLLECT, 1, 0).random();
        let d: u64 = stream_rng(1, STREAM_SHUFFLE, 0, 0).random();
        assert!(a != b && a != c && a != d && b != c);
    }
}
