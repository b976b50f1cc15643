//! The assembly process as an episodic decision problem.
//!
//! The solver picks the node, the policy picks the tile. Observations are a
//! one-hot window around the selected node plus three global scalars, and the
//! only non-zero reward arrives when the episode ends.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{sample_action, Policy};
use crate::solver::{Canvas, CellIndex, CellState, Consistency, SeedSpec, Status};
use crate::tileset::{Direction, Ruleset, TileId};

/// Terminal objective weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSpec {
    pub coverage_weight: f64,
    pub stability_weight: f64,
    pub invalid_penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile_target: Option<TileTarget>,
}

/// Rewards matching a target share of the canvas per tile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileTarget {
    pub weight: f64,
    pub fractions: BTreeMap<TileId, f64>,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec {
            coverage_weight: 1.0,
            stability_weight: 0.0,
            invalid_penalty: 0.0,
            tile_target: None,
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.coverage_weight,
            self.stability_weight,
            self.invalid_penalty,
            self.tile_target.as_ref().map_or(0.0, |t| t.weight),
        ];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::BadRewardSpec("weights must be finite and non-negative".into()));
        }
        if weights[0] == 0.0 && weights[1] == 0.0 && weights[3] == 0.0 {
            return Err(Error::BadRewardSpec("at least one objective weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub dims: Vec<usize>,
    pub consistency: Consistency,
    /// Observation window radius.
    pub radius: usize,
    /// Step budget per episode; `None` means one step per cell.
    pub max_steps: Option<usize>,
    pub reward: RewardSpec,
    pub seed: SeedSpec,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dims: vec![8, 8],
            consistency: Consistency::Local,
            radius: 2,
            max_steps: None,
            reward: RewardSpec::default(),
            seed: SeedSpec::Center,
        }
    }
}

/// Size of the feature vector for a window radius, rank and tile count.
pub fn observation_len(radius: usize, rank: usize, n_tiles: usize) -> usize {
    (2 * radius + 1).pow(rank as u32) * (n_tiles + 2) + 3
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    /// Window one-hot block followed by the three globals.
    pub features: Vec<f64>,
    pub mask: Vec<bool>,
    /// The node the next action fills; `None` once the episode is over.
    pub node: Option<CellIndex>,
}

impl Observation {
    pub fn window(&self) -> &[f64] {
        &self.features[..self.features.len() - 3]
    }

    /// Fill fraction, frontier size over cell count, step over step budget.
    pub fn globals(&self) -> &[f64] {
        &self.features[self.features.len() - 3..]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: TileId,
    pub logprob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub status: Status,
    pub coverage: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    pub canvas: Canvas,
    pub status: Status,
    pub truncated: bool,
    /// Terminal reward; also the sum of all transition rewards.
    pub reward: f64,
    pub coverage: f64,
}

/// How actions are chosen from the policy's distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ActionMode {
    #[default]
    Sample,
    /// Most probable action, lowest id on ties.
    Greedy,
}

/// One episodic environment instance.
#[derive(Clone, Debug)]
pub struct Env {
    rules: Arc<Ruleset>,
    cfg: EnvConfig,
    max_steps: usize,
    canvas: Option<Canvas>,
    node: Option<CellIndex>,
    last: Option<CellIndex>,
    steps: usize,
    done: bool,
}

impl Env {
    pub fn new(rules: Arc<Ruleset>, cfg: EnvConfig) -> Result<Self> {
        cfg.reward.validate()?;
        if cfg.dims.len() != rules.rank() || cfg.dims.contains(&0) {
            return Err(Error::BadDims(format!(
                "{:?} for a rank-{} ruleset",
                cfg.dims,
                rules.rank()
            )));
        }
        if let Some(t) = &cfg.reward.tile_target {
            if let Some(&bad) = t.fractions.keys().find(|&&k| k >= rules.len()) {
                return Err(Error::UnknownTile(bad));
            }
        }
        let cells: usize = cfg.dims.iter().product();
        let max_steps = cfg.max_steps.unwrap_or(cells);
        if max_steps == 0 {
            return Err(Error::BadConfig("max_steps must be positive".into()));
        }
        Ok(Env {
            rules,
            cfg,
            max_steps,
            canvas: None,
            node: None,
            last: None,
            steps: 0,
            done: true,
        })
    }

    pub fn ruleset(&self) -> &Arc<Ruleset> {
        &self.rules
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn observation_len(&self) -> usize {
        observation_len(self.cfg.radius, self.rules.rank(), self.rules.len())
    }

    pub fn n_actions(&self) -> usize {
        self.rules.len()
    }

    pub fn canvas(&self) -> Option<&Canvas> {
        self.canvas.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn status(&self) -> Option<Status> {
        self.canvas.as_ref().map(Canvas::status)
    }

    /// Starts a new episode from a freshly seeded canvas.
    ///
    /// If the seed alone finishes the canvas (or contradicts it) the episode
    /// is done immediately and the observation's mask is all false.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let canvas = Canvas::new(
            &self.cfg.dims,
            self.rules.clone(),
            &self.cfg.seed,
            self.cfg.consistency,
            rng,
        )?;
        self.last = canvas.cells().iter().position(|c| matches!(c, CellState::Decided(_)));
        self.steps = 0;
        self.done = canvas.status() != Status::InProgress;
        self.node = if self.done {
            None
        } else {
            Some(canvas.select_node(rng)?)
        };
        self.canvas = Some(canvas);
        Ok(self.observe())
    }

    pub fn step<R: Rng + ?Sized>(&mut self, action: TileId, rng: &mut R) -> Result<StepResult> {
        let (canvas, node) = match (&mut self.canvas, self.node) {
            (Some(c), Some(n)) if !self.done => (c, n),
            _ => return Err(Error::EpisodeFinished),
        };
        if !canvas.valid_tiles(node)?.contains(action) {
            return Err(Error::IllegalAction(action));
        }
        canvas.place(node, action)?;
        self.steps += 1;
        self.last = Some(node);

        let status = canvas.status();
        let truncated = status == Status::InProgress && self.steps >= self.max_steps;
        let done = status != Status::InProgress || truncated;
        let reward = if done {
            self.node = None;
            evaluate_terminal(canvas, &self.cfg.reward, status)
        } else {
            self.node = Some(canvas.select_node(rng)?);
            0.0
        };
        self.done = done;
        let info = StepInfo {
            status,
            coverage: coverage(canvas),
            steps: self.steps,
        };
        Ok(StepResult {
            obs: self.observe(),
            reward,
            done,
            truncated,
            info,
        })
    }

    /// Featurizes the current state around the selected node (or the last
    /// decided cell once the episode is over).
    pub fn observe(&self) -> Observation {
        let n_tiles = self.rules.len();
        let Some(canvas) = &self.canvas else {
            return Observation {
                features: vec![0.0; self.observation_len()],
                mask: vec![false; n_tiles],
                node: None,
            };
        };
        let center = self.node.or(self.last).unwrap_or(0);
        let center_coords = canvas.coords(center);
        let rank = canvas.rank();
        let r = self.cfg.radius as isize;
        let side = 2 * self.cfg.radius + 1;
        let channels = n_tiles + 2;
        let window = side.pow(rank as u32);

        let mut features = vec![0.0; window * channels + 3];
        let mut offset = vec![-r; rank];
        for w in 0..window {
            let inside: Option<Vec<usize>> = center_coords
                .iter()
                .zip(&offset)
                .zip(canvas.dims())
                .map(|((&c, &o), &d)| {
                    let p = c as isize + o;
                    (p >= 0 && (p as usize) < d).then_some(p as usize)
                })
                .collect();
            let channel = match inside {
                None => n_tiles + 1,
                Some(p) => match canvas.cell(canvas.index_of(&p).expect("in bounds")) {
                    CellState::Decided(t) => t,
                    CellState::Open(_) => n_tiles,
                },
            };
            features[w * channels + channel] = 1.0;
            for o in offset.iter_mut() {
                *o += 1;
                if *o > r {
                    *o = -r;
                } else {
                    break;
                }
            }
        }

        let cells = canvas.len() as f64;
        let g = window * channels;
        features[g] = canvas.decided_count() as f64 / cells;
        features[g + 1] = canvas.frontier_len() as f64 / cells;
        features[g + 2] = self.steps as f64 / self.max_steps as f64;

        let mask = match self.node {
            Some(n) if !self.done => {
                let valid = canvas.valid_tiles(n).expect("selected node is open");
                (0..n_tiles).map(|t| valid.contains(t)).collect()
            }
            _ => vec![false; n_tiles],
        };
        Observation {
            features,
            mask,
            node: self.node,
        }
    }
}

/// Runs one full episode, sampling actions from `policy`.
pub fn rollout<R: Rng + ?Sized>(
    env: &mut Env,
    policy: &dyn Policy,
    rng: &mut R,
) -> Result<Trajectory> {
    rollout_with(env, policy, ActionMode::Sample, rng)
}

pub fn rollout_with<R: Rng + ?Sized>(
    env: &mut Env,
    policy: &dyn Policy,
    mode: ActionMode,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut obs = env.reset(rng)?;
    let mut transitions = Vec::new();
    let mut truncated = false;
    while !env.is_done() {
        let dist = policy.distribution(&obs)?;
        let (action, logprob) = match mode {
            ActionMode::Sample => sample_action(&dist, rng),
            ActionMode::Greedy => dist.argmax(),
        };
        let value = policy.value(&obs)?;
        let step = env.step(action, rng)?;
        truncated = step.truncated;
        transitions.push(Transition {
            obs,
            action,
            logprob,
            value,
            reward: step.reward,
            done: step.done,
            truncated: step.truncated,
        });
        obs = step.obs;
    }
    let canvas = env.canvas.clone().expect("reset creates a canvas");
    let status = canvas.status();
    let reward = match transitions.last() {
        Some(t) => t.reward,
        None => evaluate_terminal(&canvas, &env.cfg.reward, status),
    };
    Ok(Trajectory {
        transitions,
        status,
        truncated,
        reward,
        coverage: coverage(&canvas),
        canvas,
    })
}

/// Share of the canvas holding decided structural tiles.
pub fn coverage(canvas: &Canvas) -> f64 {
    canvas.non_void_count() as f64 / canvas.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub max_displacement: f64,
    /// `1 / (1 + max_displacement)`.
    pub score: f64,
}

/// Deterministic stand-in for a physics displacement measurement.
///
/// Each structural tile's displacement is its cheapest path to the ground row
/// (`y = 0`) through structural tiles, where stepping straight down is free
/// and any other step costs 1, capped at the canvas's horizontal extent.
/// Tiles cut off from the ground get the cap. Without the cap a long
/// grounded path could outscore a floating tile.
pub fn stability_proxy(canvas: &Canvas) -> Stability {
    let rules = canvas.ruleset();
    let dims = canvas.dims();
    let structural = |c: CellIndex| matches!(canvas.cell(c), CellState::Decided(t) if !rules.is_void(t));
    let cap = if dims.len() >= 3 {
        dims[0].max(dims[2])
    } else {
        dims[0]
    };

    let mut dist = vec![usize::MAX; canvas.len()];
    let mut queue = VecDeque::new();
    let ground_stride = dims[0];
    for c in 0..canvas.len() {
        if structural(c) && (c / ground_stride).is_multiple_of(dims[1]) {
            dist[c] = 0;
            queue.push_back(c);
        }
    }
    // 0-1 BFS over reversed edges: a tile directly above `v` reaches `v` for free.
    let up = Direction::new(1, true);
    while let Some(v) = queue.pop_front() {
        for dir in Direction::all(dims.len()) {
            let Some(u) = canvas.neighbor(v, dir) else { continue };
            if !structural(u) {
                continue;
            }
            let cost = usize::from(dir != up);
            if dist[v] + cost < dist[u] {
                dist[u] = dist[v] + cost;
                if cost == 0 {
                    queue.push_front(u);
                } else {
                    queue.push_back(u);
                }
            }
        }
    }

    let max = (0..canvas.len())
        .filter(|&c| structural(c))
        .map(|c| dist[c].min(cap))
        .max()
        .unwrap_or(0) as f64;
    Stability {
        max_displacement: max,
        score: 1.0 / (1.0 + max),
    }
}

/// Objective values of a final canvas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminalMetrics {
    pub coverage: f64,
    pub stability: f64,
    /// Sum of absolute deviations from the tile-share targets.
    pub target_miss: f64,
}

impl RewardSpec {
    /// Weighted sum of the objectives, minus the penalty for invalid endings.
    pub fn score(&self, m: &TerminalMetrics, status: Status) -> f64 {
        let mut r = self.coverage_weight * m.coverage + self.stability_weight * m.stability;
        if let Some(target) = &self.tile_target {
            r += target.weight * (1.0 - m.target_miss);
        }
        if status == Status::Invalid {
            r -= self.invalid_penalty;
        }
        r
    }
}

pub fn terminal_metrics(canvas: &Canvas, spec: &RewardSpec) -> TerminalMetrics {
    let stability = if spec.stability_weight != 0.0 {
        stability_proxy(canvas).score
    } else {
        0.0
    };
    let target_miss = spec.tile_target.as_ref().map_or(0.0, |target| {
        let mut counts = vec![0usize; canvas.ruleset().len()];
        for c in canvas.cells() {
            if let CellState::Decided(t) = c {
                counts[*t] += 1;
            }
        }
        let total = canvas.len() as f64;
        target
            .fractions
            .iter()
            .map(|(&t, &want)| (counts[t] as f64 / total - want).abs())
            .sum()
    });
    TerminalMetrics {
        coverage: coverage(canvas),
        stability,
        target_miss,
    }
}

/// Weighted terminal objective for a finished (or truncated) canvas.
pub fn evaluate_terminal(canvas: &Canvas, spec: &RewardSpec, status: Status) -> f64 {
    spec.score(&terminal_metrics(canvas, spec), status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::RandomPolicy;
    use crate::tileset::{load_tileset, Tile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn checkerboard() -> Arc<Ruleset> {
        Arc::new(load_tileset(include_str!("../tilesets/checkerboard.json")).unwrap())
    }

    fn floor() -> Arc<Ruleset> {
        Arc::new(load_tileset(include_str!("../tilesets/floor.json")).unwrap())
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn structure(dims: &[usize], blocks: &[(usize, usize)]) -> Canvas {
        // One self-compatible tile plus void.
        let rs = Ruleset::new(
            2,
            vec![
                Tile { id: 0, name: "S".into(), weight: 1.0, sockets: None },
                Tile { id: 1, name: "V".into(), weight: 1.0, sockets: None },
            ],
            Direction::all(2).flat_map(|d| [(0, d, 0), (0, d, 1), (1, d, 1)]),
            Some(1),
        )
        .unwrap();
        let mut cells = vec![None; dims.iter().product()];
        for &(x, y) in blocks {
            cells[x + dims[0] * y] = Some(0);
        }
        Canvas::from_cells(dims, Arc::new(rs), &cells, Consistency::Local).unwrap()
    }

    #[test]
    fn observation_length() {
        assert_eq!(observation_len(1, 2, 2), 39);
        let cfg = EnvConfig { dims: vec![4, 4], radius: 1, ..EnvConfig::default() };
        let mut env = Env::new(checkerboard(), cfg).unwrap();
        let obs = env.reset(&mut rng(0)).unwrap();
        assert_eq!(obs.features.len(), 39);
        assert_eq!(obs.mask.len(), 2);
        assert!(obs.mask.iter().any(|&m| m));
        for cell in obs.window().chunks(4) {
            assert_eq!(cell.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn reset_is_seeded() {
        let mut env = Env::new(floor(), EnvConfig::default()).unwrap();
        let a = env.reset(&mut rng(5)).unwrap();
        let b = env.reset(&mut rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_cell_episode_is_done_at_reset() {
        let cfg = EnvConfig { dims: vec![1, 1], ..EnvConfig::default() };
        let mut env = Env::new(checkerboard(), cfg).unwrap();
        let obs = env.reset(&mut rng(0)).unwrap();
        assert!(env.is_done());
        assert!(obs.mask.iter().all(|&m| !m));
        assert!(matches!(env.step(0, &mut rng(0)), Err(Error::EpisodeFinished)));
        let t = rollout(&mut env, &RandomPolicy::uniform(2), &mut rng(0)).unwrap();
        assert!(t.transitions.is_empty());
        assert_eq!(t.status, Status::Complete);
        assert_eq!(t.reward, 1.0);
    }

    #[test]
    fn illegal_action_and_terminal_reward() {
        let cfg = EnvConfig { dims: vec![2, 1], ..EnvConfig::default() };
        let mut env = Env::new(checkerboard(), cfg).unwrap();
        let mut r = rng(1);
        let obs = env.reset(&mut r).unwrap();
        let legal = obs.mask.iter().position(|&m| m).unwrap();
        assert!(matches!(env.step(1 - legal, &mut r), Err(Error::IllegalAction(_))));
        let s = env.step(legal, &mut r).unwrap();
        assert!(s.done && !s.truncated);
        assert_eq!(s.info.status, Status::Complete);
        assert_eq!(s.reward, evaluate_terminal(env.canvas().unwrap(), &RewardSpec::default(), Status::Complete));
        assert_eq!(s.reward, 1.0);
        assert!(matches!(env.step(legal, &mut r), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn non_terminal_rewards_are_zero() {
        let mut env = Env::new(floor(), EnvConfig::default()).unwrap();
        let t = rollout(&mut env, &RandomPolicy::uniform(3), &mut rng(11)).unwrap();
        let (last, rest) = t.transitions.split_last().unwrap();
        assert!(rest.iter().all(|x| x.reward == 0.0 && !x.done));
        assert!(last.done);
        assert_eq!(last.reward, t.reward);
    }

    #[test]
    fn checkerboard_rollout_completes() {
        let cfg = EnvConfig {
            dims: vec![4, 4],
            consistency: Consistency::Propagate,
            ..EnvConfig::default()
        };
        let mut env = Env::new(checkerboard(), cfg).unwrap();
        for s in 0..20 {
            let t = rollout(&mut env, &RandomPolicy::uniform(2), &mut rng(s)).unwrap();
            assert_eq!(t.transitions.len(), 15);
            assert_eq!(t.status, Status::Complete);
            assert_eq!(t.reward, 1.0);
        }
    }

    #[test]
    fn truncation() {
        let cfg = EnvConfig { max_steps: Some(3), ..EnvConfig::default() };
        let mut env = Env::new(checkerboard(), cfg).unwrap();
        let t = rollout(&mut env, &RandomPolicy::uniform(2), &mut rng(2)).unwrap();
        assert_eq!(t.transitions.len(), 3);
        assert!(t.truncated);
        assert!(t.transitions.last().unwrap().truncated);
        assert_eq!(t.status, Status::InProgress);
    }

    #[test]
    fn coverage_values() {
        let full = structure(&[4, 4], &(0..16).map(|i| (i % 4, i / 4)).collect::<Vec<_>>());
        assert_eq!(coverage(&full), 1.0);
        let half = structure(&[4, 4], &(0..8).map(|i| (i % 4, i / 4)).collect::<Vec<_>>());
        assert_eq!(coverage(&half), 0.5);
        let rs = half.ruleset().clone();
        let voids = Canvas::from_cells(&[2, 2], rs, &[Some(1), Some(1), None, None], Consistency::Local)
            .unwrap();
        assert_eq!(coverage(&voids), 0.0);
    }

    #[test]
    fn stability_examples() {
        let column = structure(&[3, 6], &[(1, 0), (1, 1), (1, 2), (1, 3), (1, 4)]);
        let s = stability_proxy(&column);
        assert_eq!(s.max_displacement, 0.0);
        assert_eq!(s.score, 1.0);

        let ledge = structure(&[4, 4], &[(0, 0), (0, 1), (1, 1)]);
        let s = stability_proxy(&ledge);
        assert_eq!(s.max_displacement, 1.0);
        assert_eq!(s.score, 0.5);

        let floating = structure(&[8, 8], &[(3, 3)]);
        let s = stability_proxy(&floating);
        assert_eq!(s.max_displacement, 8.0);
        assert_eq!(s.score, 1.0 / 9.0);

        let empty = structure(&[3, 3], &[]);
        assert_eq!(stability_proxy(&empty).max_displacement, 0.0);
    }

    #[test]
    fn going_up_costs_one() {
        // Hanging from an arch: (0,0),(0,1),(0,2),(1,2),(2,2),(2,1) with (2,0) empty.
        let arch = structure(&[3, 3], &[(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1)]);
        // (2,1) -> (2,2) up 1 -> (1,2) 1 -> (0,2) 1 -> down free.
        assert_eq!(stability_proxy(&arch).max_displacement, 3.0);
    }

    #[test]
    fn terminal_objective() {
        let full = structure(&[4, 4], &(0..16).map(|i| (i % 4, i / 4)).collect::<Vec<_>>());
        assert_eq!(evaluate_terminal(&full, &RewardSpec::default(), Status::Complete), 1.0);

        let ledge = structure(&[2, 2], &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        let spec = RewardSpec { coverage_weight: 0.5, stability_weight: 0.5, ..RewardSpec::default() };
        assert_eq!(evaluate_terminal(&ledge, &spec, Status::Complete), 1.0);
        let ledge = structure(&[2, 2], &[(0, 0), (0, 1), (1, 1)]);
        // coverage 0.75, stability 0.5
        assert_eq!(evaluate_terminal(&ledge, &spec, Status::Complete), 0.625);
        let m = TerminalMetrics { coverage: 1.0, stability: 0.5, target_miss: 0.0 };
        assert_eq!(spec.score(&m, Status::Complete), 0.75);
        let m = TerminalMetrics { coverage: 0.6, stability: 0.0, target_miss: 0.0 };
        let spec = RewardSpec { invalid_penalty: 0.2, ..RewardSpec::default() };
        assert!((spec.score(&m, Status::Invalid) - 0.4).abs() < 1e-12);

        let half = structure(&[4, 4], &(0..8).map(|i| (i % 4, i / 4)).collect::<Vec<_>>());
        let spec = RewardSpec { coverage_weight: 1.2, invalid_penalty: 0.2, ..RewardSpec::default() };
        let r = evaluate_terminal(&half, &spec, Status::Invalid);
        assert!((r - 0.4).abs() < 1e-12, "{r}");

        let mut fractions = BTreeMap::new();
        fractions.insert(0, 0.25);
        let spec = RewardSpec {
            coverage_weight: 0.0,
            tile_target: Some(TileTarget { weight: 2.0, fractions }),
            ..RewardSpec::default()
        };
        // Half of the canvas is tile 0 against a quarter target.
        assert_eq!(evaluate_terminal(&half, &spec, Status::Complete), 1.5);
    }

    #[test]
    fn reward_spec_validation() {
        let zero = RewardSpec { coverage_weight: 0.0, ..RewardSpec::default() };
        assert!(Env::new(checkerboard(), EnvConfig { reward: zero, ..EnvConfig::default() }).is_err());
        let neg = RewardSpec { stability_weight: -1.0, ..RewardSpec::default() };
        assert!(neg.validate().is_err());
    }
}
