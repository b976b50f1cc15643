//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on domain errors, 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::builtin;
use crate::checkpoint::Checkpoint;
use crate::config::{parse_dims, RunConfig};
use crate::env::{rollout, ActionMode, Env, EnvConfig};
use crate::error::Error;
use crate::export::{render_ascii, AssemblyDoc};
use crate::policy::{Policy, PolicyParams, RandomPolicy};
use crate::solver::{Consistency, Status};
use crate::tileset::{extract_rules, validate_ruleset, Grid, Ruleset};
use crate::trainer::{evaluate_policy, Trainer};

#[derive(Debug, Parser)]
#[command(name = "latticeforge", version, about = "Grow tile assemblies under adjacency constraints and train tile-selection policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tileset and report dead ends and unused tiles.
    Validate {
        #[arg(long)]
        tileset: String,
    },
    /// Derive a tileset from an exemplar grid (text rows or JSON `{dims, cells}`).
    Extract {
        sample: PathBuf,
        /// Lattice rank of the produced tileset.
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one assembly.
    Rollout {
        #[command(flatten)]
        env: EnvArgs,
        /// `random` or a checkpoint path.
        #[arg(long, default_value = "random")]
        policy: String,
        /// Attempts allowed before giving up on contradictions.
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a policy by self-play.
    Train {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        n_envs: Option<usize>,
        /// Output directory for metrics and checkpoints.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Continue from a trainer checkpoint.
        #[arg(long)]
        ckpt: Option<PathBuf>,
    },
    /// Evaluate a checkpoint (or the random baseline).
    Eval {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// `random` evaluates the tile-weight baseline instead of a checkpoint.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Take the most probable tile instead of sampling.
        #[arg(long)]
        greedy: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-load an assembly document, check its metrics and render it.
    Export {
        assembly: PathBuf,
        #[arg(long)]
        tileset: String,
        #[arg(long)]
        consistency: Option<Consistency>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct EnvArgs {
    /// Tileset file or built-in name.
    #[arg(long)]
    pub tileset: Option<String>,
    /// `WxH` or `WxHxD`.
    #[arg(long, value_parser = parse_dims_arg)]
    pub dims: Option<Dims>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub consistency: Option<Consistency>,
    /// TOML or JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Canvas extents parsed from `WxH[xD]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

fn parse_dims_arg(text: &str) -> std::result::Result<Dims, String> {
    parse_dims(text).map(Dims)
}

enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(Error::Io(e))
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Validate { tileset } => validate(&tileset, out),
        Command::Extract { sample, rank, out: path } => extract(&sample, rank, path.as_deref(), out),
        Command::Rollout { env, policy, episodes, out: path } => {
            rollout_cmd(&env, &policy, episodes, path.as_deref(), out)
        }
        Command::Train { env, n_envs, out: dir, ckpt } => train_cmd(&env, n_envs, &dir, ckpt.as_deref(), out),
        Command::Eval { env, ckpt, policy, episodes, greedy, out: path } => {
            eval_cmd(&env, ckpt.as_deref(), policy.as_deref(), episodes, greedy, path.as_deref(), out)
        }
        Command::Export { assembly, tileset, consistency, out: path } => {
            export_cmd(&assembly, &tileset, consistency, path.as_deref(), out)
        }
    }
}

fn validate(tileset: &str, out: &mut dyn Write) -> CliResult {
    let rs = match builtin::resolve(tileset) {
        Ok(rs) => rs,
        Err(e) => {
            writeln!(out, "error: {e}")?;
            writeln!(out, "1 errors, 0 warnings")?;
            return Err(e.into());
        }
    };
    let diags = validate_ruleset(&rs);
    for d in &diags {
        writeln!(out, "warning: {d}")?;
    }
    writeln!(out, "0 errors, {} warnings", diags.len())?;
    Ok(())
}

fn extract(sample: &Path, rank: usize, path: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let text = std::fs::read_to_string(sample)?;
    let grid = if text.trim_start().starts_with('{') {
        serde_json::from_str::<Grid>(&text).map_err(|e| Error::MalformedDocument(e.to_string()))?
    } else {
        Grid::parse_text(&text)?
    };
    let rs = extract_rules(&grid, rank)?;
    let doc = rs.to_json();
    match path {
        Some(p) => std::fs::write(p, &doc)?,
        None => writeln!(out, "{doc}")?,
    }
    writeln!(
        out,
        "extracted {} tiles, {} rules",
        rs.len(),
        rs.canonical_rules().len()
    )?;
    Ok(())
}

struct Resolved {
    rules: Arc<Ruleset>,
    env: EnvConfig,
    run: RunConfig,
    seed: u64,
}

/// Merges defaults, the checkpoint's environment, the config file and flags,
/// in increasing priority.
fn resolve_env(args: &EnvArgs, ckpt: Option<&Checkpoint>) -> CliResult<Resolved> {
    let run = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let snapshot = ckpt.and_then(|c| c.env.as_ref());
    let mut env = snapshot.map_or_else(EnvConfig::default, |s| s.config.clone());
    env = run.env.apply(env);
    if let Some(Dims(d)) = &args.dims {
        env.dims = d.clone();
    }
    if let Some(c) = args.consistency {
        env.consistency = c;
    }
    let name = args.tileset.clone().or_else(|| run.env.tileset.clone());
    let rules = match (name, snapshot) {
        (Some(n), _) => builtin::resolve(&n)?,
        (None, Some(s)) => s.tileset.clone().into_ruleset()?,
        (None, None) => return Err(CliError::Usage("--tileset is required".into())),
    };
    if args.dims.is_none() && run.env.dims.is_none() && snapshot.is_none() {
        env.dims = vec![8; rules.rank()];
    }
    let seed = args.seed.unwrap_or_else(|| run.master_seed());
    Ok(Resolved {
        rules: Arc::new(rules),
        env,
        run,
        seed,
    })
}

fn load_policy(spec: &str, env: &Env) -> CliResult<Box<dyn Policy>> {
    if spec == "random" {
        return Ok(Box::new(RandomPolicy::weighted(env.ruleset().weights())));
    }
    let params = Checkpoint::load(&ckpt_path(Path::new(spec)))?.to_params()?;
    check_params(&params, env)?;
    Ok(Box::new(params))
}

fn check_params(params: &PolicyParams, env: &Env) -> CliResult {
    if params.obs_dim != env.observation_len() || params.n_actions != env.n_actions() {
        return Err(Error::DimensionMismatch {
            expected: env.observation_len(),
            got: params.obs_dim,
        }
        .into());
    }
    Ok(())
}

/// `ckpt_final` → `ckpt_final.json` when only the latter exists.
fn ckpt_path(p: &Path) -> PathBuf {
    if !p.exists() && p.extension().is_none() {
        let with = p.with_extension("json");
        if with.exists() {
            return with;
        }
    }
    p.to_path_buf()
}

fn rollout_cmd(
    args: &EnvArgs,
    policy: &str,
    attempts: usize,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    if attempts == 0 {
        return Err(CliError::Usage("--episodes must be at least 1".into()));
    }
    let ckpt = if policy == "random" {
        None
    } else {
        Some(Checkpoint::load(&ckpt_path(Path::new(policy)))?)
    };
    let r = resolve_env(args, ckpt.as_ref())?;
    let mut env = Env::new(r.rules, r.env)?;
    let policy = load_policy(policy, &env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut traj = rollout(&mut env, policy.as_ref(), &mut rng)?;
    let mut tries = 1;
    while traj.status == Status::Invalid && tries < attempts {
        traj = rollout(&mut env, policy.as_ref(), &mut rng)?;
        tries += 1;
    }
    let doc = AssemblyDoc::from_canvas(&traj.canvas, r.seed, traj.transitions.len());
    match path {
        Some(p) => std::fs::write(p, doc.to_json())?,
        None => writeln!(out, "{}", doc.to_json())?,
    }
    if let Ok(text) = render_ascii(&traj.canvas) {
        writeln!(out, "{text}")?;
    }
    writeln!(
        out,
        "status: {:?}, coverage: {}, stability: {}, steps: {}, attempts: {tries}",
        doc.status, doc.metrics.coverage, doc.metrics.stability, doc.metrics.steps
    )?;
    if traj.status == Status::Invalid {
        return Err(Error::BadConfig(format!("contradiction budget exceeded after {tries} attempts")).into());
    }
    Ok(())
}

fn train_cmd(
    args: &EnvArgs,
    n_envs: Option<usize>,
    dir: &Path,
    resume: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let mut trainer = match resume {
        Some(p) => Trainer::from_checkpoint(&Checkpoint::load(&ckpt_path(p))?)?,
        None => {
            let r = resolve_env(args, None)?;
            let mut cfg = r.run.train.clone();
            cfg.master_seed = r.seed;
            if let Some(n) = n_envs {
                cfg.n_envs = n;
            }
            Trainer::new(cfg, r.rules, r.env)?
        }
    };
    let rows = trainer.run(Some(dir))?;
    if let Some(last) = rows.last() {
        writeln!(
            out,
            "trained {} updates, {} steps; last mean_reward {}, mean_coverage {}",
            last.update, last.steps, last.mean_reward, last.mean_coverage
        )?;
    }
    writeln!(out, "metrics: {}", dir.join("metrics.csv").display())?;
    writeln!(out, "checkpoint: {}", dir.join("ckpt_final.json").display())?;
    Ok(())
}

fn eval_cmd(
    args: &EnvArgs,
    ckpt: Option<&Path>,
    policy: Option<&str>,
    episodes: usize,
    greedy: bool,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let ckpt = match ckpt {
        Some(p) => Some(Checkpoint::load(&ckpt_path(p))?),
        None => None,
    };
    let r = resolve_env(args, ckpt.as_ref())?;
    let mut env = Env::new(r.rules, r.env)?;
    let policy: Box<dyn Policy> = match (policy, &ckpt) {
        (Some(spec), _) => load_policy(spec, &env)?,
        (None, Some(c)) => {
            let params = c.to_params()?;
            check_params(&params, &env)?;
            Box::new(params)
        }
        (None, None) => return Err(CliError::Usage("--ckpt or --policy is required".into())),
    };
    let mode = if greedy { ActionMode::Greedy } else { ActionMode::Sample };
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let stats = match evaluate_policy(policy.as_ref(), &mut env, episodes, mode, &mut rng) {
        Err(Error::BadEpisodeCount) => {
            return Err(CliError::Usage("--episodes must be at least 1".into()))
        }
        other => other?,
    };
    writeln!(out, "episodes:      {}", stats.episodes)?;
    writeln!(out, "mean_reward:   {}", stats.mean_reward)?;
    writeln!(out, "std_reward:    {}", stats.std_reward)?;
    writeln!(out, "mean_coverage: {}", stats.mean_coverage)?;
    writeln!(out, "invalid_rate:  {}", stats.invalid_rate)?;
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(&stats).map_err(Error::from)?)?;
    }
    Ok(())
}

fn export_cmd(
    assembly: &Path,
    tileset: &str,
    consistency: Option<Consistency>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let doc = AssemblyDoc::from_json(&std::fs::read_to_string(assembly)?)?;
    let rules = Arc::new(builtin::resolve(tileset)?);
    let canvas = doc.to_canvas(rules, consistency.unwrap_or_default())?;
    let metrics = doc.recompute_metrics(&canvas);
    if metrics != doc.metrics {
        return Err(Error::MalformedDocument(format!(
            "stored metrics {:?} disagree with recomputed {:?}",
            doc.metrics, metrics
        ))
        .into());
    }
    let rendered = match render_ascii(&canvas) {
        Ok(text) => text,
        Err(Error::UnsupportedRank(_)) => AssemblyDoc::from_canvas(&canvas, doc.seed, doc.metrics.steps).to_json(),
        Err(e) => return Err(e.into()),
    };
    match path {
        Some(p) => std::fs::write(p, format!("{rendered}\n"))?,
        None => writeln!(out, "{rendered}")?,
    }
    writeln!(
        out,
        "status: {:?}, coverage: {}, stability: {}",
        canvas.status(),
        metrics.coverage,
        metrics.stability
    )?;
    Ok(())
}
