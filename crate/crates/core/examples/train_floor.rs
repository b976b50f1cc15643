//! Trains a policy on the mostly-floor task and compares it to the random
//! baseline.
//!
//! ```text
//! cargo run --release --example train_floor -- [master_seed] [total_steps]
//! ```

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::env::{ActionMode, Env, EnvConfig, RewardSpec};
use latticeforge::policy::RandomPolicy;
use latticeforge::trainer::{evaluate_policy, stream_rng, train, TrainConfig};

fn main() -> latticeforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("master seed"));
    let total: usize = args.next().map_or(90_000, |s| s.parse().expect("total steps"));

    let rules = Arc::new(builtin::ruleset("floor").expect("built-in"));
    let env_cfg = EnvConfig {
        dims: vec![8, 8],
        reward: RewardSpec {
            coverage_weight: 0.5,
            stability_weight: 0.5,
            ..RewardSpec::default()
        },
        ..EnvConfig::default()
    };
    let cfg = TrainConfig {
        master_seed: seed,
        total_steps: total,
        ..TrainConfig::default()
    };

    let t0 = std::time::Instant::now();
    let out = train(&cfg, rules.clone(), &env_cfg, None)?;
    for row in out.metrics.iter().step_by(5) {
        println!(
            "update {:3}  steps {:6}  reward {:.3}  coverage {:.3}  entropy {:.3}",
            row.update, row.steps, row.mean_reward, row.mean_coverage, row.entropy
        );
    }
    println!("trained in {:.1}s", t0.elapsed().as_secs_f64());

    let mut env = Env::new(rules.clone(), env_cfg)?;
    let random = RandomPolicy::uniform(rules.len());
    let base = evaluate_policy(&random, &mut env, 200, ActionMode::Sample, &mut stream_rng(seed, 9, 0, 0))?;
    let trained = evaluate_policy(&out.params, &mut env, 200, ActionMode::Sample, &mut stream_rng(seed, 9, 0, 1))?;
    println!("random : reward {:.3} coverage {:.3}", base.mean_reward, base.mean_coverage);
    println!("trained: reward {:.3} coverage {:.3}", trained.mean_reward, trained.mean_coverage);
    println!("gap    : {:+.3}", trained.mean_reward - base.mean_reward);
    Ok(())
}
