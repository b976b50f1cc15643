//! Trains briefly, stops, resumes from the checkpoint, and shows that the
//! resumed rows match an uninterrupted run exactly.

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::checkpoint::Checkpoint;
use latticeforge::env::EnvConfig;
use latticeforge::trainer::{TrainConfig, Trainer};

fn main() -> latticeforge::Result<()> {
    let rules = Arc::new(builtin::ruleset("stripes").expect("built-in"));
    let env_cfg = EnvConfig {
        dims: vec![5, 5],
        ..EnvConfig::default()
    };
    let cfg = TrainConfig {
        total_steps: 3000,
        steps_per_update: 500,
        minibatch_size: 50,
        hidden: 16,
        master_seed: 9,
        ..TrainConfig::default()
    };

    let mut full = Trainer::new(cfg.clone(), rules.clone(), env_cfg.clone())?;
    let rows = full.run(None)?;

    let mut first = Trainer::new(cfg, rules, env_cfg)?;
    for _ in 0..3 {
        first.update_once()?;
    }
    let json = first.checkpoint().to_json();
    println!("checkpoint after {} updates: {} bytes", first.updates_done(), json.len());

    let mut resumed = Trainer::from_checkpoint(&Checkpoint::from_json(&json)?)?;
    let tail = resumed.run(None)?;
    for (a, b) in rows[3..].iter().zip(&tail) {
        println!("{}\n{}  identical: {}", a.to_csv(), b.to_csv(), a == b);
    }
    Ok(())
}
