//! Compares the two consistency modes on the terrace tileset, where checking
//! only decided neighbours lets the canvas paint itself into a corner.

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::env::{rollout, Env, EnvConfig};
use latticeforge::policy::RandomPolicy;
use latticeforge::solver::{Consistency, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> latticeforge::Result<()> {
    let rules = Arc::new(builtin::ruleset("terrace").expect("built-in"));
    let policy = RandomPolicy::uniform(rules.len());
    for dims in [[8, 8], [12, 12], [16, 16]] {
        for mode in [Consistency::Local, Consistency::Propagate] {
            let cfg = EnvConfig {
                dims: dims.to_vec(),
                consistency: mode,
                ..EnvConfig::default()
            };
            let mut env = Env::new(rules.clone(), cfg)?;
            let mut invalid = 0;
            let t0 = std::time::Instant::now();
            for seed in 0..500 {
                let traj = rollout(&mut env, &policy, &mut ChaCha8Rng::seed_from_u64(seed))?;
                invalid += usize::from(traj.status == Status::Invalid);
            }
            println!(
                "{}x{} {:<9} invalid {:5.1}%  ({:.2}s)",
                dims[0],
                dims[1],
                format!("{mode:?}"),
                invalid as f64 / 5.0,
                t0.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
