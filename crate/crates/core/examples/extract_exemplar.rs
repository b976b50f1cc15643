//! Learns adjacency rules from a small exemplar drawing, then grows new
//! assemblies that only use the neighbourhoods seen in the sample.

use std::sync::Arc;

use latticeforge::env::{rollout, Env, EnvConfig};
use latticeforge::export::render_ascii;
use latticeforge::policy::RandomPolicy;
use latticeforge::solver::Consistency;
use latticeforge::tileset::{extract_rules, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// 0 = ground, 1 = wall, 2 = window. Top line is the highest row.
const SAMPLE: &str = "
1 1 1 1 1 1
1 2 1 1 2 1
1 1 1 1 1 1
1 2 1 1 2 1
0 0 0 0 0 0
";

fn main() -> latticeforge::Result<()> {
    let rules = extract_rules(&Grid::parse_text(SAMPLE)?, 2)?;
    println!("{} tiles, weights {:?}", rules.len(), rules.weights());
    for (a, d, b) in rules.canonical_rules() {
        println!("  {} {d} {}", rules.tiles()[a].name, rules.tiles()[b].name);
    }

    let rules = Arc::new(rules);
    let cfg = EnvConfig {
        dims: vec![10, 6],
        consistency: Consistency::Propagate,
        ..EnvConfig::default()
    };
    let mut env = Env::new(rules.clone(), cfg)?;
    let policy = RandomPolicy::weighted(rules.weights());
    for seed in 0..3 {
        let traj = rollout(&mut env, &policy, &mut ChaCha8Rng::seed_from_u64(seed))?;
        println!("\nseed {seed}: {:?}, coverage {:.2}", traj.status, traj.coverage);
        println!("{}", render_ascii(&traj.canvas)?);
    }
    Ok(())
}
