//! Writes an assembly document, reads it back and checks that the stored
//! metrics match the rebuilt canvas.

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::env::{rollout, Env, EnvConfig};
use latticeforge::export::{render_ascii, AssemblyDoc};
use latticeforge::policy::RandomPolicy;
use latticeforge::solver::Consistency;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> latticeforge::Result<()> {
    let rules = Arc::new(builtin::ruleset("floor").expect("built-in"));
    let cfg = EnvConfig {
        dims: vec![10, 5],
        ..EnvConfig::default()
    };
    let mut env = Env::new(rules.clone(), cfg)?;
    let seed = 4;
    let traj = rollout(&mut env, &RandomPolicy::weighted(rules.weights()), &mut ChaCha8Rng::seed_from_u64(seed))?;
    let doc = AssemblyDoc::from_canvas(&traj.canvas, seed, traj.transitions.len());

    let path = std::env::temp_dir().join("latticeforge_assembly.json");
    std::fs::write(&path, doc.to_json())?;
    println!("wrote {}", path.display());

    let back = AssemblyDoc::from_json(&std::fs::read_to_string(&path)?)?;
    let canvas = back.to_canvas(rules, Consistency::Local)?;
    assert_eq!(back.recompute_metrics(&canvas), doc.metrics);
    println!("{}", render_ascii(&canvas)?);
    println!("{:?} {:?}", back.status, back.metrics);
    Ok(())
}
