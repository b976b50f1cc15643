//! Masked action distributions and a finite-difference check of the PPO loss
//! gradient.

use latticeforge::policy::{gradients, loss, LossSpec, PolicyParams, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> latticeforge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut params = PolicyParams::init(10, 4, 16, 3)?;
    println!("{} parameters", params.num_params());

    let obs: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
    for mask in [[true; 4], [true, false, true, false], [false, false, true, false]] {
        let d = params.policy_forward(&obs, &mask)?;
        println!("mask {mask:?} -> probs {:.4?}, entropy {:.4}", d.probs, d.entropy());
    }
    println!("value {:.4}", params.value_forward(&obs)?);

    let data: Vec<(Vec<f64>, [bool; 4], usize, f64, f64, f64)> = (0..32)
        .map(|_| {
            let o: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = rng.random_range(0..4);
            let mut m = [rng.random_bool(0.5), rng.random_bool(0.5), rng.random_bool(0.5), rng.random_bool(0.5)];
            m[a] = true;
            (o, m, a, rng.random_range(-2.5..-0.5), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    let batch: Vec<Sample> = data
        .iter()
        .map(|(o, m, a, old, adv, ret)| Sample {
            obs: o,
            mask: m,
            action: *a,
            old_logprob: *old,
            advantage: *adv,
            ret: *ret,
        })
        .collect();
    let spec = LossSpec::default();
    let (grads, stats) = gradients(&params, &batch, &spec)?;
    println!("{stats:?}");

    let analytic: Vec<f64> = grads.iter().copied().collect();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let i = rng.random_range(0..params.num_params());
        let orig = *params.iter().nth(i).unwrap();
        *params.iter_mut().nth(i).unwrap() = orig + h;
        let up = loss(&params, &batch, &spec)?.loss;
        *params.iter_mut().nth(i).unwrap() = orig - h;
        let down = loss(&params, &batch, &spec)?.loss;
        *params.iter_mut().nth(i).unwrap() = orig;
        let numeric = (up - down) / (2.0 * h);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    println!("finite differences on 50 parameters: max relative error {worst:.2e}");
    Ok(())
}
