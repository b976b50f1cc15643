//! Grows one assembly step by step: pick the most constrained frontier cell,
//! pick a tile allowed there, repeat.
//!
//! ```text
//! cargo run --example grow_assembly -- [tileset] [WxH] [seed]
//! ```

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::config::parse_dims;
use latticeforge::export::render_ascii;
use latticeforge::solver::{Canvas, Consistency, SeedSpec, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> latticeforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "pipes".into());
    let dims = parse_dims(&args.next().unwrap_or_else(|| "8x6".into())).expect("WxH");
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let rules = Arc::new(builtin::resolve(&name)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = Canvas::new(&dims, rules.clone(), &SeedSpec::Center, Consistency::Local, &mut rng)?;
    let weights = rules.weights();
    let mut step = 0;
    while canvas.status() == Status::InProgress {
        let cell = canvas.select_node(&mut rng)?;
        let options: Vec<_> = canvas.valid_tiles(cell)?.iter().collect();
        let total: f64 = options.iter().map(|&t| weights[t]).sum();
        let mut pick = rng.random_range(0.0..total);
        let tile = *options
            .iter()
            .find(|&&t| {
                pick -= weights[t];
                pick < 0.0
            })
            .unwrap_or(options.last().unwrap());
        canvas.place(cell, tile)?;
        step += 1;
        if dims.len() == 2 && step % 8 == 0 {
            println!("after {step} placements, frontier {}:\n{}\n", canvas.frontier_len(), render_ascii(&canvas)?);
        }
    }
    println!("{:?} after {step} placements, sound: {}", canvas.status(), canvas.is_sound());
    if dims.len() == 2 {
        println!("{}", render_ascii(&canvas)?);
    }
    Ok(())
}
