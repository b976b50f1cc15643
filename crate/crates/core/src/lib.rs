//! Tile assemblies grown under adjacency constraints, with a learned
//! tile-selection policy.
//!
//! The pipeline, bottom-up:
//!
//! - [`tileset`]: tile dictionaries, the adjacency relation, JSON documents,
//!   diagnostics and rule extraction from exemplar grids.
//! - [`solver`]: the growing [`Canvas`](solver::Canvas), entropy, node
//!   selection, placement and optional arc-consistency propagation.
//! - [`env`]: the episodic environment, observations and terminal objectives
//!   (coverage, stability proxy, tile-share targets).
//! - [`policy`]: masked categorical policy and value networks with exact
//!   gradients of the PPO loss.
//! - [`trainer`]: GAE, PPO updates, self-play training and evaluation.
//! - [`checkpoint`], [`export`], [`config`]: documents on disk.
//! - [`cli`]: the `latticeforge` command.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod builtin;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod export;
pub mod policy;
pub mod solver;
pub mod tileset;
pub mod trainer;

pub use error::{Error, Result};
