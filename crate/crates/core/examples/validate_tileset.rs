//! Loads every built-in tileset (or the files given on the command line) and
//! prints its size and diagnostics.
//!
//! ```text
//! cargo run --example validate_tileset -- [tileset.json ...]
//! ```

use latticeforge::builtin;
use latticeforge::tileset::validate_ruleset;

fn main() {
    let specs: Vec<String> = std::env::args().skip(1).collect();
    let specs = if specs.is_empty() {
        builtin::names().map(String::from).collect()
    } else {
        specs
    };
    for spec in specs {
        match builtin::resolve(&spec) {
            Ok(rs) => {
                let diags = validate_ruleset(&rs);
                println!(
                    "{spec}: rank {}, {} tiles, {} rules, void {:?}, {} warnings",
                    rs.rank(),
                    rs.len(),
                    rs.canonical_rules().len(),
                    rs.void_tile(),
                    diags.len()
                );
                for d in diags {
                    println!("  {d}");
                }
            }
            Err(e) => println!("{spec}: error: {e}"),
        }
    }
}
