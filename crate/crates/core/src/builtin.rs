//! Tilesets shipped with the crate, addressable by name.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tileset::{load_tileset, Ruleset};

const BUILTINS: &[(&str, &str)] = &[
    ("checkerboard", include_str!("../tilesets/checkerboard.json")),
    ("pipes", include_str!("../tilesets/pipes.json")),
    ("floor", include_str!("../tilesets/floor.json")),
    ("coloring", include_str!("../tilesets/coloring.json")),
    ("stripes", include_str!("../tilesets/stripes.json")),
    ("blocks3d", include_str!("../tilesets/blocks3d.json")),
    ("terrace", include_str!("../tilesets/terrace.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// Source text of a built-in tileset.
pub fn document(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

pub fn ruleset(name: &str) -> Option<Ruleset> {
    document(name).map(|d| load_tileset(d).expect("built-in tilesets are valid"))
}

/// Loads `spec` as a file path if one exists, else as a built-in name.
pub fn resolve(spec: &str) -> Result<Ruleset> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_tileset(&std::fs::read_to_string(path)?);
    }
    match document(spec) {
        Some(doc) => load_tileset(doc),
        None => Err(Error::MalformedDocument(format!(
            "no tileset file or built-in named {spec:?} (built-ins: {})",
            names().collect::<Vec<_>>().join(", ")
        ))),
    }
}
