//! Tile dictionaries and their adjacency relation.
//!
//! A [`Ruleset`] holds the tiles that may be placed and, for every ordered
//! pair of tiles and every lattice direction, whether the second tile may sit
//! next to the first in that direction. The relation is always closed under
//! mirroring: `allowed(a, dir, b)` holds exactly when `allowed(b, -dir, a)`
//! does.
//!
//! Rulesets are authored as JSON tileset documents (see [`TilesetDoc`]),
//! either with explicit pair rules or with per-face socket labels, or they
//! are extracted from an exemplar grid with [`extract_rules`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense tile index, `0..ruleset.len()`.
pub type TileId = usize;

/// Upper bound on dictionary size; candidate domains are 64-bit masks.
pub const MAX_TILES: usize = 64;

/// Current tileset document version.
pub const TILESET_VERSION: u32 = 1;

/// A lattice direction: an axis and a sign.
///
/// Stored as `2 * axis + (sign < 0)`, so `+x = 0, -x = 1, +y = 2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction(u8);

const AXIS_NAMES: [char; 3] = ['x', 'y', 'z'];

impl Direction {
    pub fn new(axis: usize, positive: bool) -> Self {
        assert!(axis < 3, "axis {axis} out of range");
        Direction((2 * axis + usize::from(!positive)) as u8)
    }

    pub const fn from_index(index: usize) -> Self {
        assert!(index < 6, "direction index out of range");
        Direction(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn axis(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn opposite(self) -> Self {
        Direction(self.0 ^ 1)
    }

    /// All `2 * rank` directions in index order.
    pub fn all(rank: usize) -> impl Iterator<Item = Direction> {
        (0..2 * rank).map(Direction::from_index)
    }

    /// Parses `"+x"`, `"-y"`, ... and rejects axes beyond `rank`.
    pub fn parse(name: &str, rank: usize) -> Result<Self> {
        let mut chars = name.chars();
        let positive = match chars.next() {
            Some('+') => true,
            Some('-') => false,
            _ => return Err(Error::BadDirection(name.to_string())),
        };
        let axis = chars
            .next()
            .and_then(|c| AXIS_NAMES.iter().position(|&a| a == c))
            .ok_or_else(|| Error::BadDirection(name.to_string()))?;
        if chars.next().is_some() || axis >= rank {
            return Err(Error::BadDirection(name.to_string()));
        }
        Ok(Direction::new(axis, positive))
    }

    pub fn name(self) -> String {
        let sign = if self.is_positive() { '+' } else { '-' };
        format!("{sign}{}", AXIS_NAMES[self.axis()])
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A set of tile ids packed into a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TileMask(pub u64);

impl TileMask {
    pub const EMPTY: TileMask = TileMask(0);

    /// The mask containing tiles `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            TileMask(u64::MAX)
        } else {
            TileMask((1u64 << n) - 1)
        }
    }

    pub fn single(tile: TileId) -> Self {
        TileMask(1u64 << tile)
    }

    pub fn contains(self, tile: TileId) -> bool {
        tile < 64 && self.0 & (1u64 << tile) != 0
    }

    pub fn insert(&mut self, tile: TileId) {
        self.0 |= 1u64 << tile;
    }

    pub fn remove(&mut self, tile: TileId) {
        self.0 &= !(1u64 << tile);
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TileId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(t)
            }
        })
    }
}

impl std::ops::BitAnd for TileMask {
    type Output = TileMask;
    fn bitand(self, rhs: Self) -> Self {
        TileMask(self.0 & rhs.0)
    }
}

impl std::ops::BitAndAssign for TileMask {
    fn bitand_assign(&mut self, rhs: Self) {
        self.0 &= rhs.0;
    }
}

impl std::ops::BitOr for TileMask {
    type Output = TileMask;
    fn bitor(self, rhs: Self) -> Self {
        TileMask(self.0 | rhs.0)
    }
}

impl std::ops::BitOrAssign for TileMask {
    fn bitor_assign(&mut self, rhs: Self) {
        self.0 |= rhs.0;
    }
}

impl FromIterator<TileId> for TileMask {
    fn from_iter<I: IntoIterator<Item = TileId>>(iter: I) -> Self {
        let mut m = TileMask::EMPTY;
        for t in iter {
            m.insert(t);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tile {
    pub id: TileId,
    pub name: String,
    pub weight: f64,
    /// One socket label per direction, in direction index order.
    pub sockets: Option<Vec<String>>,
}

/// Tile dictionary plus its adjacency relation.
///
/// Immutable once built; share it behind an `Arc` across environments.
#[derive(Clone, Debug, PartialEq)]
pub struct Ruleset {
    rank: usize,
    tiles: Vec<Tile>,
    /// `support[a * 2 * rank + dir]` holds every `b` with `allowed(a, dir, b)`.
    support: Vec<TileMask>,
    void_tile: Option<TileId>,
}

impl Ruleset {
    /// Builds a ruleset from explicit `(a, dir, b)` triples, adding every
    /// mirror rule.
    pub fn new(
        rank: usize,
        tiles: Vec<Tile>,
        rules: impl IntoIterator<Item = (TileId, Direction, TileId)>,
        void_tile: Option<TileId>,
    ) -> Result<Self> {
        if !(2..=3).contains(&rank) {
            return Err(Error::MalformedDocument(format!(
                "rank must be 2 or 3, got {rank}"
            )));
        }
        if tiles.is_empty() {
            return Err(Error::MalformedDocument("no tiles declared".into()));
        }
        if tiles.len() > MAX_TILES {
            return Err(Error::TooManyTiles(tiles.len()));
        }
        for (i, t) in tiles.iter().enumerate() {
            if t.id != i {
                return Err(Error::MalformedDocument(format!(
                    "tile ids must be dense 0..{}, found {} at position {i}",
                    tiles.len(),
                    t.id
                )));
            }
            if !(t.weight > 0.0) || !t.weight.is_finite() {
                return Err(Error::NonPositiveWeight {
                    tile: t.id,
                    weight: t.weight,
                });
            }
            if let Some(s) = &t.sockets {
                if s.len() != 2 * rank {
                    return Err(Error::MalformedDocument(format!(
                        "tile {} has {} sockets, expected {}",
                        t.id,
                        s.len(),
                        2 * rank
                    )));
                }
            }
        }
        if let Some(v) = void_tile {
            if v >= tiles.len() {
                return Err(Error::UnknownTile(v));
            }
        }
        let n_dirs = 2 * rank;
        let mut rs = Ruleset {
            rank,
            support: vec![TileMask::EMPTY; tiles.len() * n_dirs],
            tiles,
            void_tile,
        };
        for (a, dir, b) in rules {
            rs.allow(a, dir, b)?;
        }
        Ok(rs)
    }

    fn allow(&mut self, a: TileId, dir: Direction, b: TileId) -> Result<()> {
        let n = self.tiles.len();
        if a >= n {
            return Err(Error::UnknownTile(a));
        }
        if b >= n {
            return Err(Error::UnknownTile(b));
        }
        if dir.axis() >= self.rank {
            return Err(Error::BadDirection(dir.name()));
        }
        let n_dirs = 2 * self.rank;
        self.support[a * n_dirs + dir.index()].insert(b);
        self.support[b * n_dirs + dir.opposite().index()].insert(a);
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile(&self, id: TileId) -> Result<&Tile> {
        self.tiles.get(id).ok_or(Error::UnknownTile(id))
    }

    pub fn void_tile(&self) -> Option<TileId> {
        self.void_tile
    }

    pub fn is_void(&self, tile: TileId) -> bool {
        self.void_tile == Some(tile)
    }

    pub fn all_tiles(&self) -> TileMask {
        TileMask::full(self.tiles.len())
    }

    /// Tiles that may be placed on the `dir` side of `tile`.
    ///
    /// Panics if `tile` is out of range; use [`compatible`] for checked access.
    #[inline]
    pub fn support(&self, tile: TileId, dir: Direction) -> TileMask {
        self.support[tile * 2 * self.rank + dir.index()]
    }

    /// Unchecked form of [`compatible`].
    #[inline]
    pub fn allowed(&self, a: TileId, dir: Direction, b: TileId) -> bool {
        self.support(a, dir).contains(b)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.tiles.iter().map(|t| t.weight).collect()
    }

    /// Every `(a, dir, b)` in the relation, positive directions only.
    pub fn canonical_rules(&self) -> Vec<(TileId, Direction, TileId)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for axis in 0..self.rank {
                let dir = Direction::new(axis, true);
                for b in self.support(a, dir).iter() {
                    out.push((a, dir, b));
                }
            }
        }
        out
    }

    pub fn to_doc(&self) -> TilesetDoc {
        TilesetDoc {
            version: TILESET_VERSION,
            rank: self.rank,
            tiles: self
                .tiles
                .iter()
                .map(|t| TileDoc {
                    id: t.id,
                    name: t.name.clone(),
                    weight: t.weight,
                    sockets: None,
                })
                .collect(),
            rules: self
                .canonical_rules()
                .into_iter()
                .map(|(a, dir, b)| RuleDoc {
                    a,
                    dir: dir.name(),
                    b,
                })
                .collect(),
            socket_compat: Vec::new(),
            void_tile: self.void_tile,
        }
    }

    /// Serializes to a tileset document with sockets expanded into rules.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("tileset document serializes")
    }
}

/// Checked lookup of `allowed(a, dir, b)`.
pub fn compatible(rs: &Ruleset, a: TileId, dir: Direction, b: TileId) -> Result<bool> {
    if a >= rs.len() {
        return Err(Error::UnknownTile(a));
    }
    if b >= rs.len() {
        return Err(Error::UnknownTile(b));
    }
    if dir.axis() >= rs.rank() {
        return Err(Error::BadDirection(dir.name()));
    }
    Ok(rs.allowed(a, dir, b))
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TilesetDoc {
    pub version: u32,
    pub rank: usize,
    pub tiles: Vec<TileDoc>,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub socket_compat: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub void_tile: Option<TileId>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TileDoc {
    pub id: TileId,
    pub name: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sockets: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub a: TileId,
    pub dir: String,
    pub b: TileId,
}

impl TilesetDoc {
    pub fn into_ruleset(self) -> Result<Ruleset> {
        if self.version != TILESET_VERSION {
            return Err(Error::MalformedDocument(format!(
                "unsupported version {}",
                self.version
            )));
        }
        let rank = self.rank;
        if !(2..=3).contains(&rank) {
            return Err(Error::MalformedDocument(format!(
                "rank must be 2 or 3, got {rank}"
            )));
        }
        let mut docs = self.tiles;
        docs.sort_by_key(|t| t.id);
        let mut tiles = Vec::with_capacity(docs.len());
        for (i, t) in docs.into_iter().enumerate() {
            if t.id != i {
                return Err(Error::MalformedDocument(format!(
                    "tile ids must be unique and dense from 0; id {} at position {i}",
                    t.id
                )));
            }
            let sockets = match t.sockets {
                None => None,
                Some(map) => {
                    let mut labels = vec![None; 2 * rank];
                    for (name, label) in map {
                        let dir = Direction::parse(&name, rank)?;
                        labels[dir.index()] = Some(label);
                    }
                    let labels: Option<Vec<String>> = labels.into_iter().collect();
                    Some(labels.ok_or_else(|| {
                        Error::MalformedDocument(format!(
                            "tile {i} must give a socket for each of the {} directions",
                            2 * rank
                        ))
                    })?)
                }
            };
            tiles.push(Tile {
                id: t.id,
                name: t.name,
                weight: t.weight,
                sockets,
            });
        }

        let mut rules = Vec::with_capacity(self.rules.len());
        for r in &self.rules {
            rules.push((r.a, Direction::parse(&r.dir, rank)?, r.b));
        }

        let compat: BTreeSet<(&str, &str)> = self
            .socket_compat
            .iter()
            .flat_map(|(l, r)| [(l.as_str(), r.as_str()), (r.as_str(), l.as_str())])
            .collect();
        for a in &tiles {
            let Some(sa) = &a.sockets else { continue };
            for b in &tiles {
                let Some(sb) = &b.sockets else { continue };
                for dir in Direction::all(rank) {
                    let face_a = sa[dir.index()].as_str();
                    let face_b = sb[dir.opposite().index()].as_str();
                    if compat.contains(&(face_a, face_b)) {
                        rules.push((a.id, dir, b.id));
                    }
                }
            }
        }

        Ruleset::new(rank, tiles, rules, self.void_tile)
    }
}

/// Parses a JSON tileset document.
pub fn load_tileset(text: &str) -> Result<Ruleset> {
    let doc: TilesetDoc =
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    doc.into_ruleset()
}

// ---------------------------------------------------------------------------
// Diagnostics

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// The tile has no compatible neighbour in this direction.
    DeadEnd(TileId, Direction),
    /// The tile takes part in no rule at all.
    UnreachableTile(TileId),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DeadEnd(t, d) => write!(f, "tile {t} has no compatible neighbour at {d}"),
            Diagnostic::UnreachableTile(t) => write!(f, "tile {t} appears in no rule"),
        }
    }
}

pub fn validate_ruleset(rs: &Ruleset) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for t in 0..rs.len() {
        let mut any = false;
        for dir in Direction::all(rs.rank()) {
            if rs.support(t, dir).is_empty() {
                out.push(Diagnostic::DeadEnd(t, dir));
            } else {
                any = true;
            }
        }
        if !any {
            out.push(Diagnostic::UnreachableTile(t));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exemplar extraction

/// A dense lattice of tile ids, `x` varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub cells: Vec<usize>,
}

impl Grid {
    /// Builds a 2D grid from rows indexed `rows[y][x]`.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::MalformedDocument("ragged sample rows".into()));
        }
        Ok(Grid {
            dims: vec![w, h],
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    /// Parses whitespace-separated ids, one row per line, top row first
    /// (the highest `y`), matching the text renderer's orientation.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::MalformedDocument(format!("bad tile id {tok:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        rows.reverse();
        Grid::from_rows(&rows)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Builds a ruleset from every adjacent pair occurring in `sample`.
///
/// Distinct ids are renumbered densely in ascending order and named by their
/// original id; each weight is the id's occurrence count.
pub fn extract_rules(sample: &Grid, rank: usize) -> Result<Ruleset> {
    if sample.is_empty() || sample.dims.contains(&0) {
        return Err(Error::EmptySample);
    }
    if sample.dims.len() > rank || !(2..=3).contains(&rank) {
        return Err(Error::MalformedDocument(format!(
            "sample of rank {} cannot yield a rank-{rank} ruleset",
            sample.dims.len()
        )));
    }
    if sample.dims.iter().product::<usize>() != sample.cells.len() {
        return Err(Error::MalformedDocument("sample dims do not match cell count".into()));
    }

    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &sample.cells {
        *counts.entry(c).or_default() += 1;
    }
    if counts.len() > MAX_TILES {
        return Err(Error::TooManyTiles(counts.len()));
    }
    let dense: BTreeMap<usize, TileId> = counts.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    let tiles = counts
        .iter()
        .map(|(&orig, &n)| Tile {
            id: dense[&orig],
            name: orig.to_string(),
            weight: n as f64,
            sockets: None,
        })
        .collect();

    let mut rules = Vec::new();
    let dims = &sample.dims;
    let mut stride = 1;
    for (axis, &extent) in dims.iter().enumerate() {
        let dir = Direction::new(axis, true);
        for (i, &cell) in sample.cells.iter().enumerate() {
            let coord = (i / stride) % extent;
            if coord + 1 < extent {
                rules.push((dense[&cell], dir, dense[&sample.cells[i + stride]]));
            }
        }
        stride *= extent;
    }
    Ruleset::new(rank, tiles, rules, None)
}
