//! Frontier-driven constraint solving over a rectangular lattice.
//!
//! A [`Canvas`] starts from a single seeded tile and grows outward: open
//! cells next to a decided (non-void) tile form the frontier, each frontier
//! cell's entropy is the number of tiles it can still take, and the most
//! constrained frontier cell is decided next. There is no backtracking; an
//! empty frontier domain ends the assembly as [`Status::Invalid`].

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tileset::{Direction, Ruleset, TileId, TileMask};

/// Flat cell index; `x` varies fastest.
pub type CellIndex = usize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consistency {
    /// Frontier domains only reflect decided neighbours.
    #[default]
    Local,
    /// Open domains are kept arc-consistent with each other.
    Propagate,
}

impl std::str::FromStr for Consistency {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "local" => Ok(Consistency::Local),
            "propagate" => Ok(Consistency::Propagate),
            other => Err(format!("unknown consistency mode {other:?}")),
        }
    }
}

/// Where the first tile goes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSpec {
    /// Cell `dims[i] / 2` on every axis, tile sampled by weight.
    #[default]
    Center,
    Cell(Vec<usize>),
    CellTile(Vec<usize>, TileId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellState {
    Decided(TileId),
    Open(TileMask),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    Invalid,
    InProgress,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlacementOutcome {
    /// A frontier domain became empty.
    pub contradiction: bool,
    /// Open cells whose domain shrank, in the order they were narrowed.
    pub changed_cells: Vec<CellIndex>,
}

/// The partial assembly.
#[derive(Clone, Debug, PartialEq)]
pub struct Canvas {
    rules: Arc<Ruleset>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    cells: Vec<CellState>,
    /// Frontier cell → cached entropy.
    frontier: BTreeMap<CellIndex, usize>,
    mode: Consistency,
    decided: usize,
    non_void: usize,
}

fn check_dims(dims: &[usize], rank: usize) -> Result<()> {
    if dims.len() != rank {
        return Err(Error::BadDims(format!(
            "{} extents given for a rank-{rank} ruleset",
            dims.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::BadDims(format!("zero extent in {dims:?}")));
    }
    Ok(())
}

impl Canvas {
    fn blank(dims: &[usize], rules: Arc<Ruleset>, mode: Consistency) -> Result<Self> {
        check_dims(dims, rules.rank())?;
        let mut strides = Vec::with_capacity(dims.len());
        let mut s = 1;
        for &d in dims {
            strides.push(s);
            s *= d;
        }
        let full = rules.all_tiles();
        Ok(Canvas {
            dims: dims.to_vec(),
            strides,
            cells: vec![CellState::Open(full); s],
            frontier: BTreeMap::new(),
            mode,
            decided: 0,
            non_void: 0,
            rules,
        })
    }

    /// Seeds a fresh canvas with one decided cell.
    pub fn new<R: Rng + ?Sized>(
        dims: &[usize],
        rules: Arc<Ruleset>,
        seed: &SeedSpec,
        mode: Consistency,
        rng: &mut R,
    ) -> Result<Self> {
        let mut canvas = Canvas::blank(dims, rules, mode)?;
        let (coords, tile) = match seed {
            SeedSpec::Center => (dims.iter().map(|d| d / 2).collect(), None),
            SeedSpec::Cell(c) => (c.clone(), None),
            SeedSpec::CellTile(c, t) => (c.clone(), Some(*t)),
        };
        let cell = canvas.index_of(&coords)?;
        let tile = match tile {
            Some(t) => {
                canvas.rules.tile(t)?;
                if canvas.rules.is_void(t) {
                    return Err(Error::InvalidSeedTile(t));
                }
                t
            }
            None => sample_seed_tile(&canvas.rules, rng)?,
        };

        if mode == Consistency::Propagate {
            // Full tile sets need not be arc-consistent near the boundary.
            let all: Vec<CellIndex> = (0..canvas.cells.len()).collect();
            canvas.propagate(all, &mut Vec::new());
        }
        let outcome_cells = canvas.decide(cell, tile);
        if mode == Consistency::Propagate {
            let mut changed = Vec::new();
            canvas.propagate(outcome_cells, &mut changed);
        }
        canvas.refresh_frontier();
        Ok(canvas)
    }

    /// Rebuilds a canvas from decided cells (`None` = undecided).
    ///
    /// Fails if two decided neighbours are incompatible.
    pub fn from_cells(
        dims: &[usize],
        rules: Arc<Ruleset>,
        cells: &[Option<TileId>],
        mode: Consistency,
    ) -> Result<Self> {
        let mut canvas = Canvas::blank(dims, rules, mode)?;
        if cells.len() != canvas.cells.len() {
            return Err(Error::DimensionMismatch {
                expected: canvas.cells.len(),
                got: cells.len(),
            });
        }
        let mut touched = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            if let Some(t) = *c {
                canvas.rules.tile(t)?;
                touched.extend(canvas.decide(i, t));
            }
        }
        if let Some((a, b)) = canvas.first_conflict() {
            return Err(Error::MalformedDocument(format!(
                "incompatible neighbours at {:?} and {:?}",
                canvas.coords(a),
                canvas.coords(b)
            )));
        }
        if mode == Consistency::Propagate {
            let all: Vec<CellIndex> = (0..canvas.cells.len()).collect();
            canvas.propagate(all, &mut Vec::new());
        }
        canvas.refresh_frontier();
        Ok(canvas)
    }

    pub fn ruleset(&self) -> &Arc<Ruleset> {
        &self.rules
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn mode(&self) -> Consistency {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, cell: CellIndex) -> CellState {
        self.cells[cell]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn tile_at(&self, cell: CellIndex) -> Option<TileId> {
        match self.cells[cell] {
            CellState::Decided(t) => Some(t),
            CellState::Open(_) => None,
        }
    }

    pub fn decided_count(&self) -> usize {
        self.decided
    }

    /// Decided cells holding a structural (non-void) tile.
    pub fn non_void_count(&self) -> usize {
        self.non_void
    }

    /// Frontier cells with their cached entropy, in index order.
    pub fn frontier(&self) -> impl Iterator<Item = (CellIndex, usize)> + '_ {
        self.frontier.iter().map(|(&c, &e)| (c, e))
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn is_frontier(&self, cell: CellIndex) -> bool {
        self.frontier.contains_key(&cell)
    }

    pub fn index_of(&self, coords: &[usize]) -> Result<CellIndex> {
        if coords.len() != self.dims.len() || coords.iter().zip(&self.dims).any(|(c, d)| c >= d) {
            return Err(Error::OutOfBounds(coords.to_vec()));
        }
        Ok(coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    pub fn coords(&self, cell: CellIndex) -> Vec<usize> {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| (cell / s) % d)
            .collect()
    }

    /// Neighbour of `cell` one step along `dir`, if inside the canvas.
    #[inline]
    pub fn neighbor(&self, cell: CellIndex, dir: Direction) -> Option<CellIndex> {
        let axis = dir.axis();
        let stride = self.strides[axis];
        let c = (cell / stride) % self.dims[axis];
        if dir.is_positive() {
            (c + 1 < self.dims[axis]).then(|| cell + stride)
        } else {
            (c > 0).then(|| cell - stride)
        }
    }

    fn directions(&self) -> impl Iterator<Item = Direction> {
        Direction::all(self.dims.len())
    }

    /// Candidate tiles for an open cell.
    ///
    /// In local mode these are the tiles compatible with every decided
    /// neighbour; in propagate mode the cell's arc-consistent domain.
    pub fn valid_tiles(&self, cell: CellIndex) -> Result<TileMask> {
        match self.cells.get(cell) {
            Some(CellState::Open(m)) => Ok(*m),
            Some(CellState::Decided(_)) => Err(Error::CellDecided(self.coords(cell))),
            None => Err(Error::OutOfBounds(vec![cell])),
        }
    }

    /// Number of candidate tiles; zero marks a contradiction.
    pub fn entropy(&self, cell: CellIndex) -> Result<usize> {
        self.valid_tiles(cell).map(TileMask::count)
    }

    /// Picks a minimum-entropy frontier cell, breaking ties uniformly.
    pub fn select_node<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CellIndex> {
        let min = self.frontier.values().copied().min().ok_or(Error::NoFrontier)?;
        let ties: Vec<CellIndex> = self
            .frontier
            .iter()
            .filter(|&(_, &e)| e == min)
            .map(|(&c, _)| c)
            .collect();
        let pick = if ties.len() == 1 {
            0
        } else {
            rng.random_range(0..ties.len())
        };
        Ok(ties[pick])
    }

    /// Decides `tile` at frontier cell `cell` and updates domains.
    pub fn place(&mut self, cell: CellIndex, tile: TileId) -> Result<PlacementOutcome> {
        let domain = self.valid_tiles(cell)?;
        if !self.frontier.contains_key(&cell) || !domain.contains(tile) {
            return Err(Error::InvalidPlacement {
                cell: self.coords(cell),
                tile,
            });
        }
        let mut changed = self.decide(cell, tile);
        if self.mode == Consistency::Propagate {
            let seeds = changed.clone();
            self.propagate(seeds, &mut changed);
        }
        changed.sort_unstable();
        changed.dedup();
        self.refresh_frontier();
        Ok(PlacementOutcome {
            contradiction: self.frontier.values().any(|&e| e == 0),
            changed_cells: changed,
        })
    }

    pub fn status(&self) -> Status {
        if self.frontier.values().any(|&e| e == 0) {
            Status::Invalid
        } else if self.frontier.is_empty() {
            Status::Complete
        } else {
            Status::InProgress
        }
    }

    /// Marks `cell` decided and narrows its open neighbours. Returns the
    /// neighbours whose domain shrank. Frontier entropies are not refreshed.
    fn decide(&mut self, cell: CellIndex, tile: TileId) -> Vec<CellIndex> {
        self.cells[cell] = CellState::Decided(tile);
        self.frontier.remove(&cell);
        self.decided += 1;
        let structural = !self.rules.is_void(tile);
        if structural {
            self.non_void += 1;
        }
        let mut changed = Vec::new();
        for dir in self.directions() {
            let Some(n) = self.neighbor(cell, dir) else { continue };
            if let CellState::Open(m) = self.cells[n] {
                let narrowed = m & self.rules.support(tile, dir);
                if narrowed != m {
                    self.cells[n] = CellState::Open(narrowed);
                    changed.push(n);
                }
                if structural {
                    self.frontier.insert(n, 0);
                }
            }
        }
        changed
    }

    /// AC-3 style worklist: every cell in the queue has a domain that may
    /// have shrunk, so its open neighbours are revised against it.
    fn propagate(&mut self, start: Vec<CellIndex>, changed: &mut Vec<CellIndex>) {
        let mut queued = vec![false; self.cells.len()];
        let mut queue = VecDeque::with_capacity(start.len());
        for c in start {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            let source = match self.cells[c] {
                CellState::Decided(t) => TileMask::single(t),
                CellState::Open(m) => m,
            };
            for dir in self.directions() {
                let Some(n) = self.neighbor(c, dir) else { continue };
                let CellState::Open(m) = self.cells[n] else { continue };
                let supported = source
                    .iter()
                    .fold(TileMask::EMPTY, |acc, a| acc | self.rules.support(a, dir));
                let narrowed = m & supported;
                if narrowed != m {
                    self.cells[n] = CellState::Open(narrowed);
                    changed.push(n);
                    if !queued[n] {
                        queued[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
    }

    /// Recomputes frontier membership and cached entropies.
    fn refresh_frontier(&mut self) {
        let mut frontier = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            let CellState::Decided(t) = *c else { continue };
            if self.rules.is_void(t) {
                continue;
            }
            for dir in Direction::all(self.dims.len()) {
                if let Some(n) = self.neighbor(i, dir) {
                    if let CellState::Open(m) = self.cells[n] {
                        frontier.insert(n, m.count());
                    }
                }
            }
        }
        self.frontier = frontier;
    }

    /// First adjacent decided pair violating the ruleset, if any.
    pub fn first_conflict(&self) -> Option<(CellIndex, CellIndex)> {
        for (i, c) in self.cells.iter().enumerate() {
            let CellState::Decided(a) = *c else { continue };
            for axis in 0..self.dims.len() {
                let dir = Direction::new(axis, true);
                let Some(n) = self.neighbor(i, dir) else { continue };
                if let CellState::Decided(b) = self.cells[n] {
                    if !self.rules.allowed(a, dir, b) {
                        return Some((i, n));
                    }
                }
            }
        }
        None
    }

    /// Whether every pair of adjacent decided cells is compatible.
    pub fn is_sound(&self) -> bool {
        self.first_conflict().is_none()
    }

    /// Decided tiles in cell order, `None` for open cells.
    pub fn assignment(&self) -> Vec<Option<TileId>> {
        (0..self.cells.len()).map(|i| self.tile_at(i)).collect()
    }
}

/// Weight-proportional draw over the structural tiles.
fn sample_seed_tile<R: Rng + ?Sized>(rules: &Ruleset, rng: &mut R) -> Result<TileId> {
    let candidates: Vec<(TileId, f64)> = rules
        .tiles()
        .iter()
        .filter(|t| !rules.is_void(t.id))
        .map(|t| (t.id, t.weight))
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidSeedTile(rules.void_tile().unwrap_or(0)));
    }
    let total: f64 = candidates.iter().map(|c| c.1).sum();
    let mut u = rng.random::<f64>() * total;
    for &(t, w) in &candidates {
        if u < w {
            return Ok(t);
        }
        u -= w;
    }
    Ok(candidates[candidates.len() - 1].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tileset::{load_tileset, Tile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PX: Direction = Direction::from_index(0);
    const PY: Direction = Direction::from_index(2);

    fn tiles(names: &[&str]) -> Vec<Tile> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| Tile {
                id: i,
                name: n.to_string(),
                weight: 1.0,
                sockets: None,
            })
            .collect()
    }

    fn checkerboard() -> Arc<Ruleset> {
        Arc::new(
            Ruleset::new(
                2,
                tiles(&["A", "B"]),
                [(0, PX, 1), (1, PX, 0), (0, PY, 1), (1, PY, 0)],
                None,
            )
            .unwrap(),
        )
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn seed_center_checkerboard() {
        let cv = Canvas::new(&[3, 3], checkerboard(), &SeedSpec::Center, Consistency::Local, &mut rng(1))
            .unwrap();
        assert_eq!(cv.decided_count(), 1);
        assert!(cv.tile_at(cv.index_of(&[1, 1]).unwrap()).is_some());
        let frontier: Vec<Vec<usize>> = cv.frontier().map(|(c, _)| cv.coords(c)).collect();
        let mut expect = vec![vec![0, 1], vec![2, 1], vec![1, 0], vec![1, 2]];
        expect.sort_by_key(|c| cv.index_of(c).unwrap());
        assert_eq!(frontier, expect);
        assert!(cv.frontier().all(|(_, e)| e == 1));
        assert_eq!(cv.status(), Status::InProgress);
    }

    #[test]
    fn one_cell_canvas_is_complete() {
        let cv = Canvas::new(&[1, 1], checkerboard(), &SeedSpec::Center, Consistency::Local, &mut rng(0))
            .unwrap();
        assert_eq!(cv.frontier_len(), 0);
        assert_eq!(cv.status(), Status::Complete);
    }

    #[test]
    fn seed_errors() {
        let rs = checkerboard();
        let e = Canvas::new(&[3, 0], rs.clone(), &SeedSpec::Center, Consistency::Local, &mut rng(0));
        assert!(matches!(e, Err(Error::BadDims(_))));
        let e = Canvas::new(&[3, 3, 3], rs.clone(), &SeedSpec::Center, Consistency::Local, &mut rng(0));
        assert!(matches!(e, Err(Error::BadDims(_))));
        let e = Canvas::new(&[3, 3], rs.clone(), &SeedSpec::Cell(vec![3, 0]), Consistency::Local, &mut rng(0));
        assert!(matches!(e, Err(Error::OutOfBounds(_))));
        let cv = Canvas::new(
            &[3, 3],
            rs,
            &SeedSpec::CellTile(vec![0, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        assert_eq!(cv.tile_at(0), Some(0));

        let void = Arc::new(
            Ruleset::new(2, tiles(&["A", "V"]), [(0, PX, 1)], Some(1)).unwrap(),
        );
        let e = Canvas::new(
            &[2, 2],
            void,
            &SeedSpec::CellTile(vec![0, 0], 1),
            Consistency::Local,
            &mut rng(0),
        );
        assert!(matches!(e, Err(Error::InvalidSeedTile(1))));
    }

    #[test]
    fn valid_tiles_local() {
        let rs = checkerboard();
        let cv = Canvas::new(
            &[3, 3],
            rs,
            &SeedSpec::CellTile(vec![0, 1], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        let east = cv.index_of(&[1, 1]).unwrap();
        assert_eq!(cv.valid_tiles(east).unwrap(), TileMask::single(1));
        assert_eq!(cv.entropy(east).unwrap(), 1);
        let seed = cv.index_of(&[0, 1]).unwrap();
        assert!(matches!(cv.valid_tiles(seed), Err(Error::CellDecided(_))));
        assert!(matches!(cv.entropy(seed), Err(Error::CellDecided(_))));

        let branching = Arc::new(
            Ruleset::new(2, tiles(&["A", "B", "C"]), [(0, PX, 1), (0, PX, 2)], None).unwrap(),
        );
        let cv = Canvas::new(
            &[2, 1],
            branching,
            &SeedSpec::CellTile(vec![0, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        assert_eq!(cv.valid_tiles(1).unwrap(), [1, 2].into_iter().collect());
        assert_eq!(cv.entropy(1).unwrap(), 2);
    }

    /// A beside A or B, B never has anything above it.
    fn dead_top() -> Arc<Ruleset> {
        Arc::new(
            Ruleset::new(
                2,
                tiles(&["A", "B"]),
                [(0, PX, 0), (0, PY, 0), (0, PX, 1)],
                None,
            )
            .unwrap(),
        )
    }

    #[test]
    fn propagation_prunes_unsupported_tile() {
        let seed = SeedSpec::CellTile(vec![0, 0], 0);
        let local = Canvas::new(&[2, 2], dead_top(), &seed, Consistency::Local, &mut rng(0)).unwrap();
        let prop =
            Canvas::new(&[2, 2], dead_top(), &seed, Consistency::Propagate, &mut rng(0)).unwrap();
        assert_eq!(local.valid_tiles(1).unwrap(), [0, 1].into_iter().collect());
        assert_eq!(prop.valid_tiles(1).unwrap(), TileMask::single(0));
        assert_eq!(
            prop.valid_tiles(1).unwrap(),
            brute_force_supported(&dead_top(), &[2, 2], &local.assignment(), 1)
        );
    }

    /// Tiles at `cell` that appear in some full completion of `partial`.
    fn brute_force_supported(
        rs: &Ruleset,
        dims: &[usize],
        partial: &[Option<TileId>],
        cell: CellIndex,
    ) -> TileMask {
        let n = partial.len();
        let k = rs.len();
        let mut out = TileMask::EMPTY;
        let mut assign = vec![0; n];
        'outer: for code in 0..k.pow(n as u32) {
            let mut c = code;
            for a in assign.iter_mut() {
                *a = c % k;
                c /= k;
            }
            for (i, p) in partial.iter().enumerate() {
                if p.is_some_and(|t| t != assign[i]) {
                    continue 'outer;
                }
            }
            let cv = Canvas::from_cells(
                dims,
                Arc::new(rs.clone()),
                &assign.iter().map(|&t| Some(t)).collect::<Vec<_>>(),
                Consistency::Local,
            );
            if cv.is_ok() {
                out.insert(assign[cell]);
            }
        }
        out
    }

    /// Number of full completions of `partial`, enumerating only the open cells.
    fn completions(rs: &Arc<Ruleset>, dims: &[usize], partial: &[Option<TileId>]) -> usize {
        let open: Vec<usize> = (0..partial.len()).filter(|&i| partial[i].is_none()).collect();
        let k = rs.len();
        let mut count = 0;
        for code in 0..k.pow(open.len() as u32) {
            let mut full = partial.to_vec();
            let mut c = code;
            for &i in &open {
                full[i] = Some(c % k);
                c /= k;
            }
            count += usize::from(Canvas::from_cells(dims, rs.clone(), &full, Consistency::Local).is_ok());
        }
        count
    }

    #[test]
    fn propagate_reports_contradiction() {
        // Found by seeded search: a 3-colouring where the last placement is
        // legal for its own cell but leaves a neighbour with no colour.
        let rs = Arc::new(load_tileset(include_str!("../tilesets/coloring.json")).unwrap());
        let seed = SeedSpec::CellTile(vec![2, 2], 2);
        let mut cv = Canvas::new(&[4, 4], rs.clone(), &seed, Consistency::Propagate, &mut rng(0)).unwrap();
        let moves: [([usize; 2], TileId); 12] = [
            ([3, 2], 1), ([3, 3], 0), ([2, 3], 1), ([1, 2], 0), ([1, 3], 2), ([0, 3], 0),
            ([0, 2], 1), ([0, 1], 0), ([3, 1], 2), ([0, 0], 1), ([3, 0], 1), ([1, 0], 2),
        ];
        for (i, (at, tile)) in moves.iter().enumerate() {
            let cell = cv.index_of(at).unwrap();
            assert!(cv.valid_tiles(cell).unwrap().contains(*tile));
            let before = cv.assignment();
            let out = cv.place(cell, *tile).unwrap();
            let last = i + 1 == moves.len();
            assert_eq!(out.contradiction, last, "move {i}");
            if last {
                assert!(completions(&rs, &[4, 4], &before) > 0);
                assert_eq!(completions(&rs, &[4, 4], &cv.assignment()), 0);
                assert_eq!(cv.status(), Status::Invalid);
                assert!(cv.frontier().any(|(_, e)| e == 0));
            }
        }
    }

    #[test]
    fn select_node_prefers_min_entropy() {
        // Seed at the left of a 3x1 strip and a 1x3 column to get unequal entropies.
        let rs = Arc::new(
            Ruleset::new(
                2,
                tiles(&["A", "B", "C"]),
                [(0, PX, 1), (0, PX, 2), (0, PY, 1)],
                None,
            )
            .unwrap(),
        );
        let cv = Canvas::new(
            &[2, 2],
            rs,
            &SeedSpec::CellTile(vec![0, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        let up = cv.index_of(&[0, 1]).unwrap();
        let right = cv.index_of(&[1, 0]).unwrap();
        assert_eq!(cv.entropy(right).unwrap(), 2);
        assert_eq!(cv.entropy(up).unwrap(), 1);
        for s in 0..20 {
            assert_eq!(cv.select_node(&mut rng(s)).unwrap(), up);
        }
    }

    #[test]
    fn select_node_ties_are_seeded() {
        let cv = Canvas::new(&[3, 3], checkerboard(), &SeedSpec::Center, Consistency::Local, &mut rng(3))
            .unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for s in 0..64 {
            let a = cv.select_node(&mut rng(s)).unwrap();
            let b = cv.select_node(&mut rng(s)).unwrap();
            assert_eq!(a, b);
            assert!(cv.is_frontier(a));
            seen.insert(a);
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn select_node_empty_frontier() {
        let cv = Canvas::new(&[1, 1], checkerboard(), &SeedSpec::Center, Consistency::Local, &mut rng(0))
            .unwrap();
        assert!(matches!(cv.select_node(&mut rng(0)), Err(Error::NoFrontier)));
    }

    #[test]
    fn place_grows_frontier() {
        let mut cv = Canvas::new(
            &[3, 3],
            checkerboard(),
            &SeedSpec::CellTile(vec![1, 1], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        let target = cv.index_of(&[1, 0]).unwrap();
        let wrong = cv.place(target, 0);
        assert!(matches!(wrong, Err(Error::InvalidPlacement { .. })));
        let out = cv.place(target, 1).unwrap();
        assert!(!out.contradiction);
        assert_eq!(cv.tile_at(target), Some(1));
        assert!(!cv.is_frontier(target));
        assert!(cv.is_frontier(cv.index_of(&[0, 0]).unwrap()));
        assert!(cv.is_frontier(cv.index_of(&[2, 0]).unwrap()));
        assert_eq!(cv.frontier_len(), 5);
        assert!(matches!(cv.place(target, 1), Err(Error::CellDecided(_))));
        // Not on the frontier.
        let mut far = Canvas::new(
            &[5, 5],
            checkerboard(),
            &SeedSpec::CellTile(vec![0, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        let corner = far.index_of(&[4, 4]).unwrap();
        assert!(matches!(far.place(corner, 0), Err(Error::InvalidPlacement { .. })));
    }

    #[test]
    fn void_seals_frontier() {
        let rs = Arc::new(
            Ruleset::new(
                2,
                tiles(&["A", "V"]),
                [(0, PX, 1), (1, PX, 0), (0, PY, 1), (1, PY, 0), (1, PX, 1), (1, PY, 1)],
                Some(1),
            )
            .unwrap(),
        );
        let mut cv = Canvas::new(
            &[3, 1],
            rs,
            &SeedSpec::CellTile(vec![1, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        cv.place(0, 1).unwrap();
        assert_eq!(cv.status(), Status::InProgress);
        cv.place(2, 1).unwrap();
        assert_eq!(cv.status(), Status::Complete);
        assert_eq!(cv.non_void_count(), 1);
    }

    #[test]
    fn invalid_when_frontier_empties() {
        // A needs B to its right, B accepts nothing to its right; 3x1 strip.
        let rs = Arc::new(Ruleset::new(2, tiles(&["A", "B"]), [(0, PX, 1)], None).unwrap());
        let mut cv = Canvas::new(
            &[3, 1],
            rs,
            &SeedSpec::CellTile(vec![0, 0], 0),
            Consistency::Local,
            &mut rng(0),
        )
        .unwrap();
        let out = cv.place(1, 1).unwrap();
        assert!(out.contradiction);
        assert_eq!(cv.entropy(2).unwrap(), 0);
        assert_eq!(cv.status(), Status::Invalid);
    }

    #[test]
    fn status_complete_when_full() {
        let rs = checkerboard();
        let cells: Vec<Option<TileId>> = (0..4).map(|i| Some((i % 2 + i / 2) % 2)).collect();
        let cv = Canvas::from_cells(&[2, 2], rs.clone(), &cells, Consistency::Local).unwrap();
        assert_eq!(cv.status(), Status::Complete);
        let bad = vec![Some(0), Some(0), None, None];
        assert!(Canvas::from_cells(&[2, 2], rs, &bad, Consistency::Local).is_err());
    }

    #[test]
    fn loads_document_canvas() {
        let rs = load_tileset(include_str!("../tilesets/checkerboard.json")).unwrap();
        let cv = Canvas::new(&[4, 4], Arc::new(rs), &SeedSpec::Center, Consistency::Propagate, &mut rng(9))
            .unwrap();
        assert_eq!(cv.index_of(&[2, 2]).unwrap(), 10);
        assert_eq!(cv.coords(10), vec![2, 2]);
    }
}
