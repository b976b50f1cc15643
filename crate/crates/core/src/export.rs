//! Assembly documents and text rendering.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{coverage, stability_proxy};
use crate::error::{Error, Result};
use crate::solver::{Canvas, CellState, Consistency, Status};
use crate::tileset::Ruleset;

pub const ASSEMBLY_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyMetrics {
    pub coverage: f64,
    /// Stability score in `(0, 1]`.
    pub stability: f64,
    pub steps: usize,
}

/// A finished (or interrupted) assembly.
///
/// `cells` is row-major with `x` fastest; `-1` marks an undecided cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyDoc {
    pub version: u32,
    pub rank: usize,
    pub dims: Vec<usize>,
    pub cells: Vec<i64>,
    pub status: Status,
    pub seed: u64,
    pub metrics: AssemblyMetrics,
}

impl AssemblyDoc {
    pub fn from_canvas(canvas: &Canvas, seed: u64, steps: usize) -> Self {
        AssemblyDoc {
            version: ASSEMBLY_VERSION,
            rank: canvas.rank(),
            dims: canvas.dims().to_vec(),
            cells: canvas
                .assignment()
                .iter()
                .map(|c| c.map_or(-1, |t| t as i64))
                .collect(),
            status: canvas.status(),
            seed,
            metrics: AssemblyMetrics {
                coverage: coverage(canvas),
                stability: stability_proxy(canvas).score,
                steps,
            },
        }
    }

    /// Rebuilds the canvas under `rules`.
    pub fn to_canvas(&self, rules: Arc<Ruleset>, mode: Consistency) -> Result<Canvas> {
        if self.version != ASSEMBLY_VERSION {
            return Err(Error::MalformedDocument(format!(
                "unsupported assembly version {}",
                self.version
            )));
        }
        if self.rank != self.dims.len() {
            return Err(Error::MalformedDocument("rank does not match dims".into()));
        }
        let cells = self
            .cells
            .iter()
            .map(|&c| match c {
                -1 => Ok(None),
                c if c >= 0 => Ok(Some(c as usize)),
                c => Err(Error::MalformedDocument(format!("bad cell value {c}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Canvas::from_cells(&self.dims, rules, &cells, mode)
    }

    /// Metrics recomputed from a canvas, keeping this document's step count.
    pub fn recompute_metrics(&self, canvas: &Canvas) -> AssemblyMetrics {
        AssemblyMetrics {
            coverage: coverage(canvas),
            stability: stability_proxy(canvas).score,
            steps: self.metrics.steps,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assembly serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))
    }
}

/// One character per cell: the tile name's initial, `.` for undecided,
/// a space for void. The top line is the highest `y`.
pub fn render_ascii(canvas: &Canvas) -> Result<String> {
    if canvas.rank() != 2 {
        return Err(Error::UnsupportedRank(canvas.rank()));
    }
    let rules = canvas.ruleset();
    let (w, h) = (canvas.dims()[0], canvas.dims()[1]);
    let mut lines = Vec::with_capacity(h);
    for y in (0..h).rev() {
        let line: String = (0..w)
            .map(|x| match canvas.cell(x + w * y) {
                CellState::Open(_) => '.',
                CellState::Decided(t) if rules.is_void(t) => ' ',
                CellState::Decided(t) => rules.tiles()[t].name.chars().next().unwrap_or('?'),
            })
            .collect();
        lines.push(line);
    }
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn render_checkerboard() {
        let rs = Arc::new(builtin::ruleset("checkerboard").unwrap());
        // (0,1) = A is the top-left character.
        let cells = [Some(1), Some(0), Some(0), Some(1)];
        let cv = Canvas::from_cells(&[2, 2], rs, &cells, Consistency::Local).unwrap();
        assert_eq!(render_ascii(&cv).unwrap(), "AB\nBA");
    }

    #[test]
    fn render_undecided_and_void() {
        let rs = Arc::new(builtin::ruleset("checkerboard").unwrap());
        let cv = Canvas::from_cells(&[1, 1], rs, &[None], Consistency::Local).unwrap();
        assert_eq!(render_ascii(&cv).unwrap(), ".");

        let floor = Arc::new(builtin::ruleset("floor").unwrap());
        let cv = Canvas::from_cells(&[3, 1], floor, &[Some(0), Some(2), None], Consistency::Local)
            .unwrap();
        assert_eq!(render_ascii(&cv).unwrap(), "f .");
    }

    #[test]
    fn render_rejects_3d() {
        let rs = Arc::new(builtin::ruleset("blocks3d").unwrap());
        let cv = Canvas::from_cells(&[1, 1, 1], rs, &[None], Consistency::Local).unwrap();
        assert!(matches!(render_ascii(&cv), Err(Error::UnsupportedRank(3))));
    }

    #[test]
    fn document_round_trip() {
        let rs = Arc::new(builtin::ruleset("floor").unwrap());
        let cells = [Some(0), Some(1), Some(2), None, Some(0), None];
        let cv = Canvas::from_cells(&[3, 2], rs.clone(), &cells, Consistency::Local).unwrap();
        let doc = AssemblyDoc::from_canvas(&cv, 7, 4);
        assert_eq!(doc.cells, vec![0, 1, 2, -1, 0, -1]);
        let back = AssemblyDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let cv2 = back.to_canvas(rs, Consistency::Local).unwrap();
        assert_eq!(back.recompute_metrics(&cv2), doc.metrics);
        assert_eq!(cv2.status(), doc.status);
    }
}
