//! Scores hand-built structures with the coverage and stability objectives.

use std::sync::Arc;

use latticeforge::builtin;
use latticeforge::env::{coverage, stability_proxy, terminal_metrics, RewardSpec};
use latticeforge::export::render_ascii;
use latticeforge::solver::{Canvas, Consistency};

/// Rows from the top; `#` is floor, `|` column, `.` empty.
fn canvas(rows: &[&str]) -> Canvas {
    let rules = Arc::new(builtin::ruleset("floor").expect("built-in"));
    let (w, h) = (rows[0].len(), rows.len());
    let mut cells = vec![None; w * h];
    for (r, row) in rows.iter().enumerate() {
        let y = h - 1 - r;
        for (x, ch) in row.chars().enumerate() {
            cells[x + w * y] = match ch {
                '#' => Some(0),
                '|' => Some(1),
                _ => None,
            };
        }
    }
    Canvas::from_cells(&[w, h], rules, &cells, Consistency::Local).expect("compatible layout")
}

fn main() {
    let spec = RewardSpec {
        coverage_weight: 0.5,
        stability_weight: 0.5,
        ..RewardSpec::default()
    };
    let cases = [
        ("column", vec!["|...", "|...", "|...", "#..."]),
        ("overhang", vec!["....", "....", "##..", "#..."]),
        ("bridge", vec!["####", "|..|", "|..|", "#..#"]),
        ("floating", vec!["....", ".##.", "....", "...."]),
        ("slab", vec!["####", "####", "####", "####"]),
    ];
    for (name, rows) in cases {
        let cv = canvas(&rows);
        let s = stability_proxy(&cv);
        let m = terminal_metrics(&cv, &spec);
        println!("{name}:\n{}", render_ascii(&cv).unwrap());
        println!(
            "  coverage {:.3}  max displacement {}  stability {:.3}  reward {:.3}\n",
            coverage(&cv),
            s.max_displacement,
            s.score,
            spec.score(&m, cv.status())
        );
    }
}
