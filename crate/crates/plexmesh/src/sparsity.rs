//! Sparsity patterns, ordering metrics, and matrix portraits.
//!
//! [`build_sparsity`] predicts the nonzero structure of an operator
//! assembled from cell integrals: every ordered pair of DoFs sharing a cell
//! is a nonzero. [`metrics`] reduces a pattern to the numbers the
//! reordering experiments compare (bandwidth, profile, nonzero count), and
//! [`write_portrait`] renders the pattern as a binary PBM image — or a PGM
//! with grey rank-boundary lines — downsampling by max-pooling when the
//! matrix outgrows one pixel per DoF.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{MeshError, Result};
use crate::layout::CellMap;

/// Largest portrait rendered at one pixel per DoF.
const PORTRAIT_FULL_RES: usize = 10_000;
/// Grey level of rank-boundary lines in PGM portraits.
const BOUNDARY_GREY: u8 = 128;

/// CSR index structure of a symmetric nonzero pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    /// Matrix dimension.
    pub n: usize,
    /// Row prefix array, length `n + 1`.
    pub row_starts: Vec<usize>,
    /// Column indices, sorted and unique within each row.
    pub col_indices: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from (row, column) pairs, deduplicating and
    /// sorting each row.
    ///
    /// # Errors
    ///
    /// [`MeshError::Integrity`] when an index reaches `n` or beyond.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, c) in pairs {
            if r >= n || c >= n {
                return Err(MeshError::Integrity(format!(
                    "pattern entry ({r},{c}) exceeds dimension {n}"
                )));
            }
            rows[r].push(c);
        }
        let mut row_starts = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        row_starts.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_indices.extend_from_slice(row);
            row_starts.push(col_indices.len());
        }
        Ok(SparsityPattern {
            n,
            row_starts,
            col_indices,
        })
    }

    /// The sorted column indices of row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_starts[i]..self.row_starts[i + 1]]
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }
}

/// Ordering-quality metrics of a pattern, plus any benchmark timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// max |i − j| over nonzeros.
    pub bandwidth: usize,
    /// Σ over rows of the distance from the diagonal to the leftmost
    /// nonzero.
    pub profile: usize,
    pub nnz: usize,
    /// Wall-clock seconds per named loop variant.
    pub timings: BTreeMap<String, f64>,
}

/// Accumulates the union of all-pairs couplings over every rank's cell
/// map, with local DoFs translated through the global numbering.
///
/// # Errors
///
/// [`MeshError::Integrity`] when a map entry misses its rank's numbering
/// or a global index reaches `n`.
pub fn build_sparsity(
    maps: &[CellMap],
    global_num: &[Vec<usize>],
    n: usize,
) -> Result<SparsityPattern> {
    if maps.len() != global_num.len() {
        return Err(MeshError::Integrity(
            "one cell map and one numbering per rank are required".into(),
        ));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut global_row: Vec<usize> = Vec::new();
    for (map, gnum) in maps.iter().zip(global_num) {
        for cell in 0..map.num_cells() {
            global_row.clear();
            for &local in map.row(cell) {
                let g = *gnum.get(local).ok_or_else(|| {
                    MeshError::Integrity(format!(
                        "cell map references DoF {local} outside the rank's numbering"
                    ))
                })?;
                global_row.push(g);
            }
            for &r in &global_row {
                for &c in &global_row {
                    pairs.push((r, c));
                }
            }
        }
    }
    SparsityPattern::from_pairs(n, pairs)
}

/// Computes bandwidth, profile, and nonzero count.
pub fn metrics(pattern: &SparsityPattern) -> OrderingReport {
    let mut bandwidth = 0usize;
    let mut profile = 0usize;
    for i in 0..pattern.n {
        let row = pattern.row(i);
        if let Some(&min) = row.first() {
            profile += i.saturating_sub(min);
        }
        for &j in row {
            bandwidth = bandwidth.max(i.abs_diff(j));
        }
    }
    OrderingReport {
        bandwidth,
        profile,
        nnz: pattern.nnz(),
        timings: BTreeMap::new(),
    }
}

/// Rasterizes the pattern: black = nonzero, one pixel per DoF up to
/// 10000×10000, max-pooled above that. Returns (pixels, side length,
/// pooling factor) with pixels in row-major order.
fn rasterize(pattern: &SparsityPattern) -> (Vec<bool>, usize, usize) {
    let factor = pattern.n.div_ceil(PORTRAIT_FULL_RES).max(1);
    let side = pattern.n.div_ceil(factor);
    let mut black = vec![false; side * side];
    for i in 0..pattern.n {
        for &j in pattern.row(i) {
            black[(i / factor) * side + j / factor] = true;
        }
    }
    (black, side, factor)
}

/// Writes the pattern as a portable bitmap. Without `rank_bounds` the
/// output is binary PBM (P4, black = nonzero); with it, a PGM (P5) with a
/// grey line at each rank boundary (a DoF index where a new rank's block
/// starts).
///
/// # Errors
///
/// [`MeshError::Io`] on sink failure.
pub fn write_portrait(
    pattern: &SparsityPattern,
    sink: &mut impl Write,
    rank_bounds: Option<&[usize]>,
) -> Result<()> {
    let (black, side, factor) = rasterize(pattern);
    match rank_bounds {
        None => {
            write!(sink, "P4\n{side} {side}\n")?;
            let stride = side.div_ceil(8);
            let mut row_bytes = vec![0u8; stride];
            for i in 0..side {
                row_bytes.fill(0);
                for j in 0..side {
                    if black[i * side + j] {
                        row_bytes[j / 8] |= 0x80 >> (j % 8);
                    }
                }
                sink.write_all(&row_bytes)?;
            }
        }
        Some(bounds) => {
            write!(sink, "P5\n{side} {side}\n255\n")?;
            let mut pixels: Vec<u8> = black
                .iter()
                .map(|&b| if b { 0 } else { 255 })
                .collect();
            for &b in bounds {
                if b == 0 || b >= pattern.n {
                    continue;
                }
                let line = b / factor;
                for t in 0..side {
                    for idx in [line * side + t, t * side + line] {
                        if pixels[idx] == 255 {
                            pixels[idx] = BOUNDARY_GREY;
                        }
                    }
                }
            }
            sink.write_all(&pixels)?;
        }
    }
    sink.flush()?;
    Ok(())
}
