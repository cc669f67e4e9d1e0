//! Indirection microbenchmarks: mass-assembly-shaped gather/scatter loops
//! whose cost is dominated by the cell map's memory access pattern, so
//! their timings expose the effect of mesh numbering on locality.
//!
//! Each kernel gathers a cell's DoF values, sums them with a constant cell
//! weight, and scatter-adds the contribution back — the indirection
//! pattern of assembling a mass operator, with the flop content stripped
//! away. Results are exact for integer-valued inputs, so correctness
//! across orderings can be asserted while timings are only reported. The
//! first repetition runs untimed as warm-up.

use std::time::Instant;

use crate::error::{MeshError, Result};
use crate::layout::{CellMap, FacetMaps};

const CELL_WEIGHT: f64 = 1.0;

fn gather_scatter(row: &[usize], data: &[f64], out: &mut [f64]) {
    let sum: f64 = row.iter().map(|&d| data[d]).sum();
    let contribution = sum * CELL_WEIGHT;
    for &d in row {
        out[d] += contribution;
    }
}

fn check_map(map: &CellMap, data: &[f64]) -> Result<()> {
    if let Some(&d) = map.entries.iter().find(|&&d| d >= data.len()) {
        return Err(MeshError::Integrity(format!(
            "cell map references DoF {d}, data has {}",
            data.len()
        )));
    }
    Ok(())
}

/// Runs `repeats` timed sweeps over all cells in map order, gathering each
/// cell's DoF values and scatter-adding their weighted sum. Returns the
/// accumulated array and the wall time of the timed sweeps.
///
/// # Errors
///
/// [`MeshError::Argument`] when `repeats` is zero;
/// [`MeshError::Integrity`] when the map indexes outside `data`.
pub fn bench_cell_loop(map: &CellMap, data: &[f64], repeats: usize) -> Result<(Vec<f64>, f64)> {
    if repeats < 1 {
        return Err(MeshError::Argument("repeats must be at least 1".into()));
    }
    check_map(map, data)?;
    let mut result = vec![0.0; data.len()];
    // Warm-up sweep: touches every cache line the timed loop will.
    for cell in 0..map.num_cells() {
        gather_scatter(map.row(cell), data, &mut result);
    }
    result.fill(0.0);
    let start = Instant::now();
    for _ in 0..repeats {
        for cell in 0..map.num_cells() {
            gather_scatter(map.row(cell), data, &mut result);
        }
    }
    Ok((result, start.elapsed().as_secs_f64()))
}

/// As [`bench_cell_loop`], but sweeping interior facets: each visit
/// gathers the '+' side cell's DoFs (the first cell in the facet's
/// support) and scatter-adds their weighted sum.
///
/// # Errors
///
/// [`MeshError::Argument`] when `repeats` is zero or there are no interior
/// facets; [`MeshError::Integrity`] when a facet's cell is missing from
/// the map or the map indexes outside `data`.
pub fn bench_facet_loop(
    facets: &FacetMaps,
    map: &CellMap,
    data: &[f64],
    repeats: usize,
) -> Result<(Vec<f64>, f64)> {
    if repeats < 1 {
        return Err(MeshError::Argument("repeats must be at least 1".into()));
    }
    if facets.interior.is_empty() {
        return Err(MeshError::Argument(
            "facet loop needs at least one interior facet".into(),
        ));
    }
    check_map(map, data)?;
    // Resolve each facet's '+' cell to its map row up front.
    let mut plus_rows = Vec::with_capacity(facets.interior.len());
    for &(facet, sides) in &facets.interior {
        let (plus_cell, _) = sides[0];
        let row = map
            .cells
            .iter()
            .position(|&c| c == plus_cell)
            .ok_or_else(|| {
                MeshError::Integrity(format!(
                    "facet {facet} names cell {plus_cell}, which is not in the cell map"
                ))
            })?;
        plus_rows.push(row);
    }
    let mut result = vec![0.0; data.len()];
    for &row in &plus_rows {
        gather_scatter(map.row(row), data, &mut result);
    }
    result.fill(0.0);
    let start = Instant::now();
    for _ in 0..repeats {
        for &row in &plus_rows {
            gather_scatter(map.row(row), data, &mut result);
        }
    }
    Ok((result, start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribute::{distribute, mark_entity_classes, LocalMesh};
    use crate::layout::{cell_node_map, create_section, facet_maps, lagrange_dof_layout, Section};
    use crate::mesh::unit_square_mesh;
    use crate::ordering::{compact_class_permutation, rcm_ordering, Permutation};
    use crate::partition::partition;

    fn single_rank(nx: usize, ny: usize) -> LocalMesh {
        let mesh = unit_square_mesh(nx, ny).unwrap();
        let part = partition(&mesh, 1).unwrap();
        let mut ranks = distribute(&mesh, &part, 1).unwrap();
        let (mut local, sf) = ranks.remove(0);
        mark_entity_classes(&mut local, &sf).unwrap();
        local
    }

    fn p1_map(local: &LocalMesh, perm: &Permutation) -> (Section, CellMap) {
        let layout = lagrange_dof_layout(2, 1).unwrap();
        let section = create_section(local, perm, &layout).unwrap();
        let map = cell_node_map(local, &section, &layout).unwrap();
        (section, map)
    }

    #[test]
    fn single_cell_accumulates_the_row_sum() {
        let map = CellMap {
            arity: 3,
            cells: vec![0],
            entries: vec![0, 1, 2],
        };
        let (result, _) = bench_cell_loop(&map, &[1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(result, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn zero_repeats_is_an_error() {
        let map = CellMap {
            arity: 1,
            cells: vec![0],
            entries: vec![0],
        };
        assert!(matches!(
            bench_cell_loop(&map, &[1.0], 0),
            Err(MeshError::Argument(_))
        ));
    }

    #[test]
    fn results_are_ordering_invariant_on_integers() {
        let local = single_rank(4, 4);
        let identity = Permutation::identity(local.chart_size());
        let rcm = compact_class_permutation(&local, &rcm_ordering(local.plex()).unwrap()).unwrap();
        let (s_nat, m_nat) = p1_map(&local, &identity);
        let (s_rcm, m_rcm) = p1_map(&local, &rcm);
        // Integer-valued data keyed to the mesh point, not the DoF index.
        let mut d_nat = vec![0.0; s_nat.total_size];
        let mut d_rcm = vec![0.0; s_rcm.total_size];
        for p in 0..local.chart_size() {
            for (a, b) in s_nat.range(p).zip(s_rcm.range(p)) {
                let v = (p % 7) as f64 + 1.0;
                d_nat[a] = v;
                d_rcm[b] = v;
            }
        }
        let (r_nat, _) = bench_cell_loop(&m_nat, &d_nat, 3).unwrap();
        let (r_rcm, _) = bench_cell_loop(&m_rcm, &d_rcm, 3).unwrap();
        for p in 0..local.chart_size() {
            for (a, b) in s_nat.range(p).zip(s_rcm.range(p)) {
                assert_eq!(r_nat[a], r_rcm[b]);
            }
        }
        // Same invariance for the facet loop.
        let f_nat = facet_maps(&local, &s_nat).unwrap();
        let f_rcm = facet_maps(&local, &s_rcm).unwrap();
        let (r_nat, _) = bench_facet_loop(&f_nat, &m_nat, &d_nat, 2).unwrap();
        let (r_rcm, _) = bench_facet_loop(&f_rcm, &m_rcm, &d_rcm, 2).unwrap();
        for p in 0..local.chart_size() {
            for (a, b) in s_nat.range(p).zip(s_rcm.range(p)) {
                assert_eq!(r_nat[a], r_rcm[b]);
            }
        }
    }

    #[test]
    fn facet_loop_visits_each_interior_facet_once() {
        let local = single_rank(1, 1);
        let identity = Permutation::identity(local.chart_size());
        let (section, map) = p1_map(&local, &identity);
        let facets = facet_maps(&local, &section).unwrap();
        assert_eq!(facets.interior.len(), 1);
        let data = vec![1.0; section.total_size];
        let (result, _) = bench_facet_loop(&facets, &map, &data, 1).unwrap();
        // One visit of the '+' cell: its 3 DoFs each gain 3.
        assert_eq!(result.iter().filter(|&&v| v == 3.0).count(), 3);
        assert_eq!(result.iter().filter(|&&v| v == 0.0).count(), 1);
    }

    #[test]
    fn repeats_scale_the_result_linearly() {
        let local = single_rank(2, 2);
        let identity = Permutation::identity(local.chart_size());
        let (section, map) = p1_map(&local, &identity);
        let data = vec![1.0; section.total_size];
        let (once, _) = bench_cell_loop(&map, &data, 1).unwrap();
        let (thrice, _) = bench_cell_loop(&map, &data, 3).unwrap();
        for (a, b) in once.iter().zip(&thrice) {
            assert_eq!(*b, 3.0 * *a);
        }
    }
}
