//! Cell orderings and the compact class-segmented point permutation.
//!
//! Three cell orderings feed the permutation builder: `native` (ascending
//! cell id), reverse Cuthill-McKee over the shared-vertex cell graph, and a
//! seeded shuffle used as an honest baseline in bandwidth comparisons. From
//! a cell order, [`compact_class_permutation`] derives the full point
//! permutation by appending inclusive cell closures along the order while
//! keeping the core/non-core/halo blocks separated, so owned data sits in
//! one prefix and non-owned data is stored contiguously at the end.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribute::LocalMesh;
use crate::error::{MeshError, Result};
use crate::plex::{Plex, Point};

/// A bijective renumbering of a plex chart, segmented by entity class.
#[derive(Debug, Clone)]
pub struct Permutation {
    /// Old point id → new position.
    pub new_of_old: Vec<usize>,
    /// End positions of the core, non-core, and halo blocks; the last entry
    /// equals the chart size.
    pub segment_bounds: [usize; 3],
}

impl Permutation {
    /// The identity permutation with everything in the core block.
    pub fn identity(chart_size: usize) -> Permutation {
        Permutation {
            new_of_old: (0..chart_size).collect(),
            segment_bounds: [chart_size, chart_size, chart_size],
        }
    }

    pub fn len(&self) -> usize {
        self.new_of_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_of_old.is_empty()
    }

    /// Inverse mapping: new position → old point id.
    ///
    /// # Errors
    ///
    /// [`MeshError::Argument`] when the permutation is not a bijection.
    pub fn old_of_new(&self) -> Result<Vec<usize>> {
        let n = self.new_of_old.len();
        let mut inv = vec![usize::MAX; n];
        for (old, &new) in self.new_of_old.iter().enumerate() {
            if new >= n || inv[new] != usize::MAX {
                return Err(MeshError::Argument(format!(
                    "permutation is not a bijection at point {old}"
                )));
            }
            inv[new] = old;
        }
        Ok(inv)
    }

    /// Serializes as CSV: three comment lines carrying the segment bounds,
    /// a column header, then one `old_id,new_id` row per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# core_end {}\n", self.segment_bounds[0]));
        out.push_str(&format!("# non_core_end {}\n", self.segment_bounds[1]));
        out.push_str(&format!("# chart {}\n", self.segment_bounds[2]));
        out.push_str("old_id,new_id\n");
        for (old, &new) in self.new_of_old.iter().enumerate() {
            out.push_str(&format!("{old},{new}\n"));
        }
        out
    }
}

fn require_cells(plex: &Plex) -> Result<&[Point]> {
    let cells = plex.cells();
    if cells.is_empty() {
        Err(MeshError::Argument("mesh has no cells".into()))
    } else {
        Ok(cells)
    }
}

/// The generator order: cells by ascending id.
pub fn native_ordering(plex: &Plex) -> Result<Vec<Point>> {
    Ok(require_cells(plex)?.to_vec())
}

/// Cells in a seeded Fisher-Yates shuffle (ChaCha stream, reproducible).
pub fn shuffled_ordering(plex: &Plex, seed: u64) -> Result<Vec<Point>> {
    let mut cells = require_cells(plex)?.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    Ok(cells)
}

/// Shared-vertex adjacency between cells, as indices into `cells`.
fn cell_graph(plex: &Plex, cells: &[Point]) -> Result<Vec<Vec<usize>>> {
    let mut vertex_cells: HashMap<Point, Vec<usize>> = HashMap::new();
    let mut cell_verts: Vec<Vec<Point>> = Vec::with_capacity(cells.len());
    for (ci, &c) in cells.iter().enumerate() {
        let vs: Vec<Point> = plex
            .closure(c, false)?
            .into_iter()
            .filter(|&p| plex.depth(p).expect("in chart") == 0)
            .collect();
        for &v in &vs {
            vertex_cells.entry(v).or_default().push(ci);
        }
        cell_verts.push(vs);
    }
    let mut nbrs: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    for (ci, vs) in cell_verts.iter().enumerate() {
        let mut adj: Vec<usize> = vs
            .iter()
            .flat_map(|v| vertex_cells[v].iter().copied())
            .filter(|&other| other != ci)
            .collect();
        adj.sort_unstable();
        adj.dedup();
        nbrs.push(adj);
    }
    Ok(nbrs)
}

/// BFS from `start`; returns distances (`usize::MAX` = unreachable).
fn bfs(nbrs: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; nbrs.len()];
    let mut queue = std::collections::VecDeque::from([start]);
    dist[start] = 0;
    while let Some(c) = queue.pop_front() {
        for &nb in &nbrs[c] {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[c] + 1;
                queue.push_back(nb);
            }
        }
    }
    dist
}

/// Farthest reachable cell, ties to the lowest index.
fn farthest(dist: &[usize]) -> usize {
    let mut best = usize::MAX;
    for (c, &d) in dist.iter().enumerate() {
        if d == usize::MAX {
            continue;
        }
        if best == usize::MAX || d > dist[best] {
            best = c;
        }
    }
    best
}

/// The Cuthill-McKee cell sequence: per component (ascending minimum cell
/// id), a BFS from a pseudo-peripheral cell found by two farthest-cell
/// sweeps, visiting neighbours in ascending (degree, id) order.
pub fn cuthill_mckee(plex: &Plex) -> Result<Vec<Point>> {
    let cells = require_cells(plex)?;
    let nbrs = cell_graph(plex, cells)?;
    let n = cells.len();
    let mut visited = vec![false; n];
    let mut seq: Vec<usize> = Vec::with_capacity(n);
    for lowest in 0..n {
        if visited[lowest] {
            continue;
        }
        // Two sweeps: farthest from the component's lowest cell, then
        // farthest from that; the second endpoint seeds the BFS.
        let start = farthest(&bfs(&nbrs, farthest(&bfs(&nbrs, lowest))));
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            seq.push(c);
            let mut next: Vec<usize> = nbrs[c].iter().copied().filter(|&nb| !visited[nb]).collect();
            next.sort_by_key(|&nb| (nbrs[nb].len(), nb));
            for nb in next {
                visited[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    Ok(seq.into_iter().map(|ci| cells[ci]).collect())
}

/// Reverse Cuthill-McKee: the reverse of [`cuthill_mckee`].
pub fn rcm_ordering(plex: &Plex) -> Result<Vec<Point>> {
    let mut seq = cuthill_mckee(plex)?;
    seq.reverse();
    Ok(seq)
}

/// Builds the compact class-segmented point permutation from a cell order.
///
/// Walking the cells in the given order, each cell's inclusive closure is
/// appended point by point (ascending point id within the closure): a point
/// not yet placed takes the next free position inside the block of its own
/// entity class. Closure runs are therefore contiguous per block, owned
/// points fill the core and non-core blocks, and every non-owned point lands
/// in the trailing halo block. Points never touched by a cell closure are
/// appended to their class block in ascending id order afterwards.
///
/// # Errors
///
/// [`MeshError::Precondition`] when entity classes are not marked;
/// [`MeshError::Argument`] when `cell_order` is not a permutation of the
/// local cells.
pub fn compact_class_permutation(local: &LocalMesh, cell_order: &[Point]) -> Result<Permutation> {
    let plex = local.plex();
    let chart = plex.chart_size();
    if !local.classes_marked() {
        return Err(MeshError::Precondition(
            "entity classes not marked; run mark_entity_classes first".into(),
        ));
    }
    let cells = plex.cells();
    let mut seen_cell = vec![false; chart];
    if cell_order.len() != cells.len() {
        return Err(MeshError::Argument(format!(
            "cell order lists {} cells, mesh has {}",
            cell_order.len(),
            cells.len()
        )));
    }
    let maxd = plex.max_depth();
    for &c in cell_order {
        if c >= chart || plex.depth(c)? != maxd || seen_cell[c] {
            return Err(MeshError::Argument(format!(
                "cell order is not a permutation of the cells (offending point {c})"
            )));
        }
        seen_cell[c] = true;
    }

    // Block layout from per-class point counts.
    let mut counts = [0usize; 3];
    for &class in &local.classes {
        counts[class.index()] += 1;
    }
    let core_end = counts[0];
    let non_core_end = counts[0] + counts[1];
    let mut next_free = [0, core_end, non_core_end];
    let bounds = [core_end, non_core_end, chart];

    let mut new_of_old = vec![usize::MAX; chart];
    let mut place = |p: Point, new_of_old: &mut Vec<usize>| {
        if new_of_old[p] == usize::MAX {
            let b = local.classes[p].index();
            new_of_old[p] = next_free[b];
            next_free[b] += 1;
        }
    };
    for &c in cell_order {
        for p in plex.closure(c, true)? {
            place(p, &mut new_of_old);
        }
    }
    for p in 0..chart {
        place(p, &mut new_of_old);
    }
    debug_assert_eq!(next_free, bounds);

    Ok(Permutation {
        new_of_old,
        segment_bounds: bounds,
    })
}

/// Renumbers an entire plex: cones, supports, labels, and strata move with
/// the permutation, so any traversal on the result equals the pointwise
/// renamed traversal on the original.
///
/// The permuted strata are usually not contiguous id ranges any more; use
/// the point-list stratum accessors on the result.
///
/// # Errors
///
/// [`MeshError::Argument`] when the permutation does not fit the chart or is
/// not a bijection.
pub fn apply_permutation(plex: &Plex, perm: &Permutation) -> Result<Plex> {
    let chart = plex.chart_size();
    if perm.len() != chart {
        return Err(MeshError::Argument(format!(
            "permutation covers {} points, chart has {chart}",
            perm.len()
        )));
    }
    perm.old_of_new()?; // bijection check
    let pi = &perm.new_of_old;
    let mut cones: Vec<Vec<Point>> = vec![Vec::new(); chart];
    for p in 0..chart {
        cones[pi[p]] = plex.cone(p)?.iter().map(|&q| pi[q]).collect();
    }
    let labels = plex
        .labels()
        .iter()
        .map(|(name, label)| (name.clone(), label.remapped(pi)))
        .collect();
    Plex::from_cones_unchecked(cones, labels)
}
