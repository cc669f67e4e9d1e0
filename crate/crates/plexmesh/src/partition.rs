//! Deterministic cell partitioner.
//!
//! Splits the cell set into `k` balanced regions by greedy growth on the
//! facet-dual graph (cells adjacent iff they share a facet). Seeds are
//! spread by repeated farthest-cell selection; regions then grow
//! round-robin, one cell per region per round, up to a quota of
//! `⌈cells/k⌉`, each region taking the frontier cell with the most
//! neighbours already inside it (compact growth). Every tie-break is by
//! ascending cell id, so the same mesh and `k` always produce the same
//! map.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{MeshError, Result};
use crate::mesh::MeshGeometry;
use crate::plex::Point;

/// Assignment of every cell to exactly one rank.
#[derive(Debug, Clone)]
pub struct PartitionMap {
    /// Owner rank per cell, indexed in cell-stratum order.
    pub cell_owner: Vec<usize>,
    pub num_ranks: usize,
}

impl PartitionMap {
    /// Cells owned by `rank`, as indices into the cell stratum, ascending.
    pub fn owned_cells(&self, rank: usize) -> Vec<usize> {
        self.cell_owner
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == rank)
            .map(|(c, _)| c)
            .collect()
    }

    /// Serializes the map as `cell_id,rank` CSV rows with a header.
    pub fn to_csv(&self, cells: &[Point]) -> String {
        let mut out = String::from("cell_id,rank\n");
        for (idx, &rank) in self.cell_owner.iter().enumerate() {
            out.push_str(&format!("{},{}\n", cells[idx], rank));
        }
        out
    }
}

/// Builds the facet-dual adjacency: cell indices adjacent iff the cells
/// share a height-1 point.
fn facet_dual(mesh: &MeshGeometry) -> Result<Vec<Vec<usize>>> {
    let plex = &mesh.plex;
    let cells = plex.height_stratum(0)?;
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for &f in plex.height_stratum_points(1)? {
        let sup = plex.support(f)?;
        if sup.len() == 2 {
            let a = sup[0] - cells.start;
            let b = sup[1] - cells.start;
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
    }
    for list in &mut nbrs {
        list.sort_unstable();
        list.dedup();
    }
    Ok(nbrs)
}

/// Multi-source BFS distances over the dual graph; unreachable = `usize::MAX`.
fn bfs_distances(nbrs: &[Vec<usize>], seeds: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; nbrs.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        dist[s] = 0;
        queue.push_back(s);
    }
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

/// The farthest cell from the given distance field: unreachable cells count
/// as infinitely far; ties resolve to the lowest id.
fn farthest(dist: &[usize]) -> usize {
    if let Some(c) = dist.iter().position(|&d| d == usize::MAX) {
        return c;
    }
    let mut best = 0;
    for (c, &d) in dist.iter().enumerate() {
        if d > dist[best] {
            best = c;
        }
    }
    best
}

/// Partitions the mesh cells into `k` regions.
///
/// # Errors
///
/// [`MeshError::Argument`] unless `1 ≤ k ≤ cell count`.
pub fn partition(mesh: &MeshGeometry, k: usize) -> Result<PartitionMap> {
    let ncells = mesh.plex.height_stratum(0)?.len();
    if k < 1 || k > ncells {
        return Err(MeshError::Argument(format!(
            "part count {k} outside [1, {ncells}]"
        )));
    }
    let nbrs = facet_dual(mesh)?;

    // Spread seeds by repeated farthest-cell selection, starting at cell 0.
    let mut seeds = vec![0usize];
    while seeds.len() < k {
        seeds.push(farthest(&bfs_distances(&nbrs, &seeds)));
    }

    let quota = ncells.div_ceil(k);
    let mut owner = vec![usize::MAX; ncells];
    let mut sizes = vec![0usize; k];
    let mut frontiers: Vec<BTreeSet<usize>> =
        seeds.iter().map(|&s| BTreeSet::from([s])).collect();

    let mut remaining = ncells;
    while remaining > 0 {
        let mut progressed = false;
        for r in 0..k {
            if sizes[r] >= quota {
                continue;
            }
            frontiers[r].retain(|&c| owner[c] == usize::MAX);
            // Compact growth: fill the frontier cell with the most
            // neighbours already in this region; ties to the lowest id.
            let best = frontiers[r].iter().copied().max_by_key(|&c| {
                let filled = nbrs[c].iter().filter(|&&nb| owner[nb] == r).count();
                (filled, std::cmp::Reverse(c))
            });
            let Some(c) = best else { continue };
            frontiers[r].remove(&c);
            owner[c] = r;
            sizes[r] += 1;
            remaining -= 1;
            progressed = true;
            for &nb in &nbrs[c] {
                if owner[nb] == usize::MAX {
                    frontiers[r].insert(nb);
                }
            }
        }
        if !progressed {
            // Every below-quota region is walled off: re-seed the neediest
            // region at the lowest unassigned cell.
            let r = (0..k)
                .filter(|&r| sizes[r] < quota)
                .min_by_key(|&r| (sizes[r], r))
                .expect("total quota covers every cell");
            let c = owner
                .iter()
                .position(|&o| o == usize::MAX)
                .expect("cells remain");
            frontiers[r].insert(c);
        }
    }

    Ok(PartitionMap {
        cell_owner: owner,
        num_ranks: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{reference_tet, unit_square_mesh};

    #[test]
    fn single_part_owns_everything() {
        let mesh = unit_square_mesh(2, 2).unwrap();
        let part = partition(&mesh, 1).unwrap();
        assert!(part.cell_owner.iter().all(|&r| r == 0));
        let tet = reference_tet();
        assert_eq!(partition(&tet, 1).unwrap().cell_owner, vec![0]);
    }

    #[test]
    fn one_cell_per_part() {
        let mesh = unit_square_mesh(2, 1).unwrap();
        let part = partition(&mesh, 4).unwrap();
        let mut owners = part.cell_owner.clone();
        owners.sort_unstable();
        assert_eq!(owners, vec![0, 1, 2, 3]);
    }

    #[test]
    fn four_by_four_two_parts_is_balanced() {
        let mesh = unit_square_mesh(4, 4).unwrap();
        let part = partition(&mesh, 2).unwrap();
        assert_eq!(part.owned_cells(0).len(), 16);
        assert_eq!(part.owned_cells(1).len(), 16);
    }

    #[test]
    fn deterministic_across_runs() {
        let mesh = unit_square_mesh(4, 4).unwrap();
        let a = partition(&mesh, 3).unwrap();
        let b = partition(&mesh, 3).unwrap();
        assert_eq!(a.cell_owner, b.cell_owner);
    }

    #[test]
    fn every_region_is_balanced_and_nonempty() {
        for (n, k) in [(4, 2), (4, 3), (4, 4), (4, 5), (8, 3), (5, 2)] {
            let mesh = unit_square_mesh(n, n).unwrap();
            let part = partition(&mesh, k).unwrap();
            let ncells = 2 * n * n;
            let quota = ncells.div_ceil(k);
            assert!(part.cell_owner.iter().all(|&r| r < k), "k={k}");
            let mut total = 0;
            for r in 0..k {
                let size = part.owned_cells(r).len();
                assert!(size > 0, "region {r} of k={k} empty");
                assert!(size <= quota, "region {r} of k={k} over quota");
                total += size;
            }
            assert_eq!(total, ncells);
        }
    }

    #[test]
    fn out_of_range_parts_is_argument_error() {
        let mesh = unit_square_mesh(1, 1).unwrap();
        assert!(matches!(partition(&mesh, 0), Err(MeshError::Argument(_))));
        assert!(matches!(partition(&mesh, 3), Err(MeshError::Argument(_))));
    }
}
