//! Halo exchange over a star forest of DoF indices.
//!
//! A [`DataSf`] lifts the point-level ownership forest to data indices: one
//! edge per shared DoF, rooted at the owner's slot. [`sf_broadcast`] pushes
//! owner values to ghost copies; [`sf_reduce`] pulls ghost contributions
//! back onto owners with a combining operator. Both walk edges in a fixed
//! sorted order, so results are reproducible regardless of how the forest
//! was assembled.

use crate::distribute::PointSf;
use crate::error::{MeshError, Result};
use crate::layout::Section;

/// One shared DoF: the owner's slot (root) and a ghost copy (leaf).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SfEdge {
    pub root_rank: usize,
    pub root_idx: usize,
    pub leaf_rank: usize,
    pub leaf_idx: usize,
}

/// A star forest over per-rank data arrays.
#[derive(Debug, Clone, Default)]
pub struct DataSf {
    pub num_ranks: usize,
    pub edges: Vec<SfEdge>,
}

/// Combining operator for [`sf_reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Max,
    Replace,
}

/// Lifts point star forests to DoF star forests through the per-rank
/// sections: a leaf point with `n` DoFs becomes `n` edges pairing its slots
/// with the owner's, in offset order.
///
/// # Errors
///
/// [`MeshError::Integrity`] when a leaf references a point outside its
/// section; [`MeshError::Layout`] when a shared point carries different DoF
/// counts on the two ranks.
pub fn derive_data_sf(sfs: &[PointSf], sections: &[Section]) -> Result<DataSf> {
    if sfs.len() != sections.len() {
        return Err(MeshError::Integrity(
            "one point SF and one section per rank are required".into(),
        ));
    }
    let mut edges = Vec::new();
    for (rank, sf) in sfs.iter().enumerate() {
        for leaf in &sf.leaves {
            if leaf.owner_rank >= sections.len() {
                return Err(MeshError::Integrity(format!(
                    "rank {rank} leaf {} names rank {}, but only {} ranks exist",
                    leaf.local_point,
                    leaf.owner_rank,
                    sections.len()
                )));
            }
            let local = &sections[rank];
            let owner = &sections[leaf.owner_rank];
            if leaf.local_point >= local.dof_count.len()
                || leaf.owner_point >= owner.dof_count.len()
            {
                return Err(MeshError::Integrity(format!(
                    "rank {rank} leaf {} is outside its section",
                    leaf.local_point
                )));
            }
            if local.dof_count[leaf.local_point] != owner.dof_count[leaf.owner_point] {
                return Err(MeshError::Layout(format!(
                    "point {} has {} DoFs on rank {rank} but {} on owner rank {}",
                    leaf.local_point,
                    local.dof_count[leaf.local_point],
                    owner.dof_count[leaf.owner_point],
                    leaf.owner_rank
                )));
            }
            for (leaf_idx, root_idx) in local.range(leaf.local_point).zip(owner.range(leaf.owner_point)) {
                edges.push(SfEdge {
                    root_rank: leaf.owner_rank,
                    root_idx,
                    leaf_rank: rank,
                    leaf_idx,
                });
            }
        }
    }
    edges.sort_unstable();
    Ok(DataSf {
        num_ranks: sections.len(),
        edges,
    })
}

fn check_bounds<T>(sf: &DataSf, data: &[Vec<T>]) -> Result<()> {
    if data.len() < sf.num_ranks {
        return Err(MeshError::Integrity(format!(
            "star forest spans {} ranks, data has {}",
            sf.num_ranks,
            data.len()
        )));
    }
    for e in &sf.edges {
        if e.root_rank >= data.len()
            || e.leaf_rank >= data.len()
            || e.root_idx >= data[e.root_rank].len()
            || e.leaf_idx >= data[e.leaf_rank].len()
        {
            return Err(MeshError::Integrity(format!(
                "star-forest edge ({},{}) -> ({},{}) is out of bounds",
                e.root_rank, e.root_idx, e.leaf_rank, e.leaf_idx
            )));
        }
    }
    Ok(())
}

/// Copies each root value onto all of its leaves.
///
/// # Errors
///
/// [`MeshError::Integrity`] when an edge indexes outside `data`.
pub fn sf_broadcast<T: Copy>(sf: &DataSf, data: &mut [Vec<T>]) -> Result<()> {
    check_bounds(sf, data)?;
    let values: Vec<T> = sf
        .edges
        .iter()
        .map(|e| data[e.root_rank][e.root_idx])
        .collect();
    for (e, v) in sf.edges.iter().zip(values) {
        data[e.leaf_rank][e.leaf_idx] = v;
    }
    Ok(())
}

/// Combines each leaf value into its root: `Sum` accumulates, `Max` keeps
/// the larger of root and leaves, `Replace` overwrites the root with its
/// single leaf.
///
/// Leaves are folded in ascending `(root, leaf)` order, so the result is
/// deterministic.
///
/// # Errors
///
/// [`MeshError::Integrity`] on out-of-bounds edges;
/// [`MeshError::Ambiguity`] when `Replace` finds a root with more than one
/// leaf.
pub fn sf_reduce<T>(sf: &DataSf, op: ReduceOp, data: &mut [Vec<T>]) -> Result<()>
where
    T: Copy + PartialOrd + std::ops::Add<Output = T>,
{
    check_bounds(sf, data)?;
    let mut edges = sf.edges.clone();
    edges.sort_unstable();
    if op == ReduceOp::Replace {
        for pair in edges.windows(2) {
            if pair[0].root_rank == pair[1].root_rank && pair[0].root_idx == pair[1].root_idx {
                return Err(MeshError::Ambiguity(format!(
                    "replace-reduce root ({},{}) has more than one leaf",
                    pair[0].root_rank, pair[0].root_idx
                )));
            }
        }
    }
    for e in &edges {
        let leaf = data[e.leaf_rank][e.leaf_idx];
        let root = &mut data[e.root_rank][e.root_idx];
        match op {
            ReduceOp::Sum => *root = *root + leaf,
            ReduceOp::Max => {
                if leaf > *root {
                    *root = leaf;
                }
            }
            ReduceOp::Replace => *root = leaf,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribute::{distribute, mark_entity_classes, SfLeaf};
    use crate::layout::{create_section, lagrange_dof_layout};
    use crate::mesh::unit_square_mesh;
    use crate::ordering::Permutation;
    use crate::partition::partition;

    fn toy_sf() -> DataSf {
        DataSf {
            num_ranks: 2,
            edges: vec![
                SfEdge {
                    root_rank: 0,
                    root_idx: 0,
                    leaf_rank: 1,
                    leaf_idx: 0,
                },
                SfEdge {
                    root_rank: 0,
                    root_idx: 0,
                    leaf_rank: 1,
                    leaf_idx: 1,
                },
            ],
        }
    }

    #[test]
    fn empty_forest_is_a_no_op() {
        let sf = DataSf::default();
        let mut data = vec![vec![1.0, 2.0]];
        sf_broadcast(&sf, &mut data).unwrap();
        sf_reduce(&sf, ReduceOp::Sum, &mut data).unwrap();
        assert_eq!(data, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn broadcast_is_idempotent() {
        let sf = toy_sf();
        let mut data = vec![vec![7], vec![0, 0]];
        sf_broadcast(&sf, &mut data).unwrap();
        assert_eq!(data, vec![vec![7], vec![7, 7]]);
        sf_broadcast(&sf, &mut data).unwrap();
        assert_eq!(data, vec![vec![7], vec![7, 7]]);
    }

    #[test]
    fn reduce_sum_and_max() {
        let sf = toy_sf();
        let mut data = vec![vec![10], vec![1, 2]];
        sf_reduce(&sf, ReduceOp::Sum, &mut data).unwrap();
        assert_eq!(data[0][0], 13);
        let mut data = vec![vec![5], vec![9, 2]];
        sf_reduce(&sf, ReduceOp::Max, &mut data).unwrap();
        assert_eq!(data[0][0], 9);
    }

    #[test]
    fn replace_requires_a_unique_leaf() {
        let sf = toy_sf();
        let mut data = vec![vec![5], vec![9, 2]];
        assert!(matches!(
            sf_reduce(&sf, ReduceOp::Replace, &mut data),
            Err(MeshError::Ambiguity(_))
        ));
        let single = DataSf {
            num_ranks: 2,
            edges: sf.edges[..1].to_vec(),
        };
        sf_reduce(&single, ReduceOp::Replace, &mut data).unwrap();
        assert_eq!(data[0][0], 9);
    }

    #[test]
    fn out_of_bounds_edge_is_rejected() {
        let sf = DataSf {
            num_ranks: 1,
            edges: vec![SfEdge {
                root_rank: 0,
                root_idx: 5,
                leaf_rank: 0,
                leaf_idx: 0,
            }],
        };
        let mut data = vec![vec![1]];
        assert!(matches!(
            sf_broadcast(&sf, &mut data),
            Err(MeshError::Integrity(_))
        ));
    }

    #[test]
    fn cubic_edge_points_yield_two_edges_each() {
        let mesh = unit_square_mesh(2, 2).unwrap();
        let part = partition(&mesh, 2).unwrap();
        let layout = lagrange_dof_layout(2, 3).unwrap();
        let mut locals = Vec::new();
        let mut sfs = Vec::new();
        let mut sections = Vec::new();
        for (mut local, sf) in distribute(&mesh, &part, 1).unwrap() {
            mark_entity_classes(&mut local, &sf).unwrap();
            let perm = Permutation::identity(local.chart_size());
            sections.push(create_section(&local, &perm, &layout).unwrap());
            locals.push(local);
            sfs.push(sf);
        }
        let data_sf = derive_data_sf(&sfs, &sections).unwrap();
        let expected: usize = sfs
            .iter()
            .zip(&sections)
            .flat_map(|(sf, s)| sf.leaves.iter().map(move |l| s.dof_count[l.local_point]))
            .sum();
        assert_eq!(data_sf.edges.len(), expected);
        // Each shared depth-1 point carries exactly two cubic DoF edges.
        for (rank, sf) in sfs.iter().enumerate() {
            for leaf in &sf.leaves {
                if sections[rank].dof_count[leaf.local_point] == 2 {
                    let range = sections[rank].range(leaf.local_point);
                    let n = data_sf
                        .edges
                        .iter()
                        .filter(|e| e.leaf_rank == rank && range.contains(&e.leaf_idx))
                        .count();
                    assert_eq!(n, 2);
                }
            }
        }
    }

    #[test]
    fn mismatched_dof_counts_are_a_layout_error() {
        let mk_section = |counts: Vec<usize>| {
            let mut offset = vec![0usize; counts.len()];
            let mut total = 0;
            for (i, &c) in counts.iter().enumerate() {
                offset[i] = total;
                total += c;
            }
            Section {
                point_position: (0..counts.len()).collect(),
                dof_count: counts,
                offset,
                total_size: total,
            }
        };
        let sections = [mk_section(vec![2]), mk_section(vec![1])];
        let sfs = [
            PointSf::default(),
            PointSf {
                leaves: vec![SfLeaf {
                    local_point: 0,
                    owner_rank: 0,
                    owner_point: 0,
                }],
            },
        ];
        assert!(matches!(
            derive_data_sf(&sfs, &sections),
            Err(MeshError::Layout(_))
        ));
    }
}
