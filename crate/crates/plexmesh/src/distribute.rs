//! Mesh distribution with overlap and entity-class marking.
//!
//! [`distribute`] splits a mesh into per-rank [`LocalMesh`] values (ranks are
//! simulated in-process): each rank receives the closures of its owned cells
//! plus, per level of `overlap`, the closures of ghost cells that share a
//! vertex with the region. Shared points are described one-sidedly by a
//! [`PointSf`] whose leaves are exactly the non-owned local points.
//!
//! [`mark_entity_classes`] then sorts every local point into one of three
//! classes: `halo` (not owned), `non-core` (owned but within one vertex of
//! the halo), and `core` (owned and safe to process while halo data is still
//! in flight — no core cell's closure touches a halo point).

use crate::error::{MeshError, Result};
use crate::mesh::MeshGeometry;
use crate::partition::PartitionMap;
use crate::plex::{Plex, Point};

/// Name of the label holding entity classes after marking.
pub const CLASS_LABEL: &str = "class";

/// The three PyOP2-style entity classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityClass {
    /// Owned and independent of any halo data.
    Core,
    /// Owned but adjacent to the halo; must wait for communication.
    NonCore,
    /// Not owned; received from another rank.
    Halo,
}

impl EntityClass {
    /// Class blocks in permutation order: core, then non-core, then halo.
    pub const ALL: [EntityClass; 3] = [EntityClass::Core, EntityClass::NonCore, EntityClass::Halo];

    /// Block index (0/1/2) of this class.
    pub fn index(self) -> usize {
        match self {
            EntityClass::Core => 0,
            EntityClass::NonCore => 1,
            EntityClass::Halo => 2,
        }
    }

    /// Integer value used in the `class` label.
    pub fn label_value(self) -> i32 {
        self.index() as i32
    }

    /// Stable lower-case name (`core`, `non_core`, `halo`).
    pub fn name(self) -> &'static str {
        match self {
            EntityClass::Core => "core",
            EntityClass::NonCore => "non_core",
            EntityClass::Halo => "halo",
        }
    }
}

/// One shared point: a local leaf mirroring a root on its owner rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SfLeaf {
    /// The non-owned point in this rank's chart.
    pub local_point: Point,
    /// Rank owning the point.
    pub owner_rank: usize,
    /// The same point in the owner's chart.
    pub owner_point: Point,
}

/// One-sided description of this rank's shared points.
#[derive(Debug, Clone, Default)]
pub struct PointSf {
    /// Leaves in ascending `local_point` order.
    pub leaves: Vec<SfLeaf>,
}

/// One rank's share of a distributed mesh.
#[derive(Debug, Clone)]
pub struct LocalMesh {
    pub rank: usize,
    pub num_ranks: usize,
    /// Local plex (validated, stratified) plus restricted coordinates and
    /// labels.
    pub geometry: MeshGeometry,
    /// Local point id → global point id (strictly increasing).
    pub l2g: Vec<Point>,
    /// Whether each local point is owned by this rank.
    pub owned: Vec<bool>,
    /// Entity class per local point; empty until
    /// [`mark_entity_classes`] runs.
    pub classes: Vec<EntityClass>,
}

impl LocalMesh {
    pub fn plex(&self) -> &Plex {
        &self.geometry.plex
    }

    pub fn chart_size(&self) -> usize {
        self.geometry.plex.chart_size()
    }

    /// Owned cells, ascending local id.
    pub fn owned_cells(&self) -> Vec<Point> {
        self.geometry
            .plex
            .cells()
            .iter()
            .copied()
            .filter(|&c| self.owned[c])
            .collect()
    }

    /// Whether [`mark_entity_classes`] has run.
    pub fn classes_marked(&self) -> bool {
        self.classes.len() == self.chart_size()
    }
}

/// Splits `mesh` into per-rank local meshes with the given overlap depth and
/// derives each rank's point star-forest.
///
/// Point ownership is the lowest rank owning a cell in the point's star, so
/// all ranks agree on it without negotiation. Local charts keep the global
/// stratum order (points sorted by global id), which preserves contiguous
/// strata.
///
/// # Errors
///
/// [`MeshError::Integrity`] when the partition map does not match the mesh.
pub fn distribute(
    mesh: &MeshGeometry,
    part: &PartitionMap,
    overlap: usize,
) -> Result<Vec<(LocalMesh, PointSf)>> {
    let plex = &mesh.plex;
    let chart = plex.chart_size();
    let cells = plex.height_stratum(0)?;
    let verts = plex.depth_stratum(0)?;
    let ncells = cells.len();
    let k = part.num_ranks;
    if part.cell_owner.len() != ncells {
        return Err(MeshError::Integrity(format!(
            "partition map covers {} cells, mesh has {ncells}",
            part.cell_owner.len()
        )));
    }
    if k == 0 {
        return Err(MeshError::Integrity("partition map has zero ranks".into()));
    }
    if let Some(&bad) = part.cell_owner.iter().find(|&&r| r >= k) {
        return Err(MeshError::Integrity(format!(
            "cell owner rank {bad} outside [0, {k})"
        )));
    }

    // Cell → vertices and vertex → cells incidence (by cell/vertex index).
    let maxd = plex.max_depth();
    let mut cell_vertices: Vec<Vec<usize>> = Vec::with_capacity(ncells);
    let mut vertex_cells: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for ci in 0..ncells {
        let vs: Vec<usize> = plex
            .closure(cells.start + ci, false)?
            .into_iter()
            .filter(|&p| verts.contains(&p))
            .map(|p| p - verts.start)
            .collect();
        for &v in &vs {
            vertex_cells[v].push(ci);
        }
        cell_vertices.push(vs);
    }

    // Point ownership: lowest rank owning a cell in the point's star.
    let point_owner: Vec<usize> = if k == 1 {
        vec![0; chart]
    } else {
        (0..chart)
            .map(|p| {
                plex.star(p, true)
                    .expect("point in chart")
                    .into_iter()
                    .filter(|q| cells.contains(q))
                    .map(|q| part.cell_owner[q - cells.start])
                    .min()
                    // Points outside every cell closure (possible only for
                    // isolated vertices) default to rank 0.
                    .unwrap_or(0)
            })
            .collect()
    };

    // Per-rank cell sets: owned cells plus `overlap` rounds of vertex
    // neighbours owned elsewhere.
    let mut rank_cells: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (ci, &r) in part.cell_owner.iter().enumerate() {
        rank_cells[r].push(ci);
    }
    let mut rank_all_cells: Vec<Vec<usize>> = Vec::with_capacity(k);
    for owned_cells in &rank_cells {
        let mut in_region = vec![false; ncells];
        for &ci in owned_cells {
            in_region[ci] = true;
        }
        let mut all = owned_cells.clone();
        let mut frontier = owned_cells.clone();
        for _ in 0..overlap {
            let mut next = Vec::new();
            for &ci in &frontier {
                for &v in &cell_vertices[ci] {
                    for &nb in &vertex_cells[v] {
                        if !in_region[nb] {
                            in_region[nb] = true;
                            next.push(nb);
                        }
                    }
                }
            }
            next.sort_unstable();
            all.extend_from_slice(&next);
            frontier = next;
        }
        all.sort_unstable();
        rank_all_cells.push(all);
    }

    // First pass: local point sets and local plexes.
    let mut locals: Vec<LocalMesh> = Vec::with_capacity(k);
    let mut g2l: Vec<Vec<usize>> = Vec::with_capacity(k);
    for (r, all_cells) in rank_all_cells.iter().enumerate() {
        let mut present = vec![false; chart];
        for &ci in all_cells {
            for p in plex.closure(cells.start + ci, true)? {
                present[p] = true;
            }
        }
        let l2g: Vec<Point> = (0..chart).filter(|&p| present[p]).collect();
        let mut to_local = vec![usize::MAX; chart];
        for (lp, &g) in l2g.iter().enumerate() {
            to_local[g] = lp;
        }
        let cones: Vec<Vec<Point>> = l2g
            .iter()
            .map(|&g| {
                plex.cone(g)
                    .expect("point in chart")
                    .iter()
                    .map(|&q| to_local[q])
                    .collect()
            })
            .collect();
        let mut local_plex = Plex::build_from_cones(l2g.len(), cones)?;

        // Restrict labels and coordinates to the local chart.
        for name in plex.label_names() {
            let label = plex.label(name).expect("label exists");
            for (lp, &g) in l2g.iter().enumerate() {
                if let Some(v) = label.value(g) {
                    local_plex.label_set(name, v, lp)?;
                }
            }
        }
        let coordinates: Vec<[f64; 3]> = l2g
            .iter()
            .filter(|&&g| verts.contains(&g))
            .map(|&g| mesh.coordinates[g - verts.start])
            .collect();
        let owned: Vec<bool> = l2g.iter().map(|&g| point_owner[g] == r).collect();
        debug_assert_eq!(local_plex.max_depth(), maxd);

        locals.push(LocalMesh {
            rank: r,
            num_ranks: k,
            geometry: MeshGeometry {
                plex: local_plex,
                coordinates,
                dim: mesh.dim,
            },
            l2g,
            owned,
            classes: Vec::new(),
        });
        g2l.push(to_local);
    }

    // Second pass: star-forest leaves, resolvable now that every rank's
    // local numbering exists.
    let mut out: Vec<(LocalMesh, PointSf)> = Vec::with_capacity(k);
    for local in locals {
        let mut leaves = Vec::new();
        for (lp, &g) in local.l2g.iter().enumerate() {
            let o = point_owner[g];
            if o != local.rank {
                let owner_point = g2l[o][g];
                if owner_point == usize::MAX {
                    return Err(MeshError::Integrity(format!(
                        "shared point {g} missing from owner rank {o}"
                    )));
                }
                leaves.push(SfLeaf {
                    local_point: lp,
                    owner_rank: o,
                    owner_point,
                });
            }
        }
        out.push((local, PointSf { leaves }));
    }
    Ok(out)
}

/// Marks every local point with its entity class and mirrors the result into
/// the plex's `class` label.
///
/// Classes follow the caption-intent reading of the marking algorithm: halo
/// = non-owned points (the SF leaves); non-core = owned cells sharing at
/// least one vertex with a halo cell, plus owned non-cell points whose star
/// contains a halo or non-core cell; core = everything else.
///
/// # Errors
///
/// [`MeshError::Integrity`] when the SF leaves disagree with point
/// ownership; [`MeshError::Precondition`] when shared points exist but no
/// halo cell was distributed (overlap 0 on a multi-rank run).
pub fn mark_entity_classes(local: &mut LocalMesh, sf: &PointSf) -> Result<()> {
    let chart = local.chart_size();
    let mut is_leaf = vec![false; chart];
    for leaf in &sf.leaves {
        if leaf.local_point >= chart {
            return Err(MeshError::Integrity(format!(
                "SF leaf {} outside local chart",
                leaf.local_point
            )));
        }
        is_leaf[leaf.local_point] = true;
    }
    if (0..chart).any(|p| is_leaf[p] == local.owned[p]) {
        return Err(MeshError::Integrity(
            "point SF leaves disagree with point ownership".into(),
        ));
    }

    let plex = &local.geometry.plex;
    let maxd = plex.max_depth();
    let halo_cells: Vec<Point> = plex
        .cells()
        .iter()
        .copied()
        .filter(|&c| !local.owned[c])
        .collect();
    if local.num_ranks > 1 && !sf.leaves.is_empty() && halo_cells.is_empty() {
        return Err(MeshError::Precondition(
            "no halo cells present; distribute with overlap ≥ 1 before marking classes".into(),
        ));
    }

    let mut classes = vec![EntityClass::Core; chart];
    for (class, &owned) in classes.iter_mut().zip(&local.owned) {
        if !owned {
            *class = EntityClass::Halo;
        }
    }
    if !halo_cells.is_empty() {
        let mut halo_vertex = vec![false; chart];
        for &hc in &halo_cells {
            for p in plex.closure(hc, false)? {
                if plex.depth(p)? == 0 {
                    halo_vertex[p] = true;
                }
            }
        }
        for &c in plex.cells() {
            if local.owned[c]
                && plex
                    .closure(c, false)?
                    .iter()
                    .any(|&p| halo_vertex[p])
            {
                classes[c] = EntityClass::NonCore;
            }
        }
        for p in 0..chart {
            if !local.owned[p] || plex.depth(p)? == maxd {
                continue;
            }
            let touches = plex
                .star(p, false)?
                .into_iter()
                .any(|q| plex.depth(q).expect("in chart") == maxd && classes[q] != EntityClass::Core);
            if touches {
                classes[p] = EntityClass::NonCore;
            }
        }
    }

    for (p, class) in classes.iter().enumerate() {
        local
            .geometry
            .plex
            .label_set(CLASS_LABEL, class.label_value(), p)?;
    }
    local.classes = classes;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_mesh;
    use crate::partition::partition;

    fn marked(nx: usize, ny: usize, k: usize) -> Vec<(LocalMesh, PointSf)> {
        let mesh = unit_square_mesh(nx, ny).unwrap();
        let part = partition(&mesh, k).unwrap();
        let mut ranks = distribute(&mesh, &part, 1).unwrap();
        for (local, sf) in &mut ranks {
            mark_entity_classes(local, sf).unwrap();
        }
        ranks
    }

    #[test]
    fn single_rank_is_identity_with_empty_sf() {
        let mesh = unit_square_mesh(2, 2).unwrap();
        let part = partition(&mesh, 1).unwrap();
        let ranks = distribute(&mesh, &part, 1).unwrap();
        assert_eq!(ranks.len(), 1);
        let (local, sf) = &ranks[0];
        assert!(sf.leaves.is_empty());
        assert_eq!(local.chart_size(), mesh.plex.chart_size());
        assert_eq!(local.l2g, (0..mesh.plex.chart_size()).collect::<Vec<_>>());
        assert!(local.owned.iter().all(|&o| o));
    }

    #[test]
    fn single_rank_marks_everything_core() {
        let ranks = marked(2, 2, 1);
        let (local, _) = &ranks[0];
        assert!(local.classes.iter().all(|&c| c == EntityClass::Core));
    }

    #[test]
    fn owned_cells_partition_the_mesh() {
        let mesh = unit_square_mesh(4, 4).unwrap();
        let part = partition(&mesh, 3).unwrap();
        let ranks = distribute(&mesh, &part, 1).unwrap();
        let mut owned_globals: Vec<Point> = Vec::new();
        for (local, _) in &ranks {
            for &c in local.plex().cells() {
                if local.owned[c] {
                    owned_globals.push(local.l2g[c]);
                }
            }
        }
        owned_globals.sort_unstable();
        let cells = mesh.plex.height_stratum(0).unwrap();
        assert_eq!(owned_globals, cells.collect::<Vec<_>>());
    }

    #[test]
    fn local_meshes_validate_and_keep_global_depths() {
        let mesh = unit_square_mesh(4, 4).unwrap();
        let part = partition(&mesh, 4).unwrap();
        for (local, _) in distribute(&mesh, &part, 1).unwrap() {
            let plex = local.plex();
            for p in 0..local.chart_size() {
                assert_eq!(
                    plex.depth(p).unwrap(),
                    mesh.plex.depth(local.l2g[p]).unwrap()
                );
            }
        }
    }

    #[test]
    fn sf_leaves_are_exactly_non_owned_points() {
        for (local, sf) in marked(4, 4, 2) {
            let leaf_points: Vec<Point> = sf.leaves.iter().map(|l| l.local_point).collect();
            let non_owned: Vec<Point> = (0..local.chart_size())
                .filter(|&p| !local.owned[p])
                .collect();
            assert_eq!(leaf_points, non_owned);
            for leaf in &sf.leaves {
                assert_ne!(leaf.owner_rank, local.rank);
            }
        }
    }

    #[test]
    fn classes_partition_local_points() {
        for (local, _) in marked(4, 4, 2) {
            assert!(local.classes_marked());
            for p in 0..local.chart_size() {
                let class = local.classes[p];
                assert_eq!(
                    local
                        .plex()
                        .label_value(CLASS_LABEL, p)
                        .unwrap(),
                    Some(class.label_value())
                );
                assert_eq!(class == EntityClass::Halo, !local.owned[p]);
            }
        }
    }

    #[test]
    fn core_cell_closures_avoid_halo_points() {
        for k in [2, 3, 4] {
            for (local, _) in marked(4, 4, k) {
                let plex = local.plex();
                for &c in plex.cells() {
                    if local.classes[c] != EntityClass::Core {
                        continue;
                    }
                    for p in plex.closure(c, true).unwrap() {
                        assert_ne!(
                            local.classes[p],
                            EntityClass::Halo,
                            "rank {} core cell {c} touches halo point {p}",
                            local.rank
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn missing_overlap_is_precondition_error() {
        let mesh = unit_square_mesh(4, 4).unwrap();
        let part = partition(&mesh, 2).unwrap();
        let mut ranks = distribute(&mesh, &part, 0).unwrap();
        // Interface points land on the lower rank, so the higher rank is
        // the one left with leaves but no halo cells.
        let (local, sf) = ranks
            .iter_mut()
            .find(|(_, sf)| !sf.leaves.is_empty())
            .expect("some rank shares points");
        assert!(matches!(
            mark_entity_classes(local, sf),
            Err(MeshError::Precondition(_))
        ));
    }

    #[test]
    fn mismatched_partition_is_integrity_error() {
        let mesh = unit_square_mesh(2, 2).unwrap();
        let part = PartitionMap {
            cell_owner: vec![0; 3],
            num_ranks: 1,
        };
        assert!(matches!(
            distribute(&mesh, &part, 1),
            Err(MeshError::Integrity(_))
        ));
    }
}
