//! Data layout over topology: DoF sections, ordered cell closures, and the
//! indirection maps kernels iterate.
//!
//! A [`Section`] assigns each point a DoF count (from a [`DofLayout`]) and
//! an offset computed by an exclusive prefix sum **in permuted point order**,
//! so the data layout inherits the application ordering: core DoFs first,
//! halo DoFs last. [`ordered_cell_closure`] fixes the within-cell DoF order
//! using the simplex numbering convention (vertices by ascending global
//! number, edges by their non-incident vertex pair, facets opposite their
//! vertex, cell last), and [`cell_node_map`]/[`facet_maps`] assemble the
//! cell→DoF and facet→cell indirections from it. [`global_numbering`]
//! stitches per-rank sections into one global DoF space.

use crate::distribute::{LocalMesh, PointSf};
use crate::error::{MeshError, Result};
use crate::halo::{derive_data_sf, sf_broadcast};
use crate::ordering::Permutation;
use crate::plex::{Plex, Point};

/// Per-depth DoF counts of a Lagrange element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub dim: usize,
    pub degree: usize,
    /// DoFs on each entity, indexed by depth (vertex, edge, [face,] cell).
    pub dofs_per_depth: Vec<usize>,
}

impl DofLayout {
    /// DoFs per cell: Σ over the reference closure.
    pub fn dofs_per_cell(&self) -> usize {
        let d = &self.dofs_per_depth;
        match self.dim {
            2 => 3 * d[0] + 3 * d[1] + d[2],
            _ => 4 * d[0] + 6 * d[1] + 4 * d[2] + d[3],
        }
    }
}

/// The standard Lagrange DoF distribution on simplices: one DoF per vertex,
/// `degree−1` per edge, `(degree−1)(degree−2)/2` per triangle face, and
/// `(degree−1)(degree−2)(degree−3)/6` in the tetrahedron interior.
///
/// # Errors
///
/// [`MeshError::Argument`] outside `dim ∈ {2,3}`, `degree ∈ {1,2,3}`.
pub fn lagrange_dof_layout(dim: usize, degree: usize) -> Result<DofLayout> {
    if !(2..=3).contains(&dim) || !(1..=3).contains(&degree) {
        return Err(MeshError::Argument(format!(
            "unsupported Lagrange space: dim {dim}, degree {degree}"
        )));
    }
    let p = degree;
    let edge = p - 1;
    let face = (p - 1) * (p.max(2) - 2) / 2;
    let interior = if p >= 3 { (p - 1) * (p - 2) * (p - 3) / 6 } else { 0 };
    let dofs_per_depth = if dim == 2 {
        vec![1, edge, face]
    } else {
        vec![1, edge, face, interior]
    };
    Ok(DofLayout {
        dim,
        degree,
        dofs_per_depth,
    })
}

/// CSR-style mapping from points to ranges of a data array.
#[derive(Debug, Clone)]
pub struct Section {
    /// DoFs attached to each point.
    pub dof_count: Vec<usize>,
    /// First data index of each point's range.
    pub offset: Vec<usize>,
    pub total_size: usize,
    /// The application order the offsets were assigned in: point id → sweep
    /// position (a copy of the permutation the section was built with).
    pub point_position: Vec<usize>,
}

impl Section {
    /// The data range of point `p`.
    pub fn range(&self, p: Point) -> std::ops::Range<usize> {
        self.offset[p]..self.offset[p] + self.dof_count[p]
    }
}

/// Builds a section for the local mesh: counts by entity depth, offsets by
/// exclusive prefix sum over the chart in permuted order.
///
/// # Errors
///
/// [`MeshError::Argument`] when the layout dimension does not match the
/// mesh or the permutation does not cover the chart.
pub fn create_section(
    local: &LocalMesh,
    perm: &Permutation,
    layout: &DofLayout,
) -> Result<Section> {
    let plex = local.plex();
    let chart = plex.chart_size();
    if layout.dim != plex.max_depth() {
        return Err(MeshError::Argument(format!(
            "layout dimension {} does not match mesh dimension {}",
            layout.dim,
            plex.max_depth()
        )));
    }
    if perm.len() != chart {
        return Err(MeshError::Argument(format!(
            "permutation covers {} points, chart has {chart}",
            perm.len()
        )));
    }
    let old_of_new = perm.old_of_new()?;
    let mut dof_count = Vec::with_capacity(chart);
    for p in 0..chart {
        dof_count.push(layout.dofs_per_depth[plex.depth(p)?]);
    }
    let mut offset = vec![0usize; chart];
    let mut total = 0usize;
    for &p in &old_of_new {
        offset[p] = total;
        total += dof_count[p];
    }
    Ok(Section {
        dof_count,
        offset,
        total_size: total,
        point_position: perm.new_of_old.clone(),
    })
}

/// The inclusive closure of a simplex cell in local-numbering order:
/// vertices sorted by ascending application-order position, then (in 3D)
/// edges sorted by the ascending position pair of their two non-incident
/// vertices, then facets ordered so facet `i` is opposite vertex `i`, then
/// the cell itself.
///
/// `position` maps each point to its application-order position; pass the
/// identity (or `Permutation::identity(...).new_of_old`) for an unpermuted
/// plex.
///
/// # Errors
///
/// [`MeshError::Argument`] when `cell` is not a cell or `position` does not
/// cover the chart; [`MeshError::Topology`] when the closure is not a
/// simplex closure.
pub fn ordered_cell_closure(plex: &Plex, cell: Point, position: &[usize]) -> Result<Vec<Point>> {
    let chart = plex.chart_size();
    if position.len() != chart {
        return Err(MeshError::Argument(format!(
            "position array covers {} points, chart has {chart}",
            position.len()
        )));
    }
    let dim = plex.max_depth();
    if plex.depth(cell)? != dim {
        return Err(MeshError::Argument(format!("point {cell} is not a cell")));
    }
    let closure = plex.closure(cell, true)?;
    let mut by_depth: Vec<Vec<Point>> = vec![Vec::new(); dim + 1];
    for &p in &closure {
        by_depth[plex.depth(p)?].push(p);
    }
    let expected: &[usize] = if dim == 2 { &[3, 3, 1] } else { &[4, 6, 4, 1] };
    if dim < 2 || by_depth.iter().map(Vec::len).ne(expected.iter().copied()) {
        return Err(MeshError::Topology(format!(
            "closure of cell {cell} is not a simplex closure"
        )));
    }

    let mut vertices = by_depth[0].clone();
    vertices.sort_by_key(|&v| position[v]);

    // Vertex set of a sub-entity, by position rank within this cell.
    let vertex_ranks = |p: Point| -> Result<Vec<usize>> {
        let mut ranks: Vec<usize> = plex
            .closure(p, true)?
            .into_iter()
            .filter(|q| vertices.contains(q))
            .map(|q| vertices.iter().position(|&v| v == q).expect("incident"))
            .collect();
        ranks.sort_unstable();
        Ok(ranks)
    };

    let mut out = vertices.clone();
    if dim == 3 {
        // Edges keyed by their two NON-incident vertex ranks, ascending.
        let mut edges: Vec<(Vec<usize>, Point)> = Vec::with_capacity(6);
        for &e in &by_depth[1] {
            let incident = vertex_ranks(e)?;
            let key: Vec<usize> = (0..4).filter(|r| !incident.contains(r)).collect();
            edges.push((key, e));
        }
        edges.sort();
        out.extend(edges.into_iter().map(|(_, e)| e));
    }
    // Facet i is opposite vertex i.
    let facet_depth = dim - 1;
    let mut facets = vec![Point::MAX; vertices.len()];
    for &f in &by_depth[facet_depth] {
        let incident = vertex_ranks(f)?;
        let opposite: Vec<usize> = (0..vertices.len())
            .filter(|r| !incident.contains(r))
            .collect();
        if opposite.len() != 1 || facets[opposite[0]] != Point::MAX {
            return Err(MeshError::Topology(format!(
                "facet {f} of cell {cell} is not opposite exactly one vertex"
            )));
        }
        facets[opposite[0]] = f;
    }
    out.extend(facets);
    out.push(cell);
    Ok(out)
}

/// Cell→DoF indirection: one row per cell (in permuted order), each row the
/// concatenated section ranges of the cell's ordered closure.
#[derive(Debug, Clone)]
pub struct CellMap {
    /// DoFs per cell.
    pub arity: usize,
    /// Cells in row order (ascending application-order position).
    pub cells: Vec<Point>,
    /// Row-major indices, `cells.len() × arity`.
    pub entries: Vec<usize>,
}

impl CellMap {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// The DoF indices of row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.entries[i * self.arity..(i + 1) * self.arity]
    }

    /// Serializes rows as CSV (one row of DoF indices per cell).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.num_cells() {
            let row: Vec<String> = self.row(i).iter().map(|d| d.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Builds the cell→DoF map from a section.
///
/// Multi-DoF entities contribute their section range in ascending offset
/// order; for edges, interior DoFs are thereby oriented from the
/// lower-numbered to the higher-numbered vertex consistently in every cell
/// that shares the edge.
///
/// # Errors
///
/// [`MeshError::Integrity`] when the section does not match the mesh or the
/// layout.
pub fn cell_node_map(local: &LocalMesh, section: &Section, layout: &DofLayout) -> Result<CellMap> {
    let plex = local.plex();
    let chart = plex.chart_size();
    if section.dof_count.len() != chart || section.point_position.len() != chart {
        return Err(MeshError::Integrity(
            "section does not match the mesh chart".into(),
        ));
    }
    for p in 0..chart {
        if section.dof_count[p] != layout.dofs_per_depth[plex.depth(p)?] {
            return Err(MeshError::Integrity(format!(
                "section count at point {p} disagrees with the layout"
            )));
        }
    }
    let mut cells = plex.cells().to_vec();
    cells.sort_by_key(|&c| section.point_position[c]);
    let arity = layout.dofs_per_cell();
    let mut entries = Vec::with_capacity(cells.len() * arity);
    for &c in &cells {
        for q in ordered_cell_closure(plex, c, &section.point_position)? {
            entries.extend(section.range(q));
        }
    }
    Ok(CellMap {
        arity,
        cells,
        entries,
    })
}

/// Facet→cell indirection maps.
#[derive(Debug, Clone)]
pub struct FacetMaps {
    /// Facets with two supporting cells: `(facet, [(cell, local facet
    /// index); 2])`; the first entry is the '+' side.
    pub interior: Vec<(Point, [(Point, usize); 2])>,
    /// Boundary facets: `(facet, (cell, local facet index))`.
    pub exterior: Vec<(Point, (Point, usize))>,
}

/// Classifies facets by support size and locates each facet inside its
/// cells' ordered closures. The '+' side of an interior facet is the first
/// cell in the facet's (ascending) support.
///
/// # Errors
///
/// [`MeshError::Topology`] when a facet has more than two supporting cells.
pub fn facet_maps(local: &LocalMesh, section: &Section) -> Result<FacetMaps> {
    let plex = local.plex();
    let dim = plex.max_depth();
    if dim < 2 {
        return Err(MeshError::Precondition(
            "facet maps need an interpolated mesh with a facet stratum".into(),
        ));
    }
    // The facet block inside an ordered closure sits after the vertices
    // (and, in 3D, edges): positions dim+1+… of the 2^(dim+1)−1 list.
    let facet_start = if dim == 2 { 3 } else { 10 };
    let nfacets_per_cell = dim + 1;

    let local_index = |cell: Point, facet: Point| -> Result<usize> {
        let oc = ordered_cell_closure(plex, cell, &section.point_position)?;
        oc[facet_start..facet_start + nfacets_per_cell]
            .iter()
            .position(|&f| f == facet)
            .ok_or_else(|| {
                MeshError::Integrity(format!("facet {facet} missing from cell {cell} closure"))
            })
    };

    let mut interior = Vec::new();
    let mut exterior = Vec::new();
    for &f in plex.height_stratum_points(1)? {
        let sup = plex.support(f)?;
        match *sup {
            [c] => exterior.push((f, (c, local_index(c, f)?))),
            [a, b] => interior.push((f, [(a, local_index(a, f)?), (b, local_index(b, f)?)])),
            _ => {
                return Err(MeshError::Topology(format!(
                    "facet {f} has {} supporting cells (non-manifold)",
                    sup.len()
                )));
            }
        }
    }
    Ok(FacetMaps { interior, exterior })
}

/// Assigns global DoF numbers across ranks: owned DoFs by exclusive
/// rank-major scan (within a rank, in permuted section order), ghost DoFs
/// resolved to their owner's numbers through one star-forest broadcast.
///
/// Returns one `local DoF index → global DoF` array per rank.
///
/// # Errors
///
/// [`MeshError::Integrity`] when slice lengths disagree or ownership is
/// inconsistent across ranks.
pub fn global_numbering(
    locals: &[LocalMesh],
    sfs: &[PointSf],
    sections: &[Section],
) -> Result<Vec<Vec<usize>>> {
    let k = locals.len();
    if sfs.len() != k || sections.len() != k {
        return Err(MeshError::Integrity(
            "locals, SFs, and sections must have one entry per rank".into(),
        ));
    }
    for (local, sf) in locals.iter().zip(sfs) {
        for leaf in &sf.leaves {
            let owner = leaf.owner_rank;
            if owner >= k || !locals[owner].owned.get(leaf.owner_point).copied().unwrap_or(false) {
                return Err(MeshError::Integrity(format!(
                    "rank {} leaf {} points at rank {owner} point {}, which is not owned there",
                    local.rank, leaf.local_point, leaf.owner_point
                )));
            }
        }
    }

    let owned_sizes: Vec<usize> = locals
        .iter()
        .zip(sections)
        .map(|(local, section)| {
            (0..local.chart_size())
                .filter(|&p| local.owned[p])
                .map(|p| section.dof_count[p])
                .sum()
        })
        .collect();
    let mut base = 0usize;
    let mut numbering: Vec<Vec<usize>> = Vec::with_capacity(k);
    for r in 0..k {
        let section = &sections[r];
        let mut gnum = vec![usize::MAX; section.total_size];
        let mut points: Vec<Point> = (0..locals[r].chart_size()).collect();
        points.sort_by_key(|&p| section.point_position[p]);
        let mut next = base;
        for p in points {
            if locals[r].owned[p] {
                for slot in section.range(p) {
                    gnum[slot] = next;
                    next += 1;
                }
            }
        }
        debug_assert_eq!(next, base + owned_sizes[r]);
        base += owned_sizes[r];
        numbering.push(gnum);
    }

    let data_sf = derive_data_sf(sfs, sections)?;
    sf_broadcast(&data_sf, &mut numbering)?;
    for (r, gnum) in numbering.iter().enumerate() {
        if gnum.contains(&usize::MAX) {
            return Err(MeshError::Integrity(format!(
                "rank {r} has ghost DoFs not covered by the star forest"
            )));
        }
    }
    Ok(numbering)
}
