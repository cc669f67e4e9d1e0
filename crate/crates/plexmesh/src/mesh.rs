//! Mesh construction: generators and the geometry container.
//!
//! A [`MeshGeometry`] couples a validated [`Plex`] with vertex coordinates
//! and boundary labels. Meshes come from the built-in generators here
//! ([`unit_square_mesh`], [`reference_tet`]) or from an MSH file via
//! [`crate::gmsh::read_gmsh`]; both pathways produce *interpolated* plexes
//! storing every intermediate stratum, laid out cells first, then vertices,
//! then (in 3D) facets, then edges.

use std::collections::HashMap;

use crate::error::{MeshError, Result};
use crate::plex::{Plex, Point};

/// Name of the label carrying boundary facet markers.
pub const BOUNDARY_LABEL: &str = "boundary";

/// A plex plus vertex coordinates.
#[derive(Debug, Clone)]
pub struct MeshGeometry {
    /// The topology; boundary markers live in its `boundary` label.
    pub plex: Plex,
    /// One coordinate triple per depth-0 point, in stratum order. The third
    /// component is 0 for planar meshes.
    pub coordinates: Vec<[f64; 3]>,
    /// Geometric dimension (2 or 3).
    pub dim: usize,
}

impl MeshGeometry {
    /// Topological cell dimension (= max depth of the plex).
    pub fn cell_dimension(&self) -> usize {
        self.plex.max_depth()
    }

    /// Coordinates of vertex point `p`.
    pub fn vertex_coordinates(&self, p: Point) -> Result<&[f64; 3]> {
        let vertices = self.plex.depth_stratum(0)?;
        if !vertices.contains(&p) {
            return Err(MeshError::Range(format!("point {p} is not a vertex")));
        }
        Ok(&self.coordinates[p - vertices.start])
    }
}

/// Result of interpolating cell–vertex incidence into a full plex cone table.
pub(crate) struct Interpolated {
    /// Cone lists for the complete chart (cells, vertices, facets, edges).
    pub cones: Vec<Vec<Point>>,
    pub chart_size: usize,
    /// Sorted vertex key (pair in 2D, triple in 3D) → facet point id.
    pub facet_by_key: HashMap<Vec<Point>, Point>,
}

/// Builds the intermediate strata from cell–vertex lists.
///
/// `cell_verts[c]` holds the global vertex point ids of cell `c`; vertex ids
/// must already occupy `[ncells, ncells + nverts)`. Entities within a stratum
/// are numbered in first-encounter order over a sweep of ascending cell ids,
/// each keyed by its sorted vertex set, so the numbering is deterministic and
/// independent of per-cell vertex order.
pub(crate) fn interpolate(
    dim: usize,
    ncells: usize,
    nverts: usize,
    cell_verts: &[Vec<Point>],
) -> Result<Interpolated> {
    let want = dim + 1;
    for (c, verts) in cell_verts.iter().enumerate() {
        if verts.len() != want {
            return Err(MeshError::Topology(format!(
                "cell {c} has {} vertices, expected {want}",
                verts.len()
            )));
        }
    }
    let vert_base = ncells;
    match dim {
        2 => {
            // Edges are the facets: key = sorted vertex pair.
            let mut edge_by_key: HashMap<Vec<Point>, Point> = HashMap::new();
            let mut edge_keys: Vec<[Point; 2]> = Vec::new();
            let mut cell_cones: Vec<Vec<Point>> = Vec::with_capacity(ncells);
            for verts in cell_verts {
                let mut cone = Vec::with_capacity(3);
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let mut key = vec![verts[a], verts[b]];
                    key.sort_unstable();
                    let next = edge_keys.len();
                    let id = *edge_by_key.entry(key.clone()).or_insert_with(|| {
                        edge_keys.push([key[0], key[1]]);
                        next
                    });
                    cone.push(id);
                }
                cell_cones.push(cone);
            }
            let edge_base = vert_base + nverts;
            let chart_size = edge_base + edge_keys.len();
            let mut cones = vec![Vec::new(); chart_size];
            for (c, cone) in cell_cones.into_iter().enumerate() {
                cones[c] = cone.into_iter().map(|e| edge_base + e).collect();
            }
            for (e, key) in edge_keys.iter().enumerate() {
                cones[edge_base + e] = key.to_vec();
            }
            let facet_by_key = edge_by_key
                .into_iter()
                .map(|(k, e)| (k, edge_base + e))
                .collect();
            Ok(Interpolated {
                cones,
                chart_size,
                facet_by_key,
            })
        }
        3 => {
            // Faces first (keyed by sorted vertex triple), then edges keyed
            // by sorted pair, enumerated over faces in face-id order.
            let mut face_by_key: HashMap<Vec<Point>, Point> = HashMap::new();
            let mut face_keys: Vec<[Point; 3]> = Vec::new();
            let mut cell_cones: Vec<Vec<Point>> = Vec::with_capacity(ncells);
            for verts in cell_verts {
                let mut cone = Vec::with_capacity(4);
                for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
                    let mut key = vec![verts[a], verts[b], verts[c]];
                    key.sort_unstable();
                    let next = face_keys.len();
                    let id = *face_by_key.entry(key.clone()).or_insert_with(|| {
                        face_keys.push([key[0], key[1], key[2]]);
                        next
                    });
                    cone.push(id);
                }
                cell_cones.push(cone);
            }
            let mut edge_by_key: HashMap<(Point, Point), Point> = HashMap::new();
            let mut edge_keys: Vec<[Point; 2]> = Vec::new();
            let mut face_cones: Vec<[Point; 3]> = Vec::with_capacity(face_keys.len());
            for &[a, b, c] in &face_keys {
                let mut cone = [0; 3];
                for (slot, pair) in [(a, b), (a, c), (b, c)].into_iter().enumerate() {
                    let next = edge_keys.len();
                    let id = *edge_by_key.entry(pair).or_insert_with(|| {
                        edge_keys.push([pair.0, pair.1]);
                        next
                    });
                    cone[slot] = id;
                }
                face_cones.push(cone);
            }
            let face_base = vert_base + nverts;
            let edge_base = face_base + face_keys.len();
            let chart_size = edge_base + edge_keys.len();
            let mut cones = vec![Vec::new(); chart_size];
            for (c, cone) in cell_cones.into_iter().enumerate() {
                cones[c] = cone.into_iter().map(|f| face_base + f).collect();
            }
            for (f, cone) in face_cones.into_iter().enumerate() {
                cones[face_base + f] = cone.iter().map(|&e| edge_base + e).collect();
            }
            for (e, key) in edge_keys.iter().enumerate() {
                cones[edge_base + e] = key.to_vec();
            }
            let facet_by_key = face_by_key
                .into_iter()
                .map(|(k, f)| (k, face_base + f))
                .collect();
            Ok(Interpolated {
                cones,
                chart_size,
                facet_by_key,
            })
        }
        _ => Err(MeshError::Argument(format!(
            "unsupported cell dimension {dim}"
        ))),
    }
}

/// Structured triangulation of the unit square.
///
/// Each of the `nx × ny` quads is split into two triangles by its
/// lower-left-to-upper-right diagonal. Counts: `2·nx·ny` cells,
/// `(nx+1)(ny+1)` vertices, `3·nx·ny + nx + ny` edges. Boundary edges are
/// labelled by side in the `boundary` label: 1 = left, 2 = right,
/// 3 = bottom, 4 = top.
///
/// # Errors
///
/// [`MeshError::Argument`] when `nx` or `ny` is zero.
pub fn unit_square_mesh(nx: usize, ny: usize) -> Result<MeshGeometry> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Argument(format!(
            "unit square divisions must be positive, got {nx}x{ny}"
        )));
    }
    let ncells = 2 * nx * ny;
    let nverts = (nx + 1) * (ny + 1);
    let vertex = |i: usize, j: usize| ncells + j * (nx + 1) + i;

    let mut cell_verts: Vec<Vec<Point>> = Vec::with_capacity(ncells);
    for j in 0..ny {
        for i in 0..nx {
            // Lower triangle, then upper triangle of quad (i, j).
            cell_verts.push(vec![vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1)]);
            cell_verts.push(vec![vertex(i, j), vertex(i + 1, j + 1), vertex(i, j + 1)]);
        }
    }
    let interp = interpolate(2, ncells, nverts, &cell_verts)?;
    let mut plex = Plex::build_from_cones(interp.chart_size, interp.cones)?;

    let mut coordinates = Vec::with_capacity(nverts);
    for j in 0..=ny {
        for i in 0..=nx {
            coordinates.push([i as f64 / nx as f64, j as f64 / ny as f64, 0.0]);
        }
    }

    // Boundary sides, decided on integer lattice positions of the endpoints.
    let lattice = |p: Point| {
        let k = p - ncells;
        (k % (nx + 1), k / (nx + 1))
    };
    for (key, &edge) in &interp.facet_by_key {
        let (i0, j0) = lattice(key[0]);
        let (i1, j1) = lattice(key[1]);
        let side = if i0 == 0 && i1 == 0 {
            Some(1)
        } else if i0 == nx && i1 == nx {
            Some(2)
        } else if j0 == 0 && j1 == 0 {
            Some(3)
        } else if j0 == ny && j1 == ny {
            Some(4)
        } else {
            None
        };
        if let Some(side) = side {
            plex.label_set(BOUNDARY_LABEL, side, edge)?;
        }
    }

    Ok(MeshGeometry {
        plex,
        coordinates,
        dim: 2,
    })
}

/// The 15-point reference tetrahedron with the canonical numbering:
/// cell 0, vertices 1–4, facets 5–8, edges 9–14.
pub fn reference_tet() -> MeshGeometry {
    let cones: Vec<Vec<Point>> = vec![
        vec![5, 6, 7, 8],  // cell
        vec![],            // vertices 1..4
        vec![],
        vec![],
        vec![],
        vec![9, 10, 11],  // facet {1,2,3}
        vec![10, 12, 13], // facet {1,3,4}
        vec![11, 13, 14], // facet {1,2,4}
        vec![9, 12, 14],  // facet {2,3,4}
        vec![2, 3],       // edges
        vec![1, 3],
        vec![1, 2],
        vec![3, 4],
        vec![1, 4],
        vec![2, 4],
    ];
    let plex = Plex::build_from_cones(15, cones).expect("reference tetrahedron is valid");
    MeshGeometry {
        plex,
        coordinates: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        dim: 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        for (nx, ny) in [(1, 1), (2, 2), (3, 1), (5, 5), (8, 8)] {
            let mesh = unit_square_mesh(nx, ny).unwrap();
            let plex = &mesh.plex;
            let cells = plex.height_stratum(0).unwrap().len();
            let verts = plex.depth_stratum(0).unwrap().len();
            let edges = plex.depth_stratum(1).unwrap().len();
            assert_eq!(cells, 2 * nx * ny);
            assert_eq!(verts, (nx + 1) * (ny + 1));
            assert_eq!(edges, 3 * nx * ny + nx + ny);
            // Euler characteristic of a disk.
            assert_eq!(verts as i64 - edges as i64 + cells as i64, 1);
        }
    }

    #[test]
    fn unit_square_two_triangle_fixture() {
        let mesh = unit_square_mesh(1, 1).unwrap();
        let plex = &mesh.plex;
        assert_eq!(plex.chart_size(), 11);
        // Cells 0–1, vertices 2–5, edges 6–10; first-encounter edge order.
        assert_eq!(plex.cone(0).unwrap(), &[6, 7, 8]);
        assert_eq!(plex.cone(1).unwrap(), &[7, 9, 10]);
        assert_eq!(plex.cone(6).unwrap(), &[2, 3]);
        assert_eq!(plex.cone(7).unwrap(), &[2, 5]); // shared diagonal
        assert_eq!(plex.support(7).unwrap(), &[0, 1]);
        assert_eq!(mesh.vertex_coordinates(5).unwrap(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn unit_square_boundary_sides() {
        let mesh = unit_square_mesh(3, 2).unwrap();
        let plex = &mesh.plex;
        assert_eq!(plex.label_stratum(BOUNDARY_LABEL, 1).len(), 2); // left
        assert_eq!(plex.label_stratum(BOUNDARY_LABEL, 2).len(), 2); // right
        assert_eq!(plex.label_stratum(BOUNDARY_LABEL, 3).len(), 3); // bottom
        assert_eq!(plex.label_stratum(BOUNDARY_LABEL, 4).len(), 3); // top
        // A labelled edge has exactly one supporting cell.
        for side in 1..=4 {
            for edge in plex.label_stratum(BOUNDARY_LABEL, side) {
                assert_eq!(plex.support(edge).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn reference_tet_layout() {
        let mesh = reference_tet();
        assert_eq!(mesh.plex.chart_size(), 15);
        assert_eq!(mesh.cell_dimension(), 3);
        assert_eq!(mesh.plex.cone(0).unwrap(), &[5, 6, 7, 8]);
        assert_eq!(mesh.coordinates.len(), 4);
        assert_eq!(mesh.vertex_coordinates(1).unwrap(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn interpolation_counts_independent_of_cell_order() {
        let mesh = unit_square_mesh(2, 2).unwrap();
        let plex = &mesh.plex;
        let ncells = plex.height_stratum(0).unwrap().len();
        let nverts = plex.depth_stratum(0).unwrap().len();
        let mut cell_verts: Vec<Vec<Point>> = plex
            .cells()
            .iter()
            .map(|&c| {
                plex.closure(c, false)
                    .unwrap()
                    .into_iter()
                    .filter(|&p| plex.depth(p).unwrap() == 0)
                    .collect()
            })
            .collect();
        let forward = interpolate(2, ncells, nverts, &cell_verts).unwrap();
        cell_verts.reverse();
        let backward = interpolate(2, ncells, nverts, &cell_verts).unwrap();
        assert_eq!(forward.chart_size, backward.chart_size);
        assert_eq!(forward.facet_by_key.len(), backward.facet_by_key.len());
    }
}
