//! Unstructured-mesh data management built on a stratified DAG.
//!
//! The mesh topology lives in a [`Plex`]: every entity (cell, facet, edge,
//! vertex) is a point in one contiguous chart, related to its immediate
//! neighbours by covering arrows. All traversal — boundary extraction,
//! adjacency, cell closures — is expressed through two dual incidence maps
//! ([`Plex::cone`]/[`Plex::support`]) and their transitive closures, so the
//! rest of the stack never branches on dimension or cell shape.
//!
//! On top of the topology sit the pieces a distributed finite-element code
//! needs:
//!
//! - mesh construction from generators ([`unit_square_mesh`],
//!   [`reference_tet`]) or Gmsh files ([`read_gmsh_file`]), with facet
//!   interpolation and boundary labels;
//! - cell [`partition`]ing and [`distribute`]-ion into per-rank local
//!   meshes with overlap halos and a point star-forest describing shared
//!   points;
//! - entity classification ([`mark_entity_classes`]) into core / non-core
//!   / halo, supporting computation–communication overlap;
//! - cache-friendly renumbering: [`rcm_ordering`] over the cell graph and
//!   the class-segmented [`compact_class_permutation`];
//! - degree-1–3 Lagrange DoF layouts ([`create_section`],
//!   [`cell_node_map`], [`facet_maps`], [`global_numbering`]) and halo
//!   exchange over a DoF star-forest ([`sf_broadcast`], [`sf_reduce`]);
//! - sparsity prediction, bandwidth/profile metrics, matrix portraits, and
//!   gather/scatter microbenchmarks that measure what the renumbering buys.
//!
//! Everything is deterministic: identical inputs produce identical
//! orderings, patterns, and files, with randomness confined to a seeded
//! generator.

pub mod bench;
pub mod distribute;
pub mod error;
pub mod gmsh;
pub mod halo;
pub mod layout;
pub mod mesh;
pub mod ordering;
pub mod partition;
pub mod plex;
pub mod sparsity;

pub use bench::{bench_cell_loop, bench_facet_loop};
pub use distribute::{
    distribute, mark_entity_classes, EntityClass, LocalMesh, PointSf, SfLeaf, CLASS_LABEL,
};
pub use error::{MeshError, Result};
pub use gmsh::{read_gmsh, read_gmsh_file};
pub use halo::{derive_data_sf, sf_broadcast, sf_reduce, DataSf, ReduceOp, SfEdge};
pub use layout::{
    cell_node_map, create_section, facet_maps, global_numbering, lagrange_dof_layout,
    ordered_cell_closure, CellMap, DofLayout, FacetMaps, Section,
};
pub use mesh::{reference_tet, unit_square_mesh, MeshGeometry, BOUNDARY_LABEL};
pub use ordering::{
    apply_permutation, compact_class_permutation, cuthill_mckee, native_ordering, rcm_ordering,
    shuffled_ordering, Permutation,
};
pub use partition::{partition, PartitionMap};
pub use plex::{Label, Plex, Point};
pub use sparsity::{build_sparsity, metrics, write_portrait, OrderingReport, SparsityPattern};
