//! C ABI for the mesh-management library: opaque mesh handles, status
//! codes, and a thread-local last-error message.
//!
//! Conventions:
//! - Every fallible entry point returns a [`PlexStatus`]; on failure a
//!   human-readable message is stored per thread and can be read with
//!   [`plex_last_error`].
//! - Handles come from the `plex_mesh_*` constructors and must be released
//!   exactly once with [`plex_mesh_free`].
//! - Array queries follow the two-call protocol: pass a zero capacity to
//!   learn the required length, then call again with a buffer.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;

use plexmesh::{
    build_sparsity, cell_node_map, compact_class_permutation, create_section, distribute,
    global_numbering, lagrange_dof_layout, mark_entity_classes, metrics, native_ordering,
    partition, rcm_ordering, read_gmsh_file, reference_tet, unit_square_mesh, write_portrait,
    LocalMesh, MeshError, MeshGeometry, PointSf, SparsityPattern,
};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlexStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument value was outside its valid range.
    Argument = 2,
    /// The input data was malformed or internally inconsistent.
    Data = 3,
    /// The caller-provided buffer is too small; the required length has
    /// been stored through the length pointer.
    BufferTooSmall = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
}

/// Opaque mesh handle; create with the `plex_mesh_*` constructors and
/// release with [`plex_mesh_free`].
pub struct PlexMesh {
    mesh: MeshGeometry,
}

/// Sparsity-pattern summary produced by [`plex_mesh_sparsity_metrics`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlexSparsityInfo {
    /// Matrix dimension (global degrees of freedom).
    pub n: usize,
    /// Stored entries.
    pub nnz: usize,
    /// Maximum distance of an entry from the diagonal.
    pub bandwidth: usize,
    /// Sum over rows of the distance from the first entry to the diagonal.
    pub profile: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: PlexStatus, message: impl std::fmt::Display) -> PlexStatus {
    let text = CString::new(message.to_string())
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
    status
}

fn fail_with(err: MeshError) -> PlexStatus {
    let status = match err {
        MeshError::Argument(_) | MeshError::Range(_) => PlexStatus::Argument,
        _ => PlexStatus::Data,
    };
    fail(status, err)
}

/// Last error message raised on the calling thread.
///
/// The pointer refers to thread-local storage owned by the library; it is
/// valid until the next failing call on the same thread and must not be
/// freed. The string is empty if no error has occurred yet.
#[no_mangle]
pub extern "C" fn plex_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn mesh_ref<'a>(mesh: *const PlexMesh) -> Result<&'a MeshGeometry, PlexStatus> {
    if mesh.is_null() {
        return Err(fail(PlexStatus::NullPointer, "mesh handle is null"));
    }
    // SAFETY: non-null handle, guaranteed live by the caller contract.
    Ok(&(*mesh).mesh)
}

unsafe fn store_handle(out: *mut *mut PlexMesh, mesh: MeshGeometry) -> PlexStatus {
    if out.is_null() {
        return fail(PlexStatus::NullPointer, "output handle pointer is null");
    }
    // SAFETY: out is non-null and writable per the caller contract.
    *out = Box::into_raw(Box::new(PlexMesh { mesh }));
    PlexStatus::Ok
}

/// Copies `values` into a caller buffer under the two-call protocol.
unsafe fn fill_buffer(
    values: &[usize],
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> PlexStatus {
    if !len.is_null() {
        // SAFETY: len is non-null and writable per the caller contract.
        *len = values.len();
    }
    if values.len() > capacity {
        return fail(
            PlexStatus::BufferTooSmall,
            format!("buffer holds {capacity} entries, {} required", values.len()),
        );
    }
    if values.is_empty() {
        return PlexStatus::Ok;
    }
    if buf.is_null() {
        return fail(PlexStatus::NullPointer, "output buffer is null");
    }
    // SAFETY: buf is writable for at least `capacity >= values.len()` entries.
    std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    PlexStatus::Ok
}

unsafe fn path_from(ptr: *const c_char) -> Result<String, PlexStatus> {
    if ptr.is_null() {
        return Err(fail(PlexStatus::NullPointer, "path pointer is null"));
    }
    // SAFETY: ptr is a NUL-terminated string per the caller contract.
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_string()),
        Err(_) => Err(fail(PlexStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

/// Single-rank layout pipeline shared by the ordering and sparsity queries.
fn single_rank(mesh: &MeshGeometry) -> Result<(LocalMesh, PointSf), MeshError> {
    let part = partition(mesh, 1)?;
    let mut ranks = distribute(mesh, &part, 1)?;
    let (mut local, sf) = ranks.remove(0);
    mark_entity_classes(&mut local, &sf)?;
    Ok((local, sf))
}

fn assemble_pattern(
    mesh: &MeshGeometry,
    degree: usize,
    use_rcm: bool,
) -> Result<SparsityPattern, MeshError> {
    let (local, sf) = single_rank(mesh)?;
    let plex = local.plex();
    let layout = lagrange_dof_layout(plex.max_depth(), degree)?;
    let order = if use_rcm {
        rcm_ordering(plex)?
    } else {
        native_ordering(plex)?
    };
    let perm = compact_class_permutation(&local, &order)?;
    let section = create_section(&local, &perm, &layout)?;
    let map = cell_node_map(&local, &section, &layout)?;
    let gnum = global_numbering(
        std::slice::from_ref(&local),
        std::slice::from_ref(&sf),
        std::slice::from_ref(&section),
    )?;
    build_sparsity(std::slice::from_ref(&map), &gnum, section.total_size)
}

/// Builds a right-angled triangulation of the unit square with `nx` by `ny`
/// divisions and stores a handle through `out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_unit_square(
    nx: usize,
    ny: usize,
    out: *mut *mut PlexMesh,
) -> PlexStatus {
    match unit_square_mesh(nx, ny) {
        Ok(mesh) => store_handle(out, mesh),
        Err(err) => fail_with(err),
    }
}

/// Builds the fully interpolated reference tetrahedron and stores a handle
/// through `out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_reference_tet(out: *mut *mut PlexMesh) -> PlexStatus {
    store_handle(out, reference_tet())
}

/// Reads an MSH 2.2 ASCII file and stores a handle through `out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_read_gmsh(
    path: *const c_char,
    out: *mut *mut PlexMesh,
) -> PlexStatus {
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match read_gmsh_file(&path) {
        Ok(mesh) => store_handle(out, mesh),
        Err(err) => fail_with(err),
    }
}

/// Releases a mesh handle. Passing null is a no-op.
///
/// # Safety
/// `mesh` must be a handle returned by a `plex_mesh_*` constructor that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_free(mesh: *mut PlexMesh) {
    if mesh.is_null() {
        return;
    }
    // SAFETY: the handle was produced by Box::into_raw and is freed once.
    drop(Box::from_raw(mesh));
}

/// Number of points in the mesh chart, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_chart_size(mesh: *const PlexMesh) -> usize {
    match mesh_ref(mesh) {
        Ok(mesh) => mesh.plex.chart_size(),
        Err(_) => 0,
    }
}

/// Stores the topological dimension, cell count, and vertex count. Any of
/// the output pointers may be null to skip that value.
///
/// # Safety
/// `mesh` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_counts(
    mesh: *const PlexMesh,
    dim: *mut usize,
    cells: *mut usize,
    vertices: *mut usize,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let plex = &mesh.plex;
    if !dim.is_null() {
        *dim = plex.max_depth();
    }
    if !cells.is_null() {
        *cells = plex.cells().len();
    }
    if !vertices.is_null() {
        *vertices = plex.depth_stratum(0).map(|r| r.len()).unwrap_or(0);
    }
    PlexStatus::Ok
}

/// Writes the transitive closure of `point` (all points it covers) into
/// `buf` under the two-call protocol; `include_self` prepends the seed.
///
/// # Safety
/// `mesh` must be a live handle; `buf` must be writable for `capacity`
/// entries; `len`, if non-null, must be writable.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_closure(
    mesh: *const PlexMesh,
    point: usize,
    include_self: bool,
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    match mesh.plex.closure(point, include_self) {
        Ok(points) => fill_buffer(&points, buf, capacity, len),
        Err(err) => fail_with(err),
    }
}

/// Writes the owner rank of every cell for a `parts`-way decomposition into
/// `owners` under the two-call protocol (one entry per cell, in cell order).
///
/// # Safety
/// `mesh` must be a live handle; `owners` must be writable for `capacity`
/// entries; `len`, if non-null, must be writable.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_partition(
    mesh: *const PlexMesh,
    parts: usize,
    owners: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    match partition(mesh, parts) {
        Ok(map) => fill_buffer(&map.cell_owner, owners, capacity, len),
        Err(err) => fail_with(err),
    }
}

/// Writes the class-segmented point renumbering induced by reverse
/// Cuthill-McKee cell traversal: entry `p` is the new position of point `p`.
/// Uses the two-call protocol; the length equals the chart size.
///
/// # Safety
/// `mesh` must be a live handle; `new_of_old` must be writable for
/// `capacity` entries; `len`, if non-null, must be writable.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_rcm_permutation(
    mesh: *const PlexMesh,
    new_of_old: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let perm = single_rank(mesh)
        .and_then(|(local, _)| {
            let order = rcm_ordering(local.plex())?;
            compact_class_permutation(&local, &order)
        });
    match perm {
        Ok(perm) => fill_buffer(&perm.new_of_old, new_of_old, capacity, len),
        Err(err) => fail_with(err),
    }
}

/// Computes bandwidth, profile, and fill statistics of the operator
/// sparsity pattern for a Lagrange space of the given `degree`, numbered
/// either natively or by reverse Cuthill-McKee.
///
/// # Safety
/// `mesh` must be a live handle; `out` must point to writable storage for
/// one [`PlexSparsityInfo`].
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_sparsity_metrics(
    mesh: *const PlexMesh,
    degree: usize,
    use_rcm: bool,
    out: *mut PlexSparsityInfo,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    if out.is_null() {
        return fail(PlexStatus::NullPointer, "output pointer is null");
    }
    match assemble_pattern(mesh, degree, use_rcm) {
        Ok(pattern) => {
            let report = metrics(&pattern);
            // SAFETY: out is non-null and writable per the caller contract.
            *out = PlexSparsityInfo {
                n: pattern.n,
                nnz: report.nnz,
                bandwidth: report.bandwidth,
                profile: report.profile,
            };
            PlexStatus::Ok
        }
        Err(err) => fail_with(err),
    }
}

/// Writes the sparsity portrait (binary PBM, black = stored entry) for a
/// Lagrange space of the given `degree` to `path`.
///
/// # Safety
/// `mesh` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn plex_mesh_write_portrait(
    mesh: *const PlexMesh,
    degree: usize,
    use_rcm: bool,
    path: *const c_char,
) -> PlexStatus {
    let mesh = match mesh_ref(mesh) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let pattern = match assemble_pattern(mesh, degree, use_rcm) {
        Ok(p) => p,
        Err(err) => return fail_with(err),
    };
    let file = match File::create(&path) {
        Ok(f) => f,
        Err(err) => return fail(PlexStatus::Data, format!("cannot create {path}: {err}")),
    };
    let mut sink = BufWriter::new(file);
    match write_portrait(&pattern, &mut sink, None) {
        Ok(()) => PlexStatus::Ok,
        Err(err) => fail_with(err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;
    use std::ptr;

    fn fixture(name: &str) -> CString {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../plexmesh/tests/fixtures")
            .join(name);
        CString::new(path.to_str().unwrap()).unwrap()
    }

    fn last_error() -> String {
        unsafe {
            CStr::from_ptr(plex_last_error())
                .to_string_lossy()
                .into_owned()
        }
    }

    fn square(nx: usize, ny: usize) -> *mut PlexMesh {
        let mut handle = ptr::null_mut();
        let status = unsafe { plex_mesh_unit_square(nx, ny, &mut handle) };
        assert_eq!(status, PlexStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn square_handle_reports_counts() {
        let mesh = square(2, 2);
        unsafe {
            assert_eq!(plex_mesh_chart_size(mesh), 33);
            let (mut dim, mut cells, mut vertices) = (0, 0, 0);
            let status = plex_mesh_counts(mesh, &mut dim, &mut cells, &mut vertices);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!((dim, cells, vertices), (2, 8, 9));
            plex_mesh_free(mesh);
        }
    }

    #[test]
    fn closure_uses_the_two_call_protocol() {
        let mesh = square(1, 1);
        unsafe {
            let mut needed = 0;
            let status = plex_mesh_closure(mesh, 0, true, ptr::null_mut(), 0, &mut needed);
            assert_eq!(status, PlexStatus::BufferTooSmall);
            assert_eq!(needed, 7);
            assert!(last_error().contains("7 required"));

            let mut buf = vec![0usize; needed];
            let status = plex_mesh_closure(mesh, 0, true, buf.as_mut_ptr(), buf.len(), &mut needed);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!(buf[0], 0);
            buf.sort_unstable();
            assert_eq!(buf, vec![0, 2, 3, 5, 6, 7, 8]);

            let status = plex_mesh_closure(mesh, 99, false, ptr::null_mut(), 0, &mut needed);
            assert_eq!(status, PlexStatus::Argument);
            plex_mesh_free(mesh);
        }
    }

    #[test]
    fn null_handles_are_rejected() {
        unsafe {
            assert_eq!(plex_mesh_chart_size(ptr::null()), 0);
            let status = plex_mesh_counts(
                ptr::null(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            );
            assert_eq!(status, PlexStatus::NullPointer);
            assert!(!last_error().is_empty());
            let status = plex_mesh_unit_square(2, 2, ptr::null_mut());
            assert_eq!(status, PlexStatus::NullPointer);
            plex_mesh_free(ptr::null_mut());
        }
    }

    #[test]
    fn invalid_generator_arguments_fail_cleanly() {
        let mut handle = ptr::null_mut();
        let status = unsafe { plex_mesh_unit_square(0, 3, &mut handle) };
        assert_eq!(status, PlexStatus::Argument);
        assert!(handle.is_null());
        assert!(last_error().contains("positive"));
    }

    #[test]
    fn gmsh_files_round_trip_through_the_abi() {
        unsafe {
            let mut handle = ptr::null_mut();
            let path = fixture("two_triangles.msh");
            let status = plex_mesh_read_gmsh(path.as_ptr(), &mut handle);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!(plex_mesh_chart_size(handle), 11);
            plex_mesh_free(handle);

            let missing = CString::new("/nonexistent/mesh.msh").unwrap();
            let status = plex_mesh_read_gmsh(missing.as_ptr(), &mut handle);
            assert_eq!(status, PlexStatus::Data);
        }
    }

    #[test]
    fn partition_covers_every_cell() {
        let mesh = square(4, 4);
        unsafe {
            let mut len = 0;
            let mut owners = vec![usize::MAX; 32];
            let status = plex_mesh_partition(mesh, 3, owners.as_mut_ptr(), owners.len(), &mut len);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!(len, 32);
            assert!(owners.iter().all(|&r| r < 3));
            let status = plex_mesh_partition(mesh, 0, ptr::null_mut(), 0, &mut len);
            assert_eq!(status, PlexStatus::Argument);
            plex_mesh_free(mesh);
        }
    }

    #[test]
    fn rcm_permutation_is_a_bijection() {
        let mesh = square(3, 3);
        unsafe {
            let chart = plex_mesh_chart_size(mesh);
            let mut perm = vec![usize::MAX; chart];
            let mut len = 0;
            let status =
                plex_mesh_rcm_permutation(mesh, perm.as_mut_ptr(), perm.len(), &mut len);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!(len, chart);
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..chart).collect::<Vec<_>>());
            plex_mesh_free(mesh);
        }
    }

    #[test]
    fn sparsity_metrics_match_the_library() {
        let mesh = square(5, 5);
        unsafe {
            let mut info = PlexSparsityInfo::default();
            let status = plex_mesh_sparsity_metrics(mesh, 1, true, &mut info);
            assert_eq!(status, PlexStatus::Ok);
            assert_eq!(
                info,
                PlexSparsityInfo {
                    n: 36,
                    nnz: 206,
                    bandwidth: 8,
                    profile: 158,
                }
            );
            let status = plex_mesh_sparsity_metrics(mesh, 9, true, &mut info);
            assert_eq!(status, PlexStatus::Argument);
            plex_mesh_free(mesh);
        }
    }

    #[test]
    fn portraits_match_the_command_line_output() {
        let mesh = square(5, 5);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("portrait.pbm");
        let c_path = CString::new(out.to_str().unwrap()).unwrap();
        unsafe {
            let status = plex_mesh_write_portrait(mesh, 1, true, c_path.as_ptr());
            assert_eq!(status, PlexStatus::Ok);
            plex_mesh_free(mesh);
        }
        let produced = std::fs::read(&out).unwrap();
        let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../plexmesh/tests/golden/sparsity_p1_seq.pbm");
        assert_eq!(produced, std::fs::read(golden).unwrap());
    }
}
