#ifndef PLEXMESH_H
#define PLEXMESH_H

/* Generated by cbindgen from the plexmesh-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  PLEX_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PLEX_STATUS_NULL_POINTER = 1,
  /**
   * An argument value was outside its valid range.
   */
  PLEX_STATUS_ARGUMENT = 2,
  /**
   * The input data was malformed or internally inconsistent.
   */
  PLEX_STATUS_DATA = 3,
  /**
   * The caller-provided buffer is too small; the required length has
   * been stored through the length pointer.
   */
  PLEX_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  PLEX_STATUS_INVALID_UTF8 = 5,
} PlexStatus;

/**
 * Opaque mesh handle; create with the `plex_mesh_*` constructors and
 * release with [`plex_mesh_free`].
 */
typedef struct PlexMesh PlexMesh;

/**
 * Sparsity-pattern summary produced by [`plex_mesh_sparsity_metrics`].
 */
typedef struct {
  /**
   * Matrix dimension (global degrees of freedom).
   */
  size_t n;
  /**
   * Stored entries.
   */
  size_t nnz;
  /**
   * Maximum distance of an entry from the diagonal.
   */
  size_t bandwidth;
  /**
   * Sum over rows of the distance from the first entry to the diagonal.
   */
  size_t profile;
} PlexSparsityInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message raised on the calling thread.
 *
 * The pointer refers to thread-local storage owned by the library; it is
 * valid until the next failing call on the same thread and must not be
 * freed. The string is empty if no error has occurred yet.
 */
const char *plex_last_error(void);

/**
 * Builds a right-angled triangulation of the unit square with `nx` by `ny`
 * divisions and stores a handle through `out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
PlexStatus plex_mesh_unit_square(size_t nx, size_t ny, PlexMesh **out);

/**
 * Builds the fully interpolated reference tetrahedron and stores a handle
 * through `out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
PlexStatus plex_mesh_reference_tet(PlexMesh **out);

/**
 * Reads an MSH 2.2 ASCII file and stores a handle through `out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer to
 * writable storage for one handle.
 */
PlexStatus plex_mesh_read_gmsh(const char *path, PlexMesh **out);

/**
 * Releases a mesh handle. Passing null is a no-op.
 *
 * # Safety
 * `mesh` must be a handle returned by a `plex_mesh_*` constructor that has
 * not been freed already.
 */
void plex_mesh_free(PlexMesh *mesh);

/**
 * Number of points in the mesh chart, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t plex_mesh_chart_size(const PlexMesh *mesh);

/**
 * Stores the topological dimension, cell count, and vertex count. Any of
 * the output pointers may be null to skip that value.
 *
 * # Safety
 * `mesh` must be a live handle; non-null outputs must be writable.
 */
PlexStatus plex_mesh_counts(const PlexMesh *mesh, size_t *dim, size_t *cells, size_t *vertices);

/**
 * Writes the transitive closure of `point` (all points it covers) into
 * `buf` under the two-call protocol; `include_self` prepends the seed.
 *
 * # Safety
 * `mesh` must be a live handle; `buf` must be writable for `capacity`
 * entries; `len`, if non-null, must be writable.
 */
PlexStatus plex_mesh_closure(const PlexMesh *mesh,
                             size_t point,
                             bool include_self,
                             size_t *buf,
                             size_t capacity,
                             size_t *len);

/**
 * Writes the owner rank of every cell for a `parts`-way decomposition into
 * `owners` under the two-call protocol (one entry per cell, in cell order).
 *
 * # Safety
 * `mesh` must be a live handle; `owners` must be writable for `capacity`
 * entries; `len`, if non-null, must be writable.
 */
PlexStatus plex_mesh_partition(const PlexMesh *mesh,
                               size_t parts,
                               size_t *owners,
                               size_t capacity,
                               size_t *len);

/**
 * Writes the class-segmented point renumbering induced by reverse
 * Cuthill-McKee cell traversal: entry `p` is the new position of point `p`.
 * Uses the two-call protocol; the length equals the chart size.
 *
 * # Safety
 * `mesh` must be a live handle; `new_of_old` must be writable for
 * `capacity` entries; `len`, if non-null, must be writable.
 */
PlexStatus plex_mesh_rcm_permutation(const PlexMesh *mesh,
                                     size_t *new_of_old,
                                     size_t capacity,
                                     size_t *len);

/**
 * Computes bandwidth, profile, and fill statistics of the operator
 * sparsity pattern for a Lagrange space of the given `degree`, numbered
 * either natively or by reverse Cuthill-McKee.
 *
 * # Safety
 * `mesh` must be a live handle; `out` must point to writable storage for
 * one [`PlexSparsityInfo`].
 */
PlexStatus plex_mesh_sparsity_metrics(const PlexMesh *mesh,
                                      size_t degree,
                                      bool use_rcm,
                                      PlexSparsityInfo *out);

/**
 * Writes the sparsity portrait (binary PBM, black = stored entry) for a
 * Lagrange space of the given `degree` to `path`.
 *
 * # Safety
 * `mesh` must be a live handle; `path` must be a NUL-terminated string.
 */
PlexStatus plex_mesh_write_portrait(const PlexMesh *mesh,
                                    size_t degree,
                                    bool use_rcm,
                                    const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLEXMESH_H */
