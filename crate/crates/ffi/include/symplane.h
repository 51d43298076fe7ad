#ifndef SYMPLANE_H
#define SYMPLANE_H

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_PARSE = 3,
  SP_STATUS_IO = 4,
  SP_STATUS_FORMAT = 5,
  SP_STATUS_INVALID_MESH = 6,
  SP_STATUS_FEATURES = 7,
  SP_STATUS_PANIC = 99,
} SpStatus;

/*
 Mesh translated to its bounding-box center.
 */
typedef struct SpMesh SpMesh;

/*
 Detected planes ordered by increasing Chamfer distance.
 */
typedef struct SpPlaneSet SpPlaneSet;

/*
 Per-vertex feature vectors.
 */
typedef struct SpVertexFeatures SpVertexFeatures;

/*
 A plane `normal . x + offset = 0`. `chamfer` and `confidence` are NaN for
 planes that were not produced by detection.
 */
typedef struct SpPlane {
  double normal[3];
  double offset;
  double chamfer;
  double confidence;
} SpPlane;

/*
 Detection parameters. Fill with [`sp_detect_config_default`] and adjust.
 */
typedef struct SpDetectConfig {
  /*
   Surface samples drawn before matching.
   */
  size_t points;
  uint64_t sample_seed;
  double origin_tol_frac;
  double chamfer_tau1;
  double angle_tau2_deg;
  size_t max_planes;
  double offset_tol_frac;
  uint64_t seed;
} SpDetectConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into this library on the same thread.
 */
const char *sp_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/*
 Loads an OBJ or OFF file, chosen by extension.

 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SpStatus sp_mesh_load(const char *path, struct SpMesh **out);

/*
 Builds a mesh from `n_vertices` xyz triples and `n_faces` index triples.

 # Safety
 `xyz` must hold `3 * n_vertices` doubles and `faces` `3 * n_faces`
 indices; `out` must be writable.
 */
enum SpStatus sp_mesh_from_buffers(const double *xyz,
                                   size_t n_vertices,
                                   const uint32_t *faces,
                                   size_t n_faces,
                                   struct SpMesh **out);

/*
 # Safety
 `mesh` must be null or a handle from this library not yet freed.
 */
void sp_mesh_free(struct SpMesh *mesh);

/*
 Vertex count, or 0 for a null handle.

 # Safety
 `mesh` must be null or a live handle.
 */
size_t sp_mesh_vertex_count(const struct SpMesh *mesh);

/*
 Bounding-box diagonal, or NaN for a null handle.

 # Safety
 `mesh` must be null or a live handle.
 */
double sp_mesh_diagonal(const struct SpMesh *mesh);

/*
 Reads a vertex-feature file written by the `backproject` command.

 # Safety
 `path` must be a NUL-terminated string and `out` writable.
 */
enum SpStatus sp_features_load(const char *path, struct SpVertexFeatures **out);

/*
 Synthetic features of dimension `dim` that are invariant under the
 reflections in `planes` (which may be empty), plus uniform noise.

 # Safety
 `mesh` must be a live handle, `planes` must hold `n_planes` entries and
 `out` must be writable.
 */
enum SpStatus sp_features_synthetic(const struct SpMesh *mesh,
                                    const struct SpPlane *planes,
                                    size_t n_planes,
                                    size_t dim,
                                    double noise,
                                    uint64_t seed,
                                    struct SpVertexFeatures **out);

/*
 # Safety
 `features` must be null or a live handle.
 */
void sp_features_free(struct SpVertexFeatures *features);

/*
 Feature dimension, or 0 for a null handle.

 # Safety
 `features` must be null or a live handle.
 */
size_t sp_features_dim(const struct SpVertexFeatures *features);

/*
 Writes the default parameters into `cfg`.

 # Safety
 `cfg` must be writable.
 */
enum SpStatus sp_detect_config_default(struct SpDetectConfig *cfg);

/*
 Samples the surface, interpolates `features` and detects symmetry planes.
 A null `cfg` uses the defaults. An object without symmetry yields an
 empty set.

 # Safety
 `mesh` and `features` must be live handles, `cfg` null or readable and
 `out` writable.
 */
enum SpStatus sp_detect(const struct SpMesh *mesh,
                        const struct SpVertexFeatures *features,
                        const struct SpDetectConfig *cfg,
                        struct SpPlaneSet **out);

/*
 Number of planes, or 0 for a null handle.

 # Safety
 `set` must be null or a live handle.
 */
size_t sp_plane_set_len(const struct SpPlaneSet *set);

/*
 Copies plane `index` into `out`.

 # Safety
 `set` must be a live handle and `out` writable.
 */
enum SpStatus sp_plane_set_get(const struct SpPlaneSet *set, size_t index, struct SpPlane *out);

/*
 # Safety
 `set` must be null or a live handle.
 */
void sp_plane_set_free(struct SpPlaneSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMPLANE_H */
