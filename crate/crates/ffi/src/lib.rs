//! C interface to the symplane detector.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns an
//! [`SpStatus`]; on failure a message is kept per thread and can be read with
//! [`sp_last_error_message`]. Planes are exchanged in the coordinates of the
//! input mesh.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use symplane::features::{synthetic_features, VertexFeatures};
use symplane::geometry::{load_mesh, normalize, NormalizedMesh, Plane, TriangleMesh, Vec3};
use symplane::pipeline::{feature_cloud, planes_to_normalized};
use symplane::symmetry::{detect, DetectionConfig};
use symplane::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Format = 5,
    InvalidMesh = 6,
    Features = 7,
    Panic = 99,
}

/// A plane `normal . x + offset = 0`. `chamfer` and `confidence` are NaN for
/// planes that were not produced by detection.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpPlane {
    pub normal: [f64; 3],
    pub offset: f64,
    pub chamfer: f64,
    pub confidence: f64,
}

/// Detection parameters. Fill with [`sp_detect_config_default`] and adjust.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpDetectConfig {
    /// Surface samples drawn before matching.
    pub points: usize,
    pub sample_seed: u64,
    pub origin_tol_frac: f64,
    pub chamfer_tau1: f64,
    pub angle_tau2_deg: f64,
    pub max_planes: usize,
    pub offset_tol_frac: f64,
    pub seed: u64,
}

/// Mesh translated to its bounding-box center.
pub struct SpMesh {
    inner: NormalizedMesh,
}

/// Per-vertex feature vectors.
pub struct SpVertexFeatures {
    inner: VertexFeatures,
}

/// Detected planes ordered by increasing Chamfer distance.
pub struct SpPlaneSet {
    planes: Vec<SpPlane>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SpStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) => SpStatus::Parse,
        Error::Io(_) | Error::Image(_) => SpStatus::Io,
        Error::Format(_) | Error::Checksum { .. } => SpStatus::Format,
        Error::EmptyMesh | Error::DegenerateMesh(_) | Error::InvalidMesh(_) => SpStatus::InvalidMesh,
        Error::DimensionMismatch(_)
        | Error::Pairing(_)
        | Error::TooFewPoints { .. }
        | Error::EmptySet
        | Error::EmptyCloud => SpStatus::Features,
        Error::InvalidPlane(_) | Error::MissingGroundTruth(_) | Error::InvalidArgument(_) => SpStatus::InvalidArgument,
    }
}

struct Fail(SpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SpStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(path).to_str().map_err(|_| Fail(SpStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn plane_of(p: &SpPlane) -> Result<Plane, Fail> {
    Ok(Plane::new(Vec3::from(p.normal), p.offset)?)
}

fn sp_plane(p: &Plane, chamfer: f64, confidence: f64) -> SpPlane {
    let n = p.normal();
    SpPlane { normal: [n.x, n.y, n.z], offset: p.offset(), chamfer, confidence }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an OBJ or OFF file, chosen by extension.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_mesh_load(path: *const c_char, out: *mut *mut SpMesh) -> SpStatus {
    guard(|| {
        let path = path_arg(path)?;
        let mesh = load_mesh(path, None)?;
        put(out, SpMesh { inner: normalize(&mesh)? })
    })
}

/// Builds a mesh from `n_vertices` xyz triples and `n_faces` index triples.
///
/// # Safety
/// `xyz` must hold `3 * n_vertices` doubles and `faces` `3 * n_faces`
/// indices; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mesh_from_buffers(
    xyz: *const f64,
    n_vertices: usize,
    faces: *const u32,
    n_faces: usize,
    out: *mut *mut SpMesh,
) -> SpStatus {
    guard(|| {
        let xyz = slice_arg(xyz, 3 * n_vertices, "xyz")?;
        let idx = slice_arg(faces, 3 * n_faces, "faces")?;
        let vertices = xyz.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        let faces = idx.chunks_exact(3).map(|c| [c[0] as usize, c[1] as usize, c[2] as usize]).collect();
        let mesh = TriangleMesh::new(vertices, faces)?;
        put(out, SpMesh { inner: normalize(&mesh)? })
    })
}

/// # Safety
/// `mesh` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_mesh_free(mesh: *mut SpMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_mesh_vertex_count(mesh: *const SpMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.mesh().vertex_count())
}

/// Bounding-box diagonal, or NaN for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_mesh_diagonal(mesh: *const SpMesh) -> f64 {
    mesh.as_ref().map_or(f64::NAN, |m| m.inner.diagonal())
}

/// Reads a vertex-feature file written by the `backproject` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_features_load(path: *const c_char, out: *mut *mut SpVertexFeatures) -> SpStatus {
    guard(|| {
        let path = path_arg(path)?;
        put(out, SpVertexFeatures { inner: VertexFeatures::load(path)? })
    })
}

/// Synthetic features of dimension `dim` that are invariant under the
/// reflections in `planes` (which may be empty), plus uniform noise.
///
/// # Safety
/// `mesh` must be a live handle, `planes` must hold `n_planes` entries and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_features_synthetic(
    mesh: *const SpMesh,
    planes: *const SpPlane,
    n_planes: usize,
    dim: usize,
    noise: f64,
    seed: u64,
    out: *mut *mut SpVertexFeatures,
) -> SpStatus {
    guard(|| {
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.inner;
        let planes = slice_arg(planes, n_planes, "planes")?.iter().map(plane_of).collect::<Result<Vec<_>, _>>()?;
        let local = planes_to_normalized(mesh, &planes);
        put(out, SpVertexFeatures { inner: synthetic_features(mesh, &local, dim, noise, seed)? })
    })
}

/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_features_free(features: *mut SpVertexFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_features_dim(features: *const SpVertexFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.inner.dim())
}

/// Writes the default parameters into `cfg`.
///
/// # Safety
/// `cfg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_detect_config_default(cfg: *mut SpDetectConfig) -> SpStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        *cfg = default_config();
        Ok(())
    })
}

fn default_config() -> SpDetectConfig {
    let d = DetectionConfig::default();
    SpDetectConfig {
        points: 10_000,
        sample_seed: 0,
        origin_tol_frac: d.origin_tol_frac,
        chamfer_tau1: d.chamfer_tau1,
        angle_tau2_deg: d.angle_tau2_deg,
        max_planes: d.max_planes,
        offset_tol_frac: d.offset_tol_frac,
        seed: d.seed,
    }
}

/// Samples the surface, interpolates `features` and detects symmetry planes.
/// A null `cfg` uses the defaults. An object without symmetry yields an
/// empty set.
///
/// # Safety
/// `mesh` and `features` must be live handles, `cfg` null or readable and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_detect(
    mesh: *const SpMesh,
    features: *const SpVertexFeatures,
    cfg: *const SpDetectConfig,
    out: *mut *mut SpPlaneSet,
) -> SpStatus {
    guard(|| {
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.inner;
        let vf = &features.as_ref().ok_or_else(|| null("features"))?.inner;
        let cfg = cfg.as_ref().copied().unwrap_or_else(default_config);
        let dc = DetectionConfig {
            origin_tol_frac: cfg.origin_tol_frac,
            chamfer_tau1: cfg.chamfer_tau1,
            angle_tau2_deg: cfg.angle_tau2_deg,
            max_planes: cfg.max_planes,
            offset_tol_frac: cfg.offset_tol_frac,
            seed: cfg.seed,
        };
        let (cloud, _) = feature_cloud(mesh, vf, cfg.points, cfg.sample_seed)?;
        let found = detect(&cloud, mesh.diagonal(), &dc)?;
        let shift = mesh.centroid_applied();
        let planes = found
            .iter()
            .map(|c| {
                sp_plane(&c.plane.translated(&shift), c.chamfer.unwrap_or(f64::NAN), c.confidence.unwrap_or(f64::NAN))
            })
            .collect();
        put(out, SpPlaneSet { planes })
    })
}

/// Number of planes, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_plane_set_len(set: *const SpPlaneSet) -> usize {
    set.as_ref().map_or(0, |s| s.planes.len())
}

/// Copies plane `index` into `out`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_plane_set_get(set: *const SpPlaneSet, index: usize, out: *mut SpPlane) -> SpStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = *set.planes.get(index).ok_or_else(|| {
            Fail(SpStatus::InvalidArgument, format!("index {index} out of range for {} planes", set.planes.len()))
        })?;
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_plane_set_free(set: *mut SpPlaneSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
