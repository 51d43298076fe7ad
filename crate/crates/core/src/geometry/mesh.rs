use nalgebra::Rotation3;

use super::Vec3;
use crate::error::{Error, Result};

/// Indexed triangle mesh.
///
/// Construction validates that indices are in range, that every face has three
/// distinct corners and that all coordinates are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    normals: Option<Vec<Vec3>>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite coordinate")));
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references vertex out of range ({f:?}, {n} vertices)"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex ({f:?})")));
            }
        }
        Ok(TriangleMesh { vertices, faces, normals: None })
    }

    /// Attaches per-vertex normals (one per vertex).
    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != self.vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "{} normals for {} vertices",
                normals.len(),
                self.vertices.len()
            )));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized face normal `(b - a) × (c - a)`; its length is twice the area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Applies `f` to every vertex. Normals are dropped.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(f).collect(),
            faces: self.faces.clone(),
            normals: None,
        }
    }

    pub fn translated(&self, t: &Vec3) -> TriangleMesh {
        let mut out = self.map_vertices(|v| v + t);
        out.normals = self.normals.clone();
        out
    }

    pub fn rotated(&self, r: &Rotation3<f64>) -> TriangleMesh {
        let mut out = self.map_vertices(|v| r * v);
        out.normals = self.normals.as_ref().map(|ns| ns.iter().map(|n| r * n).collect());
        out
    }
}

/// A mesh whose bounding box is centered at the origin, together with its
/// bounding-box diagonal (the scale reference for every geometric threshold).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedMesh {
    mesh: TriangleMesh,
    diagonal: f64,
    centroid_applied: Vec3,
}

impl NormalizedMesh {
    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    /// Bounding-box diagonal length `O_d`.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// Translation that was subtracted from the input coordinates.
    pub fn centroid_applied(&self) -> Vec3 {
        self.centroid_applied
    }

    pub fn into_mesh(self) -> TriangleMesh {
        self.mesh
    }
}

/// Translates `mesh` so its bounding-box center sits at the origin. The mesh
/// is not rescaled.
pub fn normalize(mesh: &TriangleMesh) -> Result<NormalizedMesh> {
    if mesh.faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let (lo, hi) = mesh.aabb();
    let diagonal = (hi - lo).norm();
    if !(diagonal > 0.0) {
        return Err(Error::DegenerateMesh("bounding box has zero diagonal".into()));
    }
    let center = (lo + hi) * 0.5;
    Ok(NormalizedMesh { mesh: mesh.translated(&-center), diagonal, centroid_applied: center })
}
