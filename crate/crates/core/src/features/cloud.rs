use super::VertexFeatures;
use crate::error::{Error, Result};
use crate::geometry::{SurfaceSample, TriangleMesh, Vec3};

/// Points with one feature row each.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureCloud {
    points: Vec<Vec3>,
    features: Vec<f32>,
    dim: usize,
    /// Surface samples the points came from; empty for clouds built
    /// directly from points.
    provenance: Vec<SurfaceSample>,
}

impl FeatureCloud {
    pub fn new(points: Vec<Vec3>, features: Vec<f32>, dim: usize) -> Result<FeatureCloud> {
        if dim == 0 || features.len() != points.len() * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {} points of dimension {dim}",
                features.len(),
                points.len()
            )));
        }
        Ok(FeatureCloud { points, features, dim, provenance: Vec::new() })
    }

    /// Cloud of the covered mesh vertices themselves.
    pub fn from_vertices(mesh: &TriangleMesh, vf: &VertexFeatures) -> Result<FeatureCloud> {
        check_sizes(mesh, vf)?;
        let mut first_face = vec![usize::MAX; mesh.vertex_count()];
        let mut corner = vec![0usize; mesh.vertex_count()];
        for (fi, f) in mesh.faces().iter().enumerate() {
            for (k, &v) in f.iter().enumerate() {
                if first_face[v] == usize::MAX {
                    first_face[v] = fi;
                    corner[v] = k;
                }
            }
        }
        let mut cloud = FeatureCloud { points: Vec::new(), features: Vec::new(), dim: vf.dim(), provenance: Vec::new() };
        for (v, p) in mesh.vertices().iter().enumerate() {
            // vertices on no face carry no surface information
            if !vf.is_covered(v) || first_face[v] == usize::MAX {
                continue;
            }
            let mut bary = [0.0; 3];
            bary[corner[v]] = 1.0;
            cloud.points.push(*p);
            cloud.features.extend_from_slice(vf.feature(v));
            cloud.provenance.push(SurfaceSample { point: *p, face_id: first_face[v], bary });
        }
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn provenance(&self) -> &[SurfaceSample] {
        &self.provenance
    }

    /// Same features at transformed positions.
    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> FeatureCloud {
        FeatureCloud {
            points: self.points.iter().map(f).collect(),
            features: self.features.clone(),
            dim: self.dim,
            provenance: self.provenance.clone(),
        }
    }

    /// The cloud with points reordered so that new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> FeatureCloud {
        FeatureCloud {
            points: perm.iter().map(|&i| self.points[i]).collect(),
            features: perm.iter().flat_map(|&i| self.feature(i).iter().copied()).collect(),
            dim: self.dim,
            provenance: if self.provenance.is_empty() {
                Vec::new()
            } else {
                perm.iter().map(|&i| self.provenance[i]).collect()
            },
        }
    }
}

fn check_sizes(mesh: &TriangleMesh, vf: &VertexFeatures) -> Result<()> {
    if vf.len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} vertex features for {} vertices",
            vf.len(),
            mesh.vertex_count()
        )));
    }
    Ok(())
}

/// Barycentric interpolation of vertex features at surface samples.
///
/// Samples on faces with an uncovered vertex are dropped; the number dropped
/// is returned alongside the cloud.
pub fn interpolate_features(
    vf: &VertexFeatures,
    mesh: &TriangleMesh,
    samples: &[SurfaceSample],
) -> Result<(FeatureCloud, usize)> {
    check_sizes(mesh, vf)?;
    let dim = vf.dim();
    let mut cloud = FeatureCloud { points: Vec::with_capacity(samples.len()), features: Vec::with_capacity(samples.len() * dim), dim, provenance: Vec::with_capacity(samples.len()) };
    let mut dropped = 0;
    for s in samples {
        let face = mesh
            .faces()
            .get(s.face_id)
            .ok_or_else(|| Error::DimensionMismatch(format!("sample face {} out of range", s.face_id)))?;
        if face.iter().any(|&v| !vf.is_covered(v)) {
            dropped += 1;
            continue;
        }
        let [fa, fb, fc] = [vf.feature(face[0]), vf.feature(face[1]), vf.feature(face[2])];
        let [a, b, c] = s.bary;
        for k in 0..dim {
            cloud.features.push((a * fa[k] as f64 + b * fb[k] as f64 + c * fc[k] as f64) as f32);
        }
        cloud.points.push(s.point);
        cloud.provenance.push(*s);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} of {} samples on uncovered faces", samples.len());
    }
    Ok((cloud, dropped))
}
