//! Glue for the common end-to-end paths.

use crate::error::Result;
use crate::features::{interpolate_features, synthetic_features, FeatureCloud, VertexFeatures};
use crate::geometry::{normalize, sample_surface, NormalizedMesh, Plane, TriangleMesh};
use crate::symmetry::{detect_with_stats, CandidatePlane, DetectionConfig, DetectionStats};

/// Parameters of the synthetic-feature path.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSetup {
    pub dim: usize,
    pub noise: f64,
    pub points: usize,
    pub seed: u64,
}

impl Default for SyntheticSetup {
    fn default() -> Self {
        SyntheticSetup { dim: 32, noise: 0.01, points: 10_000, seed: 0 }
    }
}

/// Moves planes given in input-mesh coordinates into normalized coordinates.
pub fn planes_to_normalized(mesh: &NormalizedMesh, planes: &[Plane]) -> Vec<Plane> {
    planes.iter().map(|p| p.translated(&-mesh.centroid_applied())).collect()
}

/// Samples the surface and interpolates vertex features. Returns the cloud
/// and the number of samples dropped on uncovered faces.
pub fn feature_cloud(mesh: &NormalizedMesh, vf: &VertexFeatures, points: usize, seed: u64) -> Result<(FeatureCloud, usize)> {
    let samples = sample_surface(mesh, points, seed)?;
    interpolate_features(vf, mesh.mesh(), &samples)
}

/// Normalizes `mesh`, attaches synthetic features invariant under `planes`
/// (input-mesh coordinates) and detects planes. Returned planes are in
/// normalized coordinates.
pub fn detect_synthetic(
    mesh: &TriangleMesh,
    planes: &[Plane],
    setup: &SyntheticSetup,
    cfg: &DetectionConfig,
) -> Result<(NormalizedMesh, Vec<CandidatePlane>, DetectionStats)> {
    let nm = normalize(mesh)?;
    let local = planes_to_normalized(&nm, planes);
    let vf = synthetic_features(&nm, &local, setup.dim, setup.noise, setup.seed)?;
    let (cloud, _) = feature_cloud(&nm, &vf, setup.points, setup.seed)?;
    let (found, stats) = detect_with_stats(&cloud, nm.diagonal(), cfg)?;
    Ok((nm, found, stats))
}
