use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NormalizedMesh, TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// A point on a mesh face together with its barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub point: Vec3,
    pub face_id: usize,
    pub bary: [f64; 3],
}

/// Draws `n` area-weighted uniform samples from the surface of `mesh`.
pub fn sample_surface(mesh: &NormalizedMesh, n: usize, seed: u64) -> Result<Vec<SurfaceSample>> {
    sample_mesh(mesh.mesh(), n, seed)
}

/// Same as [`sample_surface`] on an arbitrary mesh.
pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<SurfaceSample>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let areas: Vec<f64> = (0..mesh.face_count()).map(|f| mesh.face_area(f)).collect();
    // zero-area faces simply get zero weight
    let dist = WeightedIndex::new(&areas)
        .map_err(|_| Error::DegenerateMesh("total surface area is zero".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let face_id = dist.sample(&mut rng);
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let s = r1.sqrt();
            let bary = [1.0 - s, s * (1.0 - r2), s * r2];
            let [a, b, c] = mesh.triangle(face_id);
            SurfaceSample { point: a * bary[0] + b * bary[1] + c * bary[2], face_id, bary }
        })
        .collect();
    Ok(samples)
}
