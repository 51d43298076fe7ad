use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureMap, SymmetricField};
use crate::geometry::{NormalizedMesh, Plane, Vec3};
use crate::render::FragmentBuffer;

/// Deterministic stand-in for an image feature extractor.
///
/// A patch's feature is a reflection-invariant field evaluated at the mean
/// surface point seen by the patch's covered pixels, plus uniform noise
/// drawn from a stream keyed by `(seed, view, rotation)`. Empty patches get
/// the zero vector. Identical renders therefore give identical maps, while
/// different rotations of a view disagree only through their noise.
pub struct SyntheticExtractor {
    field: SymmetricField,
    noise: f64,
    seed: u64,
    patch_px: u32,
}

impl SyntheticExtractor {
    /// `planes` are in the normalized coordinates of `mesh`.
    pub fn new(mesh: &NormalizedMesh, planes: &[Plane], dim: usize, noise: f64, seed: u64, patch_px: u32) -> Result<Self> {
        if patch_px == 0 {
            return Err(Error::InvalidArgument("patch size must be positive".into()));
        }
        if !(noise >= 0.0) {
            return Err(Error::InvalidArgument("noise must be non-negative".into()));
        }
        let field = SymmetricField::new(planes, dim, mesh.diagonal(), seed)?;
        Ok(SyntheticExtractor { field, noise, seed, patch_px })
    }

    pub fn extract(&self, mesh: &NormalizedMesh, view_id: u32, rotation_deg: u32, frags: &FragmentBuffer) -> Result<FeatureMap> {
        let (w, h) = (frags.width(), frags.height());
        if w != h || w % self.patch_px != 0 {
            return Err(Error::DimensionMismatch(format!("{w}x{h} image is not a whole number of {} px patches", self.patch_px)));
        }
        let grid = w / self.patch_px;
        let dim = self.field.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((view_id as u64) << 32) | rotation_deg as u64);
        let m = mesh.mesh();
        let mut data = Vec::with_capacity((grid * grid) as usize * dim);
        let mut buf = vec![0.0; dim];
        for pr in 0..grid {
            for pc in 0..grid {
                let (mut sum, mut count) = (Vec3::zeros(), 0usize);
                for y in pr * self.patch_px..(pr + 1) * self.patch_px {
                    for x in pc * self.patch_px..(pc + 1) * self.patch_px {
                        let f = frags.get(x, y);
                        if f.is_covered() {
                            let [a, b, c] = m.triangle(f.face as usize);
                            sum += a * f.bary[0] as f64 + b * f.bary[1] as f64 + c * f.bary[2] as f64;
                            count += 1;
                        }
                    }
                }
                if count > 0 {
                    self.field.eval_into(&(sum / count as f64), &mut buf);
                } else {
                    buf.iter_mut().for_each(|v| *v = 0.0);
                }
                for v in &buf {
                    // drawn for every patch so the stream position is layout-independent
                    let e = if self.noise > 0.0 { rng.random_range(-self.noise..=self.noise) } else { 0.0 };
                    data.push(if count > 0 { (v + e) as f32 } else { 0.0 });
                }
            }
        }
        FeatureMap::new(view_id, rotation_deg, grid, dim as u32, data)
    }
}
