use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VFEA";
const VERSION: u32 = 1;

/// Per-vertex features and how many renders saw each vertex.
///
/// A vertex with visibility 0 is uncovered and its feature is the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFeatures {
    dim: usize,
    data: Vec<f32>,
    visibility: Vec<u32>,
}

impl VertexFeatures {
    pub fn new(dim: usize, data: Vec<f32>, visibility: Vec<u32>) -> Result<VertexFeatures> {
        if dim == 0 || data.len() != dim * visibility.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} floats for {} vertices of dimension {dim}",
                data.len(),
                visibility.len()
            )));
        }
        Ok(VertexFeatures { dim, data, visibility })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.visibility.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visibility.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn feature(&self, v: usize) -> &[f32] {
        &self.data[v * self.dim..(v + 1) * self.dim]
    }

    pub fn visibility(&self) -> &[u32] {
        &self.visibility
    }

    pub fn is_covered(&self, v: usize) -> bool {
        self.visibility[v] > 0
    }

    pub fn covered_count(&self) -> usize {
        self.visibility.iter().filter(|&&c| c > 0).count()
    }

    pub fn uncovered_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        1.0 - self.covered_count() as f64 / self.len() as f64
    }

    /// Little-endian `VFEA` container: magic, version, vertex count, dimension,
    /// features, visibility counts, CRC32 of everything after the magic.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(12 + 4 * (self.data.len() + self.len()));
        for v in [VERSION, self.len() as u32, self.dim as u32] {
            body.extend_from_slice(&v.to_le_bytes());
        }
        body.extend(self.data.iter().flat_map(|f| f.to_le_bytes()));
        body.extend(self.visibility.iter().flat_map(|c| c.to_le_bytes()));
        let crc = crc32fast::hash(&body);
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&body);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<VertexFeatures> {
        if bytes.len() < 20 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing VFEA header".into()));
        }
        let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        if u(4) != VERSION {
            return Err(Error::Format(format!("unsupported VFEA version {}", u(4))));
        }
        let (n, dim) = (u(8) as usize, u(12) as usize);
        let expected = 16 + 4 * n * dim + 4 * n + 4;
        if bytes.len() != expected {
            return Err(Error::Format(format!("VFEA is {} bytes, expected {expected}", bytes.len())));
        }
        let end = bytes.len() - 4;
        let (stored, computed) = (u(end), crc32fast::hash(&bytes[4..end]));
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let feat_end = 16 + 4 * n * dim;
        let data = bytes[16..feat_end].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        let visibility = bytes[feat_end..end].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        VertexFeatures::new(dim, data, visibility)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<VertexFeatures> {
        VertexFeatures::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_checksum() {
        let vf = VertexFeatures::new(2, vec![1.0, -2.0, 0.0, 0.0, 0.5, 0.25], vec![3, 0, 1]).unwrap();
        let b = vf.to_bytes();
        assert_eq!(VertexFeatures::from_bytes(&b).unwrap(), vf);
        let mut bad = b.clone();
        bad[20] ^= 1;
        assert!(matches!(VertexFeatures::from_bytes(&bad), Err(Error::Checksum { .. })));
        assert!((vf.uncovered_fraction() - 1.0 / 3.0).abs() < 1e-12);
    }
}
