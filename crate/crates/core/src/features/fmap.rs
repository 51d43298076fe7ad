use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FMAP";
const VERSION: u32 = 1;
const HEADER_BYTES: usize = 24;

/// A `P`×`P` grid of `d`-dimensional patch features for one rendered image.
///
/// Storage is row-major over (patch row, patch column, channel).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub view_id: u32,
    pub rotation_deg: u32,
    grid: u32,
    dim: u32,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(view_id: u32, rotation_deg: u32, grid: u32, dim: u32, data: Vec<f32>) -> Result<FeatureMap> {
        if grid == 0 || dim == 0 {
            return Err(Error::DimensionMismatch("feature grid and dimension must be positive".into()));
        }
        let expected = (grid as usize) * (grid as usize) * (dim as usize);
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} floats for a {grid}x{grid}x{dim} feature map",
                data.len()
            )));
        }
        Ok(FeatureMap { view_id, rotation_deg, grid, dim, data })
    }

    /// Patch-grid side `P`.
    pub fn grid(&self) -> u32 {
        self.grid
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn patch(&self, row: u32, col: u32) -> &[f32] {
        let d = self.dim as usize;
        let o = ((row * self.grid + col) as usize) * d;
        &self.data[o..o + d]
    }

    /// Feature of the patch with flat index `row * P + col`.
    pub fn patch_flat(&self, idx: usize) -> &[f32] {
        let d = self.dim as usize;
        &self.data[idx * d..(idx + 1) * d]
    }

    fn payload_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let payload = self.payload_bytes();
        let mut head = Vec::with_capacity(HEADER_BYTES);
        head.extend_from_slice(MAGIC);
        for v in [VERSION, self.view_id, self.rotation_deg, self.grid, self.dim] {
            head.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&head)?;
        w.write_all(&payload)?;
        w.write_all(&crc32fast::hash(&payload).to_le_bytes())?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<FeatureMap> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        FeatureMap::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FeatureMap> {
        if bytes.len() < HEADER_BYTES + 4 {
            return Err(Error::Format(format!("FMAP file too short ({} bytes)", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("bad FMAP magic".into()));
        }
        let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let (version, view_id, rotation_deg, grid, dim) = (u(4), u(8), u(12), u(16), u(20));
        if version != VERSION {
            return Err(Error::Format(format!("unsupported FMAP version {version}")));
        }
        let floats = (grid as u64) * (grid as u64) * (dim as u64);
        let expected = HEADER_BYTES as u64 + 4 * floats + 4;
        if bytes.len() as u64 != expected {
            return Err(Error::Format(format!(
                "FMAP is {} bytes, expected {expected} for P={grid}, d={dim}",
                bytes.len()
            )));
        }
        let end = bytes.len() - 4;
        let payload = &bytes[HEADER_BYTES..end];
        let stored = u(end);
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        FeatureMap::new(view_id, rotation_deg, grid, dim, data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Reads and checksum-verifies an FMAP file.
pub fn load_feature_map(path: &Path) -> Result<FeatureMap> {
    FeatureMap::from_bytes(&std::fs::read(path)?)
}
