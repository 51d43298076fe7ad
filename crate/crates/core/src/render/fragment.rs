use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FRAG";
const RECORD_BYTES: usize = 20;

/// The surface point that won the depth test at one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fragment {
    /// Face index, or [`Fragment::EMPTY`].
    pub face: i32,
    pub bary: [f32; 3],
    /// View-space depth; infinite for empty pixels.
    pub depth: f32,
}

impl Fragment {
    pub const EMPTY: i32 = -1;

    pub fn empty() -> Fragment {
        Fragment { face: Self::EMPTY, bary: [0.0; 3], depth: f32::INFINITY }
    }

    pub fn is_covered(&self) -> bool {
        self.face >= 0
    }
}

/// Row-major grid of fragments.
#[derive(Clone, Debug, PartialEq)]
pub struct FragmentBuffer {
    width: u32,
    height: u32,
    data: Vec<Fragment>,
}

impl FragmentBuffer {
    pub fn empty(width: u32, height: u32) -> FragmentBuffer {
        FragmentBuffer { width, height, data: vec![Fragment::empty(); (width * height) as usize] }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<Fragment>) -> Result<FragmentBuffer> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::DimensionMismatch(format!(
                "{} fragments for a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(FragmentBuffer { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[Fragment] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Fragment] {
        &mut self.data
    }

    /// Fragment at column `x`, row `y`.
    pub fn get(&self, x: u32, y: u32) -> Fragment {
        self.data[(y * self.width + x) as usize]
    }

    pub fn covered_count(&self) -> usize {
        self.data.iter().filter(|f| f.is_covered()).count()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(12 + self.data.len() * RECORD_BYTES);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&self.width.to_le_bytes());
        buf.extend_from_slice(&self.height.to_le_bytes());
        for f in &self.data {
            buf.extend_from_slice(&f.face.to_le_bytes());
            for b in f.bary {
                buf.extend_from_slice(&b.to_le_bytes());
            }
            buf.extend_from_slice(&f.depth.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<FragmentBuffer> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing FRAG header".into()));
        }
        let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let n = (width as usize)
            .checked_mul(height as usize)
            .ok_or_else(|| Error::Format("fragment grid too large".into()))?;
        if bytes.len() != 12 + n * RECORD_BYTES {
            return Err(Error::Format(format!(
                "FRAG payload is {} bytes, expected {} for {width}x{height}",
                bytes.len() - 12,
                n * RECORD_BYTES
            )));
        }
        let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let data = (0..n)
            .map(|i| {
                let o = 12 + i * RECORD_BYTES;
                Fragment {
                    face: i32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()),
                    bary: [f32_at(o + 4), f32_at(o + 8), f32_at(o + 12)],
                    depth: f32_at(o + 16),
                }
            })
            .collect();
        Ok(FragmentBuffer { width, height, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<FragmentBuffer> {
        FragmentBuffer::read_from(std::fs::File::open(path)?)
    }

    /// The grid rotated counter-clockwise by `deg` (a multiple of 90).
    pub fn rotated(&self, deg: u32) -> Result<FragmentBuffer> {
        let data = super::rotate_grid(&self.data, self.width as usize, self.height as usize, deg)?;
        let (width, height) = if deg % 180 == 0 { (self.width, self.height) } else { (self.height, self.width) };
        Ok(FragmentBuffer { width, height, data })
    }
}
