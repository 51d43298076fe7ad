//! Viewpoints, camera model and a software rasterizer that emits both a
//! shaded image and per-pixel fragment records.

mod camera;
mod fragment;
mod raster;
mod viewpoint;

use std::path::Path;

use image::GrayImage;
use rayon::prelude::*;

pub use camera::Camera;
pub use fragment::{Fragment, FragmentBuffer};
pub use raster::{rasterize, ALBEDO, BACKGROUND};
pub use viewpoint::{
    fibonacci_viewpoints, regular_view_count, regular_viewpoints, up_hint_for, RotationSet,
    ViewScheme, Viewpoint,
};

use crate::error::{Error, Result};
use crate::geometry::NormalizedMesh;

/// Camera placement shared by every view of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    /// Square image side in pixels.
    pub size: u32,
    pub fov_deg: f64,
    /// Camera distance as a multiple of the bounding-box diagonal.
    pub radius_factor: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { size: 518, fov_deg: 40.0, radius_factor: 2.2 }
    }
}

impl RenderConfig {
    pub fn radius(&self, diagonal: f64) -> f64 {
        self.radius_factor * diagonal
    }
}

/// One rendered (view, rotation) pair.
#[derive(Clone, Debug)]
pub struct Render {
    pub view_id: u32,
    pub rotation_deg: u32,
    pub image: GrayImage,
    pub fragments: FragmentBuffer,
}

/// Rotates a row-major `width`×`height` grid counter-clockwise by `deg`
/// degrees. Images and fragment buffers share this so they stay aligned.
pub fn rotate_grid<T: Copy>(data: &[T], width: usize, height: usize, deg: u32) -> Result<Vec<T>> {
    if data.len() != width * height {
        return Err(Error::DimensionMismatch(format!("{} cells for {width}x{height}", data.len())));
    }
    let (w, h) = (width, height);
    let out = match deg % 360 {
        0 => data.to_vec(),
        // result is h wide and w tall
        90 => (0..w).flat_map(|r| (0..h).map(move |c| data[c * w + (w - 1 - r)])).collect(),
        180 => (0..h).flat_map(|r| (0..w).map(move |c| data[(h - 1 - r) * w + (w - 1 - c)])).collect(),
        270 => (0..w).flat_map(|r| (0..h).map(move |c| data[(h - 1 - c) * w + r])).collect(),
        _ => return Err(Error::InvalidArgument(format!("rotation {deg} is not a multiple of 90"))),
    };
    Ok(out)
}

pub fn rotate_image(img: &GrayImage, deg: u32) -> Result<GrayImage> {
    let (w, h) = img.dimensions();
    let data = rotate_grid(img.as_raw(), w as usize, h as usize, deg)?;
    let (w2, h2) = if deg % 180 == 0 { (w, h) } else { (h, w) };
    Ok(GrayImage::from_raw(w2, h2, data).expect("rotation preserves cell count"))
}

/// Renders one viewpoint, including its in-plane rotation.
pub fn render_view(mesh: &NormalizedMesh, vp: &Viewpoint, cfg: &RenderConfig) -> Result<(GrayImage, FragmentBuffer)> {
    let cam = Camera::for_viewpoint(vp, cfg.fov_deg, cfg.size)?;
    let (img, frags) = rasterize(mesh.mesh(), &cam);
    if vp.rotation_deg == 0 {
        return Ok((img, frags));
    }
    Ok((rotate_image(&img, vp.rotation_deg)?, frags.rotated(vp.rotation_deg)?))
}

/// Renders every viewpoint under every rotation of `rotations`, handing each
/// result to `sink`. Views run in parallel; each view is rasterized once and
/// its rotations are derived from that raster. `sink` may be called from
/// several threads in any order.
pub fn render_each<F>(
    mesh: &NormalizedMesh,
    viewpoints: &[Viewpoint],
    rotations: RotationSet,
    cfg: &RenderConfig,
    sink: F,
) -> Result<()>
where
    F: Fn(Render) -> Result<()> + Sync,
{
    viewpoints.par_iter().enumerate().try_for_each(|(vi, vp)| {
        let cam = Camera::for_viewpoint(vp, cfg.fov_deg, cfg.size)?;
        let (img, frags) = rasterize(mesh.mesh(), &cam);
        for &deg in rotations.angles() {
            let (image, fragments) = if deg == 0 {
                (img.clone(), frags.clone())
            } else {
                (rotate_image(&img, deg)?, frags.rotated(deg)?)
            };
            sink(Render { view_id: vi as u32, rotation_deg: deg, image, fragments })?;
        }
        Ok(())
    })
}

/// Collects all renders in (view, rotation) order.
pub fn render_views(
    mesh: &NormalizedMesh,
    viewpoints: &[Viewpoint],
    rotations: RotationSet,
    cfg: &RenderConfig,
) -> Result<Vec<Render>> {
    let out = std::sync::Mutex::new(Vec::new());
    render_each(mesh, viewpoints, rotations, cfg, |r| {
        out.lock().expect("render sink poisoned").push(r);
        Ok(())
    })?;
    let mut out = out.into_inner().expect("render sink poisoned");
    // stable sort keeps the T4 repeats in emission order
    out.sort_by_key(|r| r.view_id);
    Ok(out)
}

pub fn png_name(view_id: u32, rotation_deg: u32) -> String {
    format!("view_{view_id:03}_rot{rotation_deg:03}.png")
}

pub fn frag_name(view_id: u32, rotation_deg: u32) -> String {
    format!("view_{view_id:03}_rot{rotation_deg:03}.frag")
}

pub fn fmap_name(view_id: u32, rotation_deg: u32) -> String {
    format!("view_{view_id:03}_rot{rotation_deg:03}.fmap")
}

/// Parses `(view_id, rotation_deg)` back out of a render file name.
pub fn parse_render_name(name: &str) -> Option<(u32, u32)> {
    let stem = name.strip_prefix("view_")?;
    let (vi, rest) = stem.split_once("_rot")?;
    let deg = rest.split('.').next()?;
    Some((vi.parse().ok()?, deg.parse().ok()?))
}

pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png).map_err(|e| Error::Image(e.to_string()))
}

pub fn load_png(path: &Path) -> Result<GrayImage> {
    Ok(image::open(path).map_err(|e| Error::Image(e.to_string()))?.into_luma8())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_grid_quarter_turns() {
        // 1 2
        // 3 4
        let g = [1, 2, 3, 4];
        assert_eq!(rotate_grid(&g, 2, 2, 90).unwrap(), [2, 4, 1, 3]);
        assert_eq!(rotate_grid(&g, 2, 2, 180).unwrap(), [4, 3, 2, 1]);
        assert_eq!(rotate_grid(&g, 2, 2, 270).unwrap(), [3, 1, 4, 2]);
        let twice = rotate_grid(&rotate_grid(&g, 2, 2, 90).unwrap(), 2, 2, 90).unwrap();
        assert_eq!(twice, rotate_grid(&g, 2, 2, 180).unwrap());
        assert!(rotate_grid(&g, 2, 2, 45).is_err());
    }

    #[test]
    fn rotate_non_square() {
        // 1 2 3
        // 4 5 6
        let g = [1, 2, 3, 4, 5, 6];
        assert_eq!(rotate_grid(&g, 3, 2, 90).unwrap(), [3, 6, 2, 5, 1, 4]);
        let back = rotate_grid(&rotate_grid(&g, 3, 2, 90).unwrap(), 2, 3, 270).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn names_roundtrip() {
        assert_eq!(png_name(7, 90), "view_007_rot090.png");
        assert_eq!(parse_render_name("view_007_rot090.png"), Some((7, 90)));
        assert_eq!(parse_render_name(&fmap_name(123, 270)), Some((123, 270)));
        assert_eq!(parse_render_name("image.png"), None);
    }
}
