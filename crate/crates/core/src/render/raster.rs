use image::GrayImage;

use super::camera::Camera;
use super::fragment::{Fragment, FragmentBuffer};
use crate::geometry::{TriangleMesh, Vec3};

/// Surface albedo of the flat gray material.
pub const ALBEDO: f64 = 0.7;
/// Background gray level.
pub const BACKGROUND: u8 = 255;

/// View-space vertex carrying barycentric weights of the source triangle.
#[derive(Clone, Copy)]
struct ClipVert {
    v: Vec3,
    bary: Vec3,
}

fn near_plane(cam: &Camera) -> f64 {
    1e-6 * cam.eye().norm()
}

/// Clips the triangle against `z >= near` (Sutherland-Hodgman, one plane).
fn clip_near(tri: [ClipVert; 3], near: f64, out: &mut Vec<ClipVert>) {
    out.clear();
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let (ina, inb) = (a.v.z >= near, b.v.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.v.z) / (b.v.z - a.v.z);
            out.push(ClipVert { v: a.v + (b.v - a.v) * t, bary: a.bary + (b.bary - a.bary) * t });
        }
    }
}

#[inline]
fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Z-buffered, double-sided, perspective-correct rasterization.
///
/// Returns the flat-shaded grayscale image and the winning fragment of every
/// pixel. Depth is view-space `z`. Exact depth ties go to the smaller face id.
pub fn rasterize(mesh: &TriangleMesh, cam: &Camera) -> (GrayImage, FragmentBuffer) {
    let size = cam.size() as usize;
    let mut frags = FragmentBuffer::empty(cam.size(), cam.size());
    let mut shade = vec![BACKGROUND; size * size];
    let mut zbuf = vec![f64::INFINITY; size * size];
    let near = near_plane(cam);
    let mut poly = Vec::with_capacity(4);
    let eye = cam.eye();

    for face in 0..mesh.face_count() {
        let tri = mesh.triangle(face);
        let cross = mesh.face_cross(face);
        let len = cross.norm();
        if len == 0.0 {
            continue;
        }
        // headlight: light sits at the eye
        let centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
        let to_eye = (eye - centroid).normalize();
        let gray = (255.0 * ALBEDO * (cross / len).dot(&to_eye).abs()).round() as u8;

        let cv = |k: usize| {
            let mut bary = Vec3::zeros();
            bary[k] = 1.0;
            ClipVert { v: cam.to_view(&tri[k]), bary }
        };
        clip_near([cv(0), cv(1), cv(2)], near, &mut poly);
        if poly.len() < 3 {
            continue;
        }
        for w in 1..poly.len() - 1 {
            let sub = [poly[0], poly[w], poly[w + 1]];
            let s = sub.map(|c| cam.view_to_screen(&c.v));
            let area = edge(s[0], s[1], s[2]);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            let inv_z = sub.map(|c| 1.0 / c.v.z);
            let xmin = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let xmax = s.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let ymin = s.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let ymax = s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let c0 = (xmin - 0.5).ceil().max(0.0) as usize;
            let r0 = (ymin - 0.5).ceil().max(0.0) as usize;
            if xmax < 0.5 || ymax < 0.5 {
                continue;
            }
            let c1 = ((xmax - 0.5).floor() as usize).min(size - 1);
            let r1 = ((ymax - 0.5).floor() as usize).min(size - 1);
            for r in r0..=r1 {
                let py = r as f64 + 0.5;
                for c in c0..=c1 {
                    let p = (c as f64 + 0.5, py);
                    let l0 = edge(s[1], s[2], p) / area;
                    let l1 = edge(s[2], s[0], p) / area;
                    let l2 = edge(s[0], s[1], p) / area;
                    if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                        continue;
                    }
                    let q = [l0 * inv_z[0], l1 * inv_z[1], l2 * inv_z[2]];
                    let qs = q[0] + q[1] + q[2];
                    let depth = 1.0 / qs;
                    let idx = r * size + c;
                    // faces arrive in ascending id order, so strict `<` keeps the smaller id on ties
                    if !(depth < zbuf[idx]) {
                        continue;
                    }
                    zbuf[idx] = depth;
                    let b = (sub[0].bary * q[0] + sub[1].bary * q[1] + sub[2].bary * q[2]) / qs;
                    frags.data_mut()[idx] = Fragment {
                        face: face as i32,
                        bary: [b.x as f32, b.y as f32, b.z as f32],
                        depth: depth as f32,
                    };
                    shade[idx] = gray;
                }
            }
        }
    }
    let image = GrayImage::from_raw(cam.size(), cam.size(), shade).expect("buffer sized to image");
    (image, frags)
}
