use super::viewpoint::Viewpoint;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Pinhole camera looking at the origin with a square image.
///
/// View space has `x` along `right`, `y` along `up` and `z` along `forward`,
/// so visible points have positive depth `z`. Pixel `(c, r)` has its center
/// at `(c + 0.5, r + 0.5)`; rows grow downward.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    eye: Vec3,
    right: Vec3,
    up: Vec3,
    forward: Vec3,
    focal: f64,
    fov_deg: f64,
    size: u32,
}

impl Camera {
    pub fn look_at_origin(eye: Vec3, up_hint: Vec3, fov_deg: f64, size: u32) -> Result<Camera> {
        if size == 0 || !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::InvalidArgument(format!("bad camera: fov {fov_deg}, size {size}")));
        }
        let dist = eye.norm();
        if !(dist > 0.0) || !dist.is_finite() {
            return Err(Error::InvalidArgument("camera at the origin".into()));
        }
        let forward = -eye / dist;
        let right = forward.cross(&up_hint);
        if right.norm() < 1e-12 {
            return Err(Error::InvalidArgument("up hint parallel to view direction".into()));
        }
        let right = right.normalize();
        let up = right.cross(&forward);
        let focal = 1.0 / (fov_deg.to_radians() * 0.5).tan();
        Ok(Camera { eye, right, up, forward, focal, fov_deg, size })
    }

    /// Camera for a viewpoint, ignoring its in-plane rotation.
    pub fn for_viewpoint(vp: &Viewpoint, fov_deg: f64, size: u32) -> Result<Camera> {
        Camera::look_at_origin(vp.position, vp.up_hint, fov_deg, size)
    }

    /// The same camera rolled so its image equals this camera's image
    /// rotated counter-clockwise by `deg`.
    pub fn rolled(&self, deg: f64) -> Camera {
        let (s, c) = deg.to_radians().sin_cos();
        let mut out = self.clone();
        out.right = c * self.right - s * self.up;
        out.up = s * self.right + c * self.up;
        out
    }

    pub fn eye(&self) -> Vec3 {
        self.eye
    }

    pub fn right(&self) -> Vec3 {
        self.right
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn fov_deg(&self) -> f64 {
        self.fov_deg
    }

    /// `1 / tan(fov / 2)`.
    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn to_view(&self, p: &Vec3) -> Vec3 {
        let d = p - self.eye;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    /// Screen coordinates of a view-space point with positive depth.
    #[inline]
    pub fn view_to_screen(&self, v: &Vec3) -> (f64, f64) {
        let half = self.size as f64 * 0.5;
        ((self.focal * v.x / v.z + 1.0) * half, (1.0 - self.focal * v.y / v.z) * half)
    }

    /// Screen position and depth of a world point, `None` behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let v = self.to_view(p);
        (v.z > 0.0).then(|| {
            let (x, y) = self.view_to_screen(&v);
            (x, y, v.z)
        })
    }

    /// Unit world-space direction of the ray through screen point `(sx, sy)`.
    pub fn ray_dir(&self, sx: f64, sy: f64) -> Vec3 {
        let half = self.size as f64 * 0.5;
        let x = (sx / half - 1.0) / self.focal;
        let y = (1.0 - sy / half) / self.focal;
        (self.forward + x * self.right + y * self.up).normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_projects_to_center() {
        let cam = Camera::look_at_origin(Vec3::new(0.0, 0.0, 5.0), Vec3::y(), 40.0, 64).unwrap();
        let (x, y, z) = cam.project(&Vec3::zeros()).unwrap();
        assert!((x - 32.0).abs() < 1e-12 && (y - 32.0).abs() < 1e-12 && (z - 5.0).abs() < 1e-12);
        assert!(cam.project(&Vec3::new(0.0, 0.0, 6.0)).is_none());
    }

    #[test]
    fn up_is_screen_up() {
        let cam = Camera::look_at_origin(Vec3::new(0.0, 0.0, 5.0), Vec3::y(), 40.0, 64).unwrap();
        let (_, y, _) = cam.project(&Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(y < 32.0);
    }

    #[test]
    fn ray_dir_inverts_projection() {
        let cam = Camera::look_at_origin(Vec3::new(1.0, 2.0, 5.0), Vec3::y(), 40.0, 100).unwrap();
        let p = Vec3::new(0.3, -0.2, 0.1);
        let (sx, sy, _) = cam.project(&p).unwrap();
        let d = cam.ray_dir(sx, sy);
        assert!(((p - cam.eye()).normalize() - d).norm() < 1e-12);
    }

    #[test]
    fn roll_rotates_image_ccw() {
        let cam = Camera::look_at_origin(Vec3::new(0.0, 0.0, 5.0), Vec3::y(), 40.0, 64).unwrap();
        let rolled = cam.rolled(90.0);
        // a point on screen right moves to screen top after a CCW image rotation
        let p = Vec3::new(1.0, 0.0, 0.0);
        let (x0, _, _) = cam.project(&p).unwrap();
        let (x1, y1, _) = rolled.project(&p).unwrap();
        assert!(x0 > 32.0 && (x1 - 32.0).abs() < 1e-9 && y1 < 32.0);
    }
}
