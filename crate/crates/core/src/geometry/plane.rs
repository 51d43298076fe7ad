use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// An oriented plane `{x : normal·x + offset = 0}` with a unit normal.
///
/// `(n, d)` and `(-n, -d)` describe the same point set; [`Plane::canonical`]
/// picks the representative whose first nonzero normal component is positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    normal: Vec3,
    offset: f64,
}

impl Plane {
    /// Builds a plane from any nonzero normal; both terms are rescaled so the
    /// normal has unit length.
    pub fn new(normal: Vec3, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !len.is_finite() || len <= f64::MIN_POSITIVE || !offset.is_finite() {
            return Err(Error::InvalidPlane(format!(
                "normal {:?} / offset {offset} cannot be normalized",
                normal.as_slice()
            )));
        }
        Ok(Plane { normal: normal / len, offset: offset / len })
    }

    /// Plane through `point` with the given (not necessarily unit) normal.
    pub fn from_point_normal(point: &Vec3, normal: &Vec3) -> Result<Self> {
        let len = normal.norm();
        if !len.is_finite() || len <= f64::MIN_POSITIVE {
            return Err(Error::InvalidPlane("zero normal".into()));
        }
        let n = normal / len;
        Plane::new(n, -n.dot(point))
    }

    /// Reads the `(a, b, c, d)` form; the normal part need not be unit length.
    pub fn from_vec4(v: [f64; 4]) -> Result<Self> {
        Plane::new(Vec3::new(v[0], v[1], v[2]), v[3])
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The point of the plane closest to the origin.
    pub fn point(&self) -> Vec3 {
        -self.offset * self.normal
    }

    pub fn to_vec4(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.offset]
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) + self.offset
    }

    /// Mirror image of `p`.
    #[inline]
    pub fn reflect(&self, p: &Vec3) -> Vec3 {
        p - 2.0 * self.signed_distance(p) * self.normal
    }

    pub fn flipped(&self) -> Plane {
        Plane { normal: -self.normal, offset: -self.offset }
    }

    pub fn canonical(&self) -> Plane {
        for c in self.normal.iter() {
            if *c > 0.0 {
                return *self;
            }
            if *c < 0.0 {
                return self.flipped();
            }
        }
        *self
    }

    /// Plane containing the points of `self` shifted by `t`.
    pub fn translated(&self, t: &Vec3) -> Plane {
        Plane { normal: self.normal, offset: self.offset - self.normal.dot(t) }
    }

    /// Plane containing the points of `self` rotated by `r` about the origin.
    pub fn rotated(&self, r: &Rotation3<f64>) -> Plane {
        Plane { normal: r * self.normal, offset: self.offset }
    }

    /// Angle between the two normals in degrees, ignoring orientation.
    pub fn angle_deg(&self, other: &Plane) -> f64 {
        self.normal.dot(&other.normal).abs().min(1.0).acos().to_degrees()
    }

    /// Offset difference after aligning the orientation of `other` to `self`.
    pub fn offset_gap(&self, other: &Plane) -> f64 {
        if self.normal.dot(&other.normal) >= 0.0 {
            (self.offset - other.offset).abs()
        } else {
            (self.offset + other.offset).abs()
        }
    }
}

/// Reflects `p` across `plane`: `p - 2 (n·(p - c)) n`.
#[inline]
pub fn reflect_point(p: &Vec3, plane: &Plane) -> Vec3 {
    plane.reflect(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_across_yz_plane() {
        let plane = Plane::new(Vec3::x(), 0.0).unwrap();
        assert_eq!(reflect_point(&Vec3::new(1.0, 0.0, 0.0), &plane), Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn points_on_plane_are_fixed() {
        let plane = Plane::new(Vec3::new(1.0, 2.0, -0.5), 0.7).unwrap();
        let on = plane.point() + Vec3::new(2.0, -1.0, 0.0).cross(&plane.normal());
        assert!((reflect_point(&on, &plane) - on).norm() < 1e-12);
    }

    #[test]
    fn reflect_across_offset_plane() {
        let plane = Plane::new(Vec3::y(), -1.0).unwrap();
        let r = reflect_point(&Vec3::new(1.0, 2.0, 3.0), &plane);
        assert!((r - Vec3::new(1.0, 0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn canonical_form_fixes_sign() {
        let p = Plane::new(Vec3::new(0.0, -1.0, 1.0), 0.3).unwrap().canonical();
        assert!(p.normal().y > 0.0);
        assert!((p.offset() + 0.3 / 2f64.sqrt()).abs() < 1e-15);
        let q = Plane::new(Vec3::new(0.0, 0.0, 2.0), 1.0).unwrap();
        assert_eq!(q.canonical(), q);
        assert_eq!(q.flipped().canonical(), q);
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(Plane::new(Vec3::zeros(), 1.0).is_err());
        assert!(Plane::from_vec4([0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn translation_and_rotation_track_points() {
        let plane = Plane::new(Vec3::new(0.3, -0.4, 0.5), 0.25).unwrap();
        let p = plane.point();
        let t = Vec3::new(0.5, -2.0, 1.0);
        assert!(plane.translated(&t).signed_distance(&(p + t)).abs() < 1e-14);
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        assert!(plane.rotated(&r).signed_distance(&(r * p)).abs() < 1e-14);
    }
}
