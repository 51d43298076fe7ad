use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// A camera position on a sphere around the origin plus an in-plane image
/// rotation applied after rendering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewpoint {
    pub position: Vec3,
    pub up_hint: Vec3,
    pub rotation_deg: u32,
}

impl Viewpoint {
    pub fn new(position: Vec3) -> Viewpoint {
        Viewpoint { position, up_hint: up_hint_for(&position), rotation_deg: 0 }
    }

    pub fn with_rotation(mut self, deg: u32) -> Viewpoint {
        self.rotation_deg = deg;
        self
    }
}

/// Global +y, or +x when the view direction is within 1° of the y axis.
pub fn up_hint_for(position: &Vec3) -> Vec3 {
    let dir = position.normalize();
    if dir.y.abs() >= 1f64.to_radians().cos() {
        Vec3::x()
    } else {
        Vec3::y()
    }
}

/// Fibonacci lattice: uniform-in-z latitudes with golden-angle azimuth steps.
pub fn fibonacci_viewpoints(n: usize, radius: f64) -> Result<Vec<Viewpoint>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one viewpoint".into()));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Ok((0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Viewpoint::new(Vec3::new(rho * phi.cos(), rho * phi.sin(), z) * radius)
        })
        .collect())
}

/// Number of regular viewpoints at `level`: `2 + 2·L·(L+1)`.
pub fn regular_view_count(level: u32) -> usize {
    let l = level as usize;
    2 + 2 * l * (l + 1)
}

/// Latitude/longitude partition of the sphere. Level `L` uses an angular
/// step of `180/(L+1)` degrees: the two poles plus `L` latitude rings of
/// `2(L+1)` points each. Level 1 is the octahedron.
pub fn regular_viewpoints(level: u32, radius: f64) -> Result<Vec<Viewpoint>> {
    if !(1..=7).contains(&level) {
        return Err(Error::InvalidArgument(format!("regular level {level} outside 1..=7")));
    }
    let step = std::f64::consts::PI / (level + 1) as f64;
    let mut out = vec![Viewpoint::new(Vec3::new(0.0, 0.0, radius))];
    for ring in 1..=level {
        let theta = step * ring as f64;
        for j in 0..2 * (level + 1) {
            let phi = step * j as f64;
            let p = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            // snap cos/sin round-off so axis directions are exact
            out.push(Viewpoint::new(p.map(|c| if c.abs() < 1e-15 { 0.0 } else { c }) * radius));
        }
    }
    out.push(Viewpoint::new(Vec3::new(0.0, 0.0, -radius)));
    Ok(out)
}

/// Viewpoint placement scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViewScheme {
    Fibonacci,
    Regular,
}

impl ViewScheme {
    /// `n` viewpoints; for the regular scheme `n` must be one of the level
    /// counts 6, 14, 26, 42, 62, 86, 114.
    pub fn viewpoints(self, n: usize, radius: f64) -> Result<Vec<Viewpoint>> {
        match self {
            ViewScheme::Fibonacci => fibonacci_viewpoints(n, radius),
            ViewScheme::Regular => {
                let level = (1..=7).find(|&l| regular_view_count(l) == n).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "regular scheme supports 6, 14, 26, 42, 62, 86 or 114 views, not {n}"
                    ))
                })?;
                regular_viewpoints(level, radius)
            }
        }
    }
}

impl fmt::Display for ViewScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViewScheme::Fibonacci => "fib",
            ViewScheme::Regular => "reg",
        })
    }
}

impl FromStr for ViewScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fib" | "fibonacci" => Ok(ViewScheme::Fibonacci),
            "reg" | "regular" => Ok(ViewScheme::Regular),
            _ => Err(Error::InvalidArgument(format!("unknown view scheme `{s}`"))),
        }
    }
}

/// Set of in-plane rotations rendered per viewpoint.
///
/// `T4` is the control that repeats the unrotated image four times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RotationSet {
    R1,
    R2,
    R3,
    R4,
    T4,
}

impl RotationSet {
    pub fn angles(self) -> &'static [u32] {
        match self {
            RotationSet::R1 => &[0],
            RotationSet::R2 => &[0, 180],
            RotationSet::R3 => &[0, 90, 270],
            RotationSet::R4 => &[0, 90, 180, 270],
            RotationSet::T4 => &[0, 0, 0, 0],
        }
    }
}

impl fmt::Display for RotationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RotationSet::R1 => "1",
            RotationSet::R2 => "2",
            RotationSet::R3 => "3",
            RotationSet::R4 => "4",
            RotationSet::T4 => "t4",
        })
    }
}

impl FromStr for RotationSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" => Ok(RotationSet::R1),
            "2" => Ok(RotationSet::R2),
            "3" => Ok(RotationSet::R3),
            "4" => Ok(RotationSet::R4),
            "t4" => Ok(RotationSet::T4),
            _ => Err(Error::InvalidArgument(format!("unknown rotation set `{s}`"))),
        }
    }
}
