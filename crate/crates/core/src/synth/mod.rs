//! Deterministic test shapes with known reflective symmetry planes.

mod builders;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use builders::{box_union, icosphere, ngon_prism};

use crate::error::{Error, Result};
use crate::geometry::{normalize, sample_surface, save_obj, Plane, TriangleMesh, Vec3};
use crate::symmetry::ReflectionChamfer;

/// Shape families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Cube,
    Cuboid,
    LShape,
    NgonPrism(u32),
    Blob,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::Cube => f.write_str("cube"),
            ShapeKind::Cuboid => f.write_str("cuboid"),
            ShapeKind::LShape => f.write_str("lshape"),
            ShapeKind::NgonPrism(n) => write!(f, "prism{n}"),
            ShapeKind::Blob => f.write_str("blob"),
        }
    }
}

impl FromStr for ShapeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "cube" => Ok(ShapeKind::Cube),
            "cuboid" => Ok(ShapeKind::Cuboid),
            "lshape" | "l" => Ok(ShapeKind::LShape),
            "blob" => Ok(ShapeKind::Blob),
            _ => {
                let n = s
                    .strip_prefix("prism")
                    .or_else(|| s.strip_prefix("ngon"))
                    .map(|r| r.trim_start_matches([':', '_', '-']))
                    .and_then(|r| r.parse::<u32>().ok())
                    .filter(|&n| n >= 3)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown shape `{s}`")))?;
                Ok(ShapeKind::NgonPrism(n))
            }
        }
    }
}

/// A generated mesh with its exact symmetry planes.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthShape {
    pub name: String,
    pub seed: u64,
    pub mesh: TriangleMesh,
    /// Ground-truth planes in mesh coordinates.
    pub gt: Vec<Plane>,
    /// Further exact symmetries not listed in `gt` (the cube's diagonal planes).
    pub extended_gt: Vec<Plane>,
}

fn axis_planes() -> Vec<Plane> {
    [Vec3::x(), Vec3::y(), Vec3::z()].iter().map(|n| Plane::new(*n, 0.0).unwrap()).collect()
}

/// Moves planes through the origin so they pass through `c`.
fn through(planes: Vec<Plane>, c: Vec3) -> Vec<Plane> {
    planes.iter().map(|p| p.translated(&c)).collect()
}

fn cube_diagonal_planes() -> Vec<Plane> {
    [
        Vec3::new(1.0, 1.0, 0.0),
        Vec3::new(1.0, -1.0, 0.0),
        Vec3::new(1.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, -1.0),
        Vec3::new(0.0, 1.0, 1.0),
        Vec3::new(0.0, 1.0, -1.0),
    ]
    .iter()
    .map(|n| Plane::new(*n, 0.0).unwrap())
    .collect()
}

/// Builds a shape centered on its bounding box. `tessellation` controls the
/// number of subdivisions per face (sphere subdivision level for blobs).
pub fn make_shape(kind: ShapeKind, seed: u64, tessellation: usize) -> Result<SynthShape> {
    if tessellation == 0 {
        return Err(Error::InvalidArgument("tessellation must be at least 1".into()));
    }
    let t = tessellation;
    let (mesh, gt, extended_gt) = match kind {
        // box unions are built in the positive octant; their mirrors pass through the box center
        ShapeKind::Cube => {
            let c = Vec3::repeat(0.5);
            (box_union(&[[0, 0, 0]], Vec3::repeat(1.0), t), through(axis_planes(), c), through(cube_diagonal_planes(), c))
        }
        ShapeKind::Cuboid => {
            let c = Vec3::new(0.5, 1.0, 1.5);
            (box_union(&[[0, 0, 0]], Vec3::new(1.0, 2.0, 3.0), t), through(axis_planes(), c), vec![])
        }
        ShapeKind::LShape => {
            let cells = [[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]];
            (box_union(&cells, Vec3::repeat(1.0), t), vec![Plane::new(Vec3::z(), -0.5)?], vec![])
        }
        ShapeKind::NgonPrism(n) => {
            if n < 3 {
                return Err(Error::InvalidArgument("prism needs at least 3 sides".into()));
            }
            let mut planes: Vec<Plane> = (0..n)
                .map(|m| {
                    let a = std::f64::consts::PI * m as f64 / n as f64;
                    Plane::new(Vec3::new(-a.sin(), a.cos(), 0.0), 0.0).map(|p| p.canonical())
                })
                .collect::<Result<_>>()?;
            planes.push(Plane::new(Vec3::z(), 0.0)?);
            (ngon_prism(n as usize, 1.0, 0.8, t), planes, vec![])
        }
        ShapeKind::Blob => (blob_mesh(seed, t), vec![], vec![]),
    };
    let (lo, hi) = mesh.aabb();
    let center = (lo + hi) * 0.5;
    let mesh = mesh.translated(&-center);
    let gt = gt.iter().map(|p| p.translated(&-center)).collect();
    let extended_gt = extended_gt.iter().map(|p| p.translated(&-center)).collect();
    Ok(SynthShape { name: kind.to_string(), seed, mesh, gt, extended_gt })
}

/// Icosphere with a few large, randomly placed radial lobes of unequal size.
fn blob_mesh(seed: u64, level: usize) -> TriangleMesh {
    let sphere = icosphere(level.min(6));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lobes: Vec<(Vec3, f64)> = (0..5)
        .map(|i| {
            let dir = random_unit(&mut rng);
            // strictly decreasing amplitudes so no two lobes can swap under a mirror
            (dir, 1.6 - 0.25 * i as f64 + rng.random_range(0.0..0.1))
        })
        .collect();
    sphere.map_vertices(|u| {
        let r = 0.35
            + lobes
                .iter()
                .map(|(c, a)| a * (-(u - c).norm_squared() / (2.0 * 0.3 * 0.3)).exp())
                .sum::<f64>();
        u * r
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let l = v.norm();
        if l > 0.1 && l <= 1.0 {
            return v / l;
        }
    }
}

/// Uniformly distributed rotation from unit quaternions
/// `(√(1-u₁) sin 2πu₂, √(1-u₁) cos 2πu₂, √u₁ sin 2πu₃, √u₁ cos 2πu₃)`.
pub fn uniform_rotation(seed: u64) -> Rotation3<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(b * (tau * u3).cos(), a * (tau * u2).sin(), a * (tau * u2).cos(), b * (tau * u3).sin());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Applies `r` about the origin to the mesh and every plane.
pub fn rotate_shape(shape: &SynthShape, r: &Rotation3<f64>) -> SynthShape {
    SynthShape {
        name: shape.name.clone(),
        seed: shape.seed,
        mesh: shape.mesh.rotated(r),
        gt: shape.gt.iter().map(|p| p.rotated(r)).collect(),
        extended_gt: shape.extended_gt.iter().map(|p| p.rotated(r)).collect(),
    }
}

pub fn random_rotation(shape: &SynthShape, seed: u64) -> SynthShape {
    rotate_shape(shape, &uniform_rotation(seed))
}

/// Smallest normalized reflection Chamfer over `n_planes` random planes
/// through the bounding-box center, on `n_samples` surface samples.
pub fn min_random_plane_chamfer(mesh: &TriangleMesh, n_planes: usize, n_samples: usize, seed: u64) -> Result<f64> {
    let nm = normalize(mesh)?;
    let pts: Vec<Vec3> = sample_surface(&nm, n_samples, seed)?.iter().map(|s| s.point).collect();
    let rc = ReflectionChamfer::new(&pts, nm.diagonal())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb10b);
    let mut best = f64::INFINITY;
    for _ in 0..n_planes {
        let plane = Plane::new(random_unit(&mut rng), 0.0)?;
        best = best.min(rc.full(&plane));
    }
    Ok(best)
}

/// Serializes planes as a JSON array of `[a, b, c, d]`.
pub fn gt_to_json(planes: &[Plane]) -> Result<String> {
    let v: Vec<[f64; 4]> = planes.iter().map(|p| p.to_vec4()).collect();
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Writes `<dir>/<stem>.obj` and `<dir>/<stem>.gt.json`.
pub fn export_shape(shape: &SynthShape, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_obj(&shape.mesh, &dir.join(format!("{stem}.obj")))?;
    std::fs::write(dir.join(format!("{stem}.gt.json")), gt_to_json(&shape.gt)?)?;
    Ok(())
}
