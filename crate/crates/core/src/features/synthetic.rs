use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VertexFeatures;
use crate::error::{Error, Result};
use crate::geometry::{NormalizedMesh, Plane, Vec3};

/// Largest reflection group accepted; planes generating a bigger (or an
/// infinite) group are rejected.
pub const MAX_GROUP_ORDER: usize = 256;

/// Affine map `x ↦ m·x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub m: Matrix3<f64>,
    pub t: Vec3,
}

impl Isometry {
    pub fn identity() -> Isometry {
        Isometry { m: Matrix3::identity(), t: Vec3::zeros() }
    }

    pub fn reflection(plane: &Plane) -> Isometry {
        let n = plane.normal();
        Isometry { m: Matrix3::identity() - 2.0 * n * n.transpose(), t: -2.0 * plane.offset() * n }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { m: self.m * other.m, t: self.m * other.t + self.t }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.m * x + self.t
    }

    fn close_to(&self, other: &Isometry, scale: f64) -> bool {
        (self.m - other.m).amax() < 1e-9 && (self.t - other.t).amax() < 1e-9 * scale
    }
}

/// All isometries generated by reflections in `planes`, identity first.
pub fn reflection_group(planes: &[Plane], scale: f64) -> Result<Vec<Isometry>> {
    let gens: Vec<Isometry> = planes.iter().map(Isometry::reflection).collect();
    let mut group = vec![Isometry::identity()];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier];
        frontier += 1;
        for s in &gens {
            let h = s.compose(&g);
            if !group.iter().any(|e| e.close_to(&h, scale)) {
                if group.len() == MAX_GROUP_ORDER {
                    return Err(Error::InvalidArgument(format!(
                        "planes generate a reflection group larger than {MAX_GROUP_ORDER}"
                    )));
                }
                group.push(h);
            }
        }
    }
    Ok(group)
}

/// A smooth vector field that is invariant under a finite reflection group.
///
/// Channel `c` is the group average of `sin(ω_c·x + φ_c)`, with random
/// frequencies proportional to `1/scale`, so the value at `x` depends only
/// on the orbit of `x`.
#[derive(Clone, Debug)]
pub struct SymmetricField {
    /// Per group element and channel: pulled-back frequency and phase.
    terms: Vec<(Vec3, f64)>,
    order: usize,
    dim: usize,
}

impl SymmetricField {
    pub fn new(planes: &[Plane], dim: usize, scale: f64, seed: u64) -> Result<SymmetricField> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!("feature dimension {dim} below 3")));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument("field scale must be positive".into()));
        }
        let group = reflection_group(planes, scale)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves: Vec<(Vec3, f64)> = (0..dim)
            .map(|_| {
                let dir = loop {
                    let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let l = v.norm();
                    if l > 0.1 && l <= 1.0 {
                        break v / l;
                    }
                };
                let k = std::f64::consts::TAU * rng.random_range(1.0..3.0) / scale;
                (dir * k, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let mut terms = Vec::with_capacity(group.len() * dim);
        for g in &group {
            for (w, phi) in &waves {
                // w·(m x + t) + φ = (mᵀ w)·x + (w·t + φ)
                terms.push((g.m.transpose() * w, w.dot(&g.t) + phi));
            }
        }
        Ok(SymmetricField { terms, order: group.len(), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group_order(&self) -> usize {
        self.order
    }

    pub fn eval_into(&self, x: &Vec3, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for g in 0..self.order {
            let terms = &self.terms[g * self.dim..(g + 1) * self.dim];
            for (o, (w, c)) in out.iter_mut().zip(terms) {
                *o += (w.dot(x) + c).sin();
            }
        }
        let inv = 1.0 / self.order as f64;
        out.iter_mut().for_each(|o| *o *= inv);
    }

    pub fn eval(&self, x: &Vec3) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }
}

/// Per-vertex features that are exactly invariant under the reflections in
/// `planes` before noise, plus i.i.d. uniform noise in `[-noise, noise]`.
/// Every vertex is marked visible once.
pub fn synthetic_features(mesh: &NormalizedMesh, planes: &[Plane], dim: usize, noise: f64, seed: u64) -> Result<VertexFeatures> {
    let field = SymmetricField::new(planes, dim, mesh.diagonal(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_4015e);
    let n = mesh.mesh().vertex_count();
    let mut data = Vec::with_capacity(n * dim);
    let mut buf = vec![0.0; dim];
    for v in mesh.mesh().vertices() {
        field.eval_into(v, &mut buf);
        for &b in &buf {
            let e = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
            data.push((b + e) as f32);
        }
    }
    VertexFeatures::new(dim, data, vec![1; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_planes() -> Vec<Plane> {
        vec![
            Plane::new(Vec3::x(), 0.0).unwrap(),
            Plane::new(Vec3::y(), 0.0).unwrap(),
            Plane::new(Vec3::z(), 0.0).unwrap(),
        ]
    }

    #[test]
    fn group_orders() {
        assert_eq!(reflection_group(&[], 1.0).unwrap().len(), 1);
        assert_eq!(reflection_group(&axis_planes()[..1], 1.0).unwrap().len(), 2);
        assert_eq!(reflection_group(&axis_planes(), 1.0).unwrap().len(), 8);
        // mirrors at 0° and 60° generate the dihedral group of order 6
        let a = Plane::new(Vec3::x(), 0.0).unwrap();
        let b = Plane::new(Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0), 0.0).unwrap();
        assert_eq!(reflection_group(&[a, b], 1.0).unwrap().len(), 6);
    }

    #[test]
    fn parallel_planes_are_rejected() {
        let a = Plane::new(Vec3::x(), 0.0).unwrap();
        let b = Plane::new(Vec3::x(), -0.3).unwrap();
        assert!(reflection_group(&[a, b], 1.0).is_err());
    }

    #[test]
    fn field_is_invariant() {
        let planes = vec![Plane::new(Vec3::new(1.0, 1.0, 0.0), -0.2).unwrap()];
        let f = SymmetricField::new(&planes, 16, 2.0, 3).unwrap();
        let x = Vec3::new(0.3, -0.4, 0.7);
        let a = f.eval(&x);
        let b = f.eval(&planes[0].reflect(&x));
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
        assert!(SymmetricField::new(&planes, 2, 1.0, 0).is_err());
    }
}
