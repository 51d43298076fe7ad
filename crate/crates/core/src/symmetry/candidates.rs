use std::fmt;

use serde::{Deserialize, Serialize};

use super::MatchTrio;
use crate::features::FeatureCloud;
use crate::geometry::{Plane, Vec3};

/// Which points produced a candidate plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Perpendicular bisector of two points.
    Pair(usize, usize),
    /// Plane through three points.
    Trio(usize, usize, usize),
    /// Supplied from outside the matching stage.
    External,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Pair(a, b) => write!(f, "pair({a},{b})"),
            Source::Trio(i, j, k) => write!(f, "trio({i},{j},{k})"),
            Source::External => f.write_str("external"),
        }
    }
}

/// A plane hypothesis and, once verified, its Chamfer score and confidence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidatePlane {
    pub plane: Plane,
    pub source: Source,
    pub chamfer: Option<f64>,
    pub confidence: Option<f64>,
}

impl CandidatePlane {
    pub fn new(plane: Plane, source: Source) -> CandidatePlane {
        CandidatePlane { plane: plane.canonical(), source, chamfer: None, confidence: None }
    }
}

/// Perpendicular bisector of `a` and `b`, or `None` when they nearly coincide.
pub fn bisector(a: &Vec3, b: &Vec3, min_len: f64) -> Option<Plane> {
    let d = b - a;
    if d.norm() < min_len {
        return None;
    }
    Plane::from_point_normal(&((a + b) * 0.5), &d).ok()
}

/// Plane through three points, or `None` when they are nearly collinear.
pub fn plane_through(a: &Vec3, b: &Vec3, c: &Vec3, min_cross: f64) -> Option<Plane> {
    let n = (b - a).cross(&(c - a));
    if n.norm() < min_cross {
        return None;
    }
    Plane::from_point_normal(&((a + b + c) / 3.0), &n).ok()
}

/// Up to four candidates per trio: the bisectors of `(i,j)`, `(i,k)`,
/// `(j,k)` and the plane through all three points. Pairs closer than
/// `1e-6·diag` and trios whose cross product is below `1e-9·diag²` are
/// skipped.
pub fn candidate_planes(cloud: &FeatureCloud, trios: &[MatchTrio], diag: f64) -> Vec<CandidatePlane> {
    let pts = cloud.points();
    let (min_len, min_cross) = (1e-6 * diag, 1e-9 * diag * diag);
    let mut out = Vec::with_capacity(trios.len() * 4);
    for t in trios {
        for (a, b) in [(t.i, t.j), (t.i, t.k), (t.j, t.k)] {
            if let Some(p) = bisector(&pts[a], &pts[b], min_len) {
                out.push(CandidatePlane::new(p, Source::Pair(a, b)));
            }
        }
        if let Some(p) = plane_through(&pts[t.i], &pts[t.j], &pts[t.k], min_cross) {
            out.push(CandidatePlane::new(p, Source::Trio(t.i, t.j, t.k)));
        }
    }
    out
}

/// Keeps candidates whose distance to the origin is at most `frac·diag`.
pub fn filter_by_origin(cands: Vec<CandidatePlane>, diag: f64, frac: f64) -> Vec<CandidatePlane> {
    let limit = frac * diag;
    cands.into_iter().filter(|c| c.plane.offset().abs() <= limit).collect()
}
