use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::geometry::{Plane, Vec3};
use crate::spatial::{KdTree, NeighborGraph};

const GRAPH_DEGREE: usize = 12;

fn mean_nn(from: &[Vec3], to: &KdTree) -> f64 {
    let mut hint = 0;
    let sum: f64 = from.iter().map(|p| to.nearest_dist2_from(p, &mut hint).expect("non-empty tree")).sum();
    sum / from.len() as f64
}

/// Symmetric Chamfer distance: the average of the mean squared
/// nearest-neighbor distance from `p` to `q` and from `q` to `p`. Exact.
pub fn chamfer_distance(p: &[Vec3], q: &[Vec3]) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptySet);
    }
    let (tp, tq) = (KdTree::new(p), KdTree::new(q));
    Ok(0.5 * (mean_nn(p, &tq) + mean_nn(q, &tp)))
}

/// Chamfer distance between a point set and its mirror image, with
/// coordinates divided by `scale`.
///
/// Reflection is an isometric involution, so both directed terms equal
/// the mean over `p` of the squared distance from its mirror image to the
/// nearest original point; one index over the originals suffices.
///
/// Each point remembers where its last mirror query landed and starts the
/// next descent there, which makes scoring many similar planes cheap. The
/// hints only affect speed, never results.
pub struct ReflectionChamfer<'a> {
    points: &'a [Vec3],
    index: NeighborGraph,
    hints: Vec<AtomicU32>,
    inv_scale2: f64,
}

impl<'a> ReflectionChamfer<'a> {
    pub fn new(points: &'a [Vec3], scale: f64) -> Result<ReflectionChamfer<'a>> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(ReflectionChamfer {
            points,
            index: NeighborGraph::new(points, GRAPH_DEGREE),
            hints: (0..points.len() as u32).map(AtomicU32::new).collect(),
            inv_scale2: 1.0 / (scale * scale),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared mirror distance of point `i`. The descent starts from the
    /// better of the point's remembered hint and the previous answer.
    fn mirror_dist2(&self, plane: &Plane, i: usize, prev: &mut usize) -> f64 {
        let cached = self.hints[i].load(Ordering::Relaxed) as usize;
        let (h, d) = self.index.nearest(&plane.reflect(&self.points[i]), &[cached, *prev]).expect("non-empty");
        self.hints[i].store(h as u32, Ordering::Relaxed);
        *prev = h;
        d
    }

    /// Sum of scaled squared mirror distances over the points in `order`,
    /// accumulated in that order.
    pub fn partial_sum(&self, plane: &Plane, order: &[u32]) -> f64 {
        let mut prev = 0;
        order.iter().map(|&i| self.mirror_dist2(plane, i as usize, &mut prev)).sum::<f64>() * self.inv_scale2
    }

    pub fn full(&self, plane: &Plane) -> f64 {
        let mut prev = 0;
        let sum: f64 = (0..self.points.len()).map(|i| self.mirror_dist2(plane, i, &mut prev)).sum();
        sum * self.inv_scale2 / self.points.len() as f64
    }
}
