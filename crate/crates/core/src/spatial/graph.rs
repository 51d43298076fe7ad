use super::KdTree;
use crate::geometry::Vec3;

/// k-nearest-neighbor graph over a point set, answering exact
/// nearest-neighbor distance queries by greedy descent from a hint.
///
/// A descent that stops at point `h` is certified when `q` lies within half
/// the distance from `h` to its k-th neighbor: every point outside the
/// neighbor list is then at least as far from `q` as `h`. Uncertified
/// queries fall back to a k-d tree. Queries issued in spatially coherent
/// order, each starting from the previous answer, rarely need the tree.
pub struct NeighborGraph {
    coords: Vec<[f64; 3]>,
    k: usize,
    neighbors: Vec<u32>,
    /// Squared certification radius per point.
    safe2: Vec<f64>,
    tree: KdTree,
}

impl NeighborGraph {
    pub fn new(points: &[Vec3], k: usize) -> NeighborGraph {
        let tree = KdTree::new(points);
        let k = k.min(points.len().saturating_sub(1));
        let mut neighbors = Vec::with_capacity(points.len() * k);
        let mut safe2 = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let list: Vec<(usize, f64)> = tree.k_nearest(p, k + 1).into_iter().filter(|&(j, _)| j != i).take(k).collect();
            neighbors.extend(list.iter().map(|&(j, _)| j as u32));
            let reach = if k + 1 >= points.len() {
                // the list holds every other point
                f64::INFINITY
            } else {
                list.last().map_or(f64::INFINITY, |&(_, d)| d)
            };
            // (R/2)² with a relative margin against rounding in the distances
            safe2.push(0.25 * reach * (1.0 - 1e-9));
        }
        NeighborGraph { coords: points.iter().map(|p| [p.x, p.y, p.z]).collect(), k, neighbors, safe2, tree }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Squared distance from `q` to the nearest point, starting the descent at
    /// whichever of the `starts` (or point 0) is closest to `q`. Returns a
    /// nearest point and its squared distance.
    pub fn nearest(&self, q: &Vec3, starts: &[usize]) -> Option<(usize, f64)> {
        if self.coords.is_empty() {
            return None;
        }
        let qa = [q.x, q.y, q.z];
        let last = self.coords.len() - 1;
        let (mut h, mut dh) = (0, dist2(&self.coords[0], &qa));
        for &s in starts {
            let s = s.min(last);
            let d = dist2(&self.coords[s], &qa);
            if d < dh {
                (h, dh) = (s, d);
            }
        }
        loop {
            let start = h;
            for &j in &self.neighbors[start * self.k..(start + 1) * self.k] {
                let d = dist2(&self.coords[j as usize], &qa);
                if d < dh {
                    dh = d;
                    h = j as usize;
                }
            }
            if h == start {
                break;
            }
        }
        if dh <= self.safe2[h] {
            return Some((h, dh));
        }
        self.tree.nearest(q)
    }
}

#[inline(always)]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}
