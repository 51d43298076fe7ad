use crate::geometry::{TriangleMesh, Vec3};

const LEAF_TRIS: usize = 4;

#[derive(Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb { lo: Vec3::repeat(f64::INFINITY), hi: Vec3::repeat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    /// Squared distance from `p` to the box (0 inside).
    fn sq_dist(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let e = (self.lo[k] - p[k]).max(0.0).max(p[k] - self.hi[k]);
            d += e * e;
        }
        d
    }
}

struct Node {
    bounds: Aabb,
    /// Leaf: first triangle slot; interior: index of the left child (right is `left + 1`).
    first: usize,
    /// Number of triangles for a leaf, 0 for interior nodes.
    count: usize,
}

/// Bounding volume hierarchy over mesh triangles for exact closest-point queries.
pub struct TriangleBvh {
    tris: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn new(mesh: &TriangleMesh) -> TriangleBvh {
        let tris: Vec<[Vec3; 3]> = (0..mesh.face_count()).map(|f| mesh.triangle(f)).collect();
        let mut bvh = TriangleBvh { order: (0..tris.len()).collect(), tris, nodes: Vec::new() };
        if !bvh.tris.is_empty() {
            let centroids: Vec<Vec3> = bvh.tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
            bvh.nodes.push(Node { bounds: Aabb::empty(), first: 0, count: 0 });
            bvh.build(0, 0, bvh.tris.len(), &centroids);
        }
        bvh
    }

    fn build(&mut self, node: usize, start: usize, end: usize, centroids: &[Vec3]) {
        let mut bounds = Aabb::empty();
        let mut cb = Aabb::empty();
        for &t in &self.order[start..end] {
            for p in &self.tris[t] {
                bounds.grow(p);
            }
            cb.grow(&centroids[t]);
        }
        self.nodes[node].bounds = bounds;
        if end - start <= LEAF_TRIS {
            self.nodes[node].first = start;
            self.nodes[node].count = end - start;
            return;
        }
        let axis = (cb.hi - cb.lo).imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let left = self.nodes.len();
        self.nodes.push(Node { bounds: Aabb::empty(), first: 0, count: 0 });
        self.nodes.push(Node { bounds: Aabb::empty(), first: 0, count: 0 });
        self.nodes[node].first = left;
        self.nodes[node].count = 0;
        self.build(left, start, mid, centroids);
        self.build(left + 1, mid, end, centroids);
    }

    /// Closest face and squared distance from `p` to the mesh surface.
    pub fn closest(&self, p: &Vec3) -> Option<(usize, f64)> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.sq_dist(p) > best.1 {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.first..node.first + node.count] {
                    let [a, b, c] = &self.tris[t];
                    let d = (closest_point_on_triangle(p, a, b, c) - p).norm_squared();
                    if d < best.1 || (d == best.1 && t < best.0) {
                        best = (t, d);
                    }
                }
            } else {
                let (l, r) = (node.first, node.first + 1);
                let (dl, dr) = (self.nodes[l].bounds.sq_dist(p), self.nodes[r].bounds.sq_dist(p));
                // visit the nearer child first
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        Some(best)
    }
}

/// Closest point to `p` on triangle `abc` (Voronoi-region classification).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (Vec3::zeros(), Vec3::x(), Vec3::y());
        let q = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 3.0), &a, &b, &c);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c), a);
        assert_eq!(closest_point_on_triangle(&Vec3::new(0.5, -2.0, 1.0), &a, &b, &c), Vec3::new(0.5, 0.0, 0.0));
        let e = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((e - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_does_not_nan() {
        let a = Vec3::zeros();
        let q = closest_point_on_triangle(&Vec3::new(0.3, 1.0, 0.0), &a, &Vec3::x(), &(Vec3::x() * 2.0));
        assert!(q.iter().all(|v| v.is_finite()));
    }
}
