use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;
const LEAF: u32 = u32::MAX;

/// Split node (`axis < 3`) or leaf (`axis == 3`, points `start..end`). The
/// left child of a split always follows it directly.
#[derive(Clone, Copy)]
struct Node {
    value: f64,
    axis: u8,
    right: u32,
    start: u32,
    end: u32,
}

/// Static 3-D k-d tree answering exact nearest-neighbor queries.
///
/// Ties in distance resolve to the smallest point index, so results do not
/// depend on tree layout.
pub struct KdTree {
    points: Vec<Vec3>,
    /// Points in tree order.
    sorted: Vec<[f64; 3]>,
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> KdTree {
        assert!(points.len() < LEAF as usize, "too many points for a k-d tree");
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        if !points.is_empty() {
            build(points, &mut order, 0, &mut nodes);
        }
        KdTree {
            points: points.to_vec(),
            sorted: order.iter().map(|&i| { let p = points[i as usize]; [p.x, p.y, p.z] }).collect(),
            ids: order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index and squared distance of the point nearest to `q`.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let q = [q.x, q.y, q.z];
        let mut best = (u32::MAX, f64::INFINITY);
        self.walk(&q, |tree, start, end, best: &mut (u32, f64)| {
            for k in start..end {
                let d = dist2(&tree.sorted[k], &q);
                let id = tree.ids[k];
                if d < best.1 || (d == best.1 && id < best.0) {
                    *best = (id, d);
                }
            }
        }, &mut best, true);
        Some((best.0 as usize, best.1))
    }

    /// Squared distance to the nearest point, or `None` for an empty tree.
    /// Cheaper than [`KdTree::nearest`] since no index tie-break is needed.
    pub fn nearest_dist2(&self, q: &Vec3) -> Option<f64> {
        let mut hint = 0;
        self.nearest_dist2_from(q, &mut hint)
    }

    /// Like [`KdTree::nearest_dist2`], seeded with the point at tree position
    /// `*hint` as the initial best. On return `*hint` holds the position of
    /// the nearest point, so consecutive nearby queries prune early.
    pub fn nearest_dist2_from(&self, q: &Vec3, hint: &mut usize) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let q = [q.x, q.y, q.z];
        let h = (*hint).min(self.sorted.len() - 1);
        let mut best = (h as u32, dist2(&self.sorted[h], &q));
        self.walk(&q, |tree, start, end, best: &mut (u32, f64)| {
            for (k, p) in tree.sorted[start..end].iter().enumerate() {
                let d = dist2(p, &q);
                if d < best.1 {
                    *best = ((start + k) as u32, d);
                }
            }
        }, &mut best, false);
        *hint = best.0 as usize;
        Some(best.1)
    }

    /// The `k` points nearest to `q` as `(index, squared distance)`, sorted
    /// by distance then index.
    pub fn k_nearest(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let qa = [q.x, q.y, q.z];
        let mut found: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        let mut stack: Vec<(u32, f64)> = vec![(0, 0.0)];
        let limit = |found: &Vec<(f64, u32)>| if found.len() < k { f64::INFINITY } else { found[k - 1].0 };
        while let Some((mut id, bound)) = stack.pop() {
            if bound > limit(&found) {
                continue;
            }
            loop {
                let n = self.nodes[id as usize];
                if n.axis == 3 {
                    for pos in n.start as usize..n.end as usize {
                        let d = dist2(&self.sorted[pos], &qa);
                        let e = (d, self.ids[pos]);
                        if found.len() < k || e < found[k - 1] {
                            let at = found.partition_point(|x| *x < e);
                            found.insert(at, e);
                            found.truncate(k);
                        }
                    }
                    break;
                }
                let diff = qa[n.axis as usize] - n.value;
                let (near, far) = if diff < 0.0 { (id + 1, n.right) } else { (n.right, id + 1) };
                stack.push((far, diff * diff));
                id = near;
            }
        }
        found.into_iter().map(|(d, i)| (i as usize, d)).collect()
    }

    /// Depth-first traversal, nearer side first, skipping subtrees whose
    /// splitting plane is farther than the current best (or, with
    /// `inclusive`, strictly farther so equal-distance points stay reachable).
    #[inline(always)]
    fn walk<F>(&self, q: &[f64; 3], mut visit: F, best: &mut (u32, f64), inclusive: bool)
    where
        F: FnMut(&KdTree, usize, usize, &mut (u32, f64)),
    {
        let mut stack: [(u32, f64); 64] = [(0, 0.0); 64];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let (mut id, bound) = stack[top];
            if bound > best.1 || (!inclusive && bound == best.1) {
                continue;
            }
            loop {
                let n = self.nodes[id as usize];
                if n.axis == 3 {
                    visit(self, n.start as usize, n.end as usize, best);
                    break;
                }
                let diff = q[n.axis as usize] - n.value;
                let (near, far) = if diff < 0.0 { (id + 1, n.right) } else { (n.right, id + 1) };
                stack[top] = (far, diff * diff);
                top += 1;
                id = near;
            }
        }
    }
}

fn build(points: &[Vec3], order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    let n = order.len();
    if n <= LEAF_SIZE {
        nodes.push(Node { value: 0.0, axis: 3, right: LEAF, start: offset as u32, end: (offset + n) as u32 });
        return id;
    }
    let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
    for &i in order.iter() {
        lo = lo.inf(&points[i as usize]);
        hi = hi.sup(&points[i as usize]);
    }
    let axis = (hi - lo).imax();
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis].total_cmp(&points[b as usize][axis]).then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][axis];
    nodes.push(Node { value, axis: axis as u8, right: 0, start: 0, end: 0 });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, offset, nodes);
    let r = build(points, right, offset + mid, nodes);
    nodes[id as usize].right = r;
    id
}

#[inline(always)]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}
