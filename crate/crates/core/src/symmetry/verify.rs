use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::chamfer::ReflectionChamfer;
use super::{CandidatePlane, DetectionConfig};
use crate::error::Result;
use crate::geometry::{Plane, Vec3};

const FIRST_CHUNK: usize = 32;
const MAX_CHUNK: usize = 2048;

/// Fixed evaluation order for mirror distances: a seeded permutation of the
/// points cut into chunks of doubling size, each chunk then sorted along a
/// Morton curve so consecutive queries are close. Every Chamfer score is
/// summed in this order, whichever verification strategy is used.
struct Schedule {
    order: Vec<u32>,
    bounds: Vec<usize>,
}

impl Schedule {
    fn new(points: &[Vec3], seed: u64) -> Schedule {
        let n = points.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let keys = morton_keys(points);
        let mut bounds = vec![0];
        let mut size = FIRST_CHUNK;
        while *bounds.last().unwrap() < n {
            let (lo, hi) = (*bounds.last().unwrap(), (bounds.last().unwrap() + size).min(n));
            order[lo..hi].sort_by_key(|&i| (keys[i as usize], i));
            bounds.push(hi);
            size = (size * 2).min(MAX_CHUNK);
        }
        Schedule { order, bounds }
    }

    fn chunks(&self) -> usize {
        self.bounds.len() - 1
    }

    fn chunk(&self, c: usize) -> &[u32] {
        &self.order[self.bounds[c]..self.bounds[c + 1]]
    }
}

/// 30-bit Morton codes of the points on a 1024³ grid over their bounding box.
fn morton_keys(points: &[Vec3]) -> Vec<u32> {
    let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let ext = (hi - lo).map(|e| if e > 0.0 { e } else { 1.0 });
    let spread = |v: u32| {
        let mut x = v & 0x3ff;
        x = (x | (x << 16)) & 0x0300_00ff;
        x = (x | (x << 8)) & 0x0300_f00f;
        x = (x | (x << 4)) & 0x030c_30c3;
        (x | (x << 2)) & 0x0924_9249
    };
    points
        .iter()
        .map(|p| {
            let c = (p - lo).component_div(&ext) * 1023.0;
            spread(c.x as u32) | spread(c.y as u32) << 1 | spread(c.z as u32) << 2
        })
        .collect()
}

fn redundant(p: &Plane, kept: &[CandidatePlane], cfg: &DetectionConfig, diag: f64) -> bool {
    kept.iter().any(|k| {
        p.angle_deg(&k.plane) <= cfg.angle_tau2_deg && p.offset_gap(&k.plane) < cfg.offset_tol_frac * diag
    })
}

fn plane_bits(p: &Plane) -> [u64; 4] {
    let n = p.normal();
    [n.x.to_bits(), n.y.to_bits(), n.z.to_bits(), p.offset().to_bits()]
}

fn finalize(mut c: CandidatePlane, chamfer: f64, tau1: f64) -> CandidatePlane {
    c.chamfer = Some(chamfer);
    c.confidence = Some(1.0 - chamfer / tau1);
    c
}

/// Heap entry ordered by (lower bound, partial before exact, index).
#[derive(PartialEq)]
struct Entry {
    bound: f64,
    exact: bool,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.exact.cmp(&other.exact))
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Scores candidates by the Chamfer distance between the points and their
/// reflection (coordinates divided by `diag`), keeps those below `τ₁`, and
/// greedily selects up to `k` non-redundant planes in ascending Chamfer
/// order (ties by candidate index).
///
/// Scores are refined lazily, best bound first: a partial sum over the
/// first chunks of points is a lower bound on the final score, so a
/// candidate is only completed once nothing else can precede it. Rejected
/// and redundant candidates are dropped as soon as that is certain. The
/// selection equals [`verify_exhaustive`] exactly.
pub fn verify_and_select(points: &[Vec3], cands: &[CandidatePlane], cfg: &DetectionConfig, diag: f64) -> Result<Vec<CandidatePlane>> {
    let rc = ReflectionChamfer::new(points, diag)?;
    let n = points.len() as f64;
    let sched = Schedule::new(points, cfg.seed);
    let tau1 = cfg.chamfer_tau1;

    // a repeated plane scores the same as its first occurrence and is then
    // always redundant with it, so only first occurrences are scored
    let mut seen = HashSet::new();
    let unique: Vec<usize> = (0..cands.len()).filter(|&i| seen.insert(plane_bits(&cands[i].plane))).collect();
    let first: Vec<f64> = unique.par_iter().map(|&i| rc.partial_sum(&cands[i].plane, sched.chunk(0))).collect();
    let mut sums = vec![0.0; cands.len()];
    let mut next = vec![1usize; cands.len()];
    let mut heap = BinaryHeap::new();
    for (&idx, &s) in unique.iter().zip(&first) {
        sums[idx] = s;
        if s / n < tau1 {
            heap.push(Reverse(Entry { bound: s / n, exact: sched.chunks() == 1, idx }));
        }
    }
    let mut kept: Vec<CandidatePlane> = Vec::new();
    while let Some(Reverse(e)) = heap.pop() {
        if kept.len() >= cfg.max_planes {
            break;
        }
        if redundant(&cands[e.idx].plane, &kept, cfg, diag) {
            continue;
        }
        if e.exact {
            kept.push(finalize(cands[e.idx], e.bound, tau1));
            continue;
        }
        let c = e.idx;
        sums[c] += rc.partial_sum(&cands[c].plane, sched.chunk(next[c]));
        next[c] += 1;
        let bound = sums[c] / n;
        if bound < tau1 {
            heap.push(Reverse(Entry { bound, exact: next[c] == sched.chunks(), idx: c }));
        }
    }
    Ok(kept)
}

/// Reference selection that scores every candidate in full.
pub fn verify_exhaustive(points: &[Vec3], cands: &[CandidatePlane], cfg: &DetectionConfig, diag: f64) -> Result<Vec<CandidatePlane>> {
    let rc = ReflectionChamfer::new(points, diag)?;
    let n = points.len() as f64;
    let sched = Schedule::new(points, cfg.seed);
    let scores: Vec<f64> = cands
        .par_iter()
        .map(|c| (0..sched.chunks()).fold(0.0, |s, k| s + rc.partial_sum(&c.plane, sched.chunk(k))) / n)
        .collect();
    let mut valid: Vec<usize> = (0..cands.len()).filter(|&i| scores[i] < cfg.chamfer_tau1).collect();
    valid.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut kept: Vec<CandidatePlane> = Vec::new();
    for i in valid {
        if kept.len() >= cfg.max_planes {
            break;
        }
        if !redundant(&cands[i].plane, &kept, cfg, diag) {
            kept.push(finalize(cands[i], scores[i], cfg.chamfer_tau1));
        }
    }
    Ok(kept)
}
