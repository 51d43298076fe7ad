use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureCloud;

/// Point `i` with its two nearest feature-space neighbors `j` and `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchTrio {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub d_ij: f32,
    pub d_ik: f32,
}

/// L1 distance with eight independent accumulators (vectorizes well and
/// fixes the summation order).
#[inline]
pub fn l1_distance(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..8 {
            acc[l] += (x[l] - y[l]).abs();
        }
    }
    for (l, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        acc[l] += (x - y).abs();
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

const ANCHOR_BLOCK: usize = 32;
const TARGET_BLOCK: usize = 256;

/// Exact two-nearest-neighbor search under L1 for every point.
///
/// The anchor itself is excluded; ties go to the smaller index.
pub fn match_trios(cloud: &FeatureCloud) -> Result<Vec<MatchTrio>> {
    let n = cloud.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let d = cloud.dim();
    let feats = cloud.features();
    let anchors: Vec<usize> = (0..n).collect();
    let trios = anchors
        .par_chunks(ANCHOR_BLOCK)
        .flat_map_iter(|block| {
            // per anchor: (dist, idx) of best and second best
            let mut best = vec![[(f32::INFINITY, usize::MAX); 2]; block.len()];
            for t0 in (0..n).step_by(TARGET_BLOCK) {
                let t1 = (t0 + TARGET_BLOCK).min(n);
                for (slot, &i) in best.iter_mut().zip(block) {
                    let fi = &feats[i * d..(i + 1) * d];
                    for j in t0..t1 {
                        if j == i {
                            continue;
                        }
                        let dist = l1_distance(fi, &feats[j * d..(j + 1) * d]);
                        // targets arrive in ascending index order, so strict `<` is the tie-break
                        if dist < slot[0].0 {
                            slot[1] = slot[0];
                            slot[0] = (dist, j);
                        } else if dist < slot[1].0 {
                            slot[1] = (dist, j);
                        }
                    }
                }
            }
            block.iter().zip(best).map(|(&i, [(d_ij, j), (d_ik, k)])| MatchTrio { i, j, k, d_ij, d_ik }).collect::<Vec<_>>()
        })
        .collect();
    Ok(trios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn cloud1d(vals: &[f32]) -> FeatureCloud {
        let pts = (0..vals.len()).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        FeatureCloud::new(pts, vals.to_vec(), 1).unwrap()
    }

    #[test]
    fn three_points() {
        let t = match_trios(&cloud1d(&[0.0, 1.0, 5.0])).unwrap();
        assert_eq!((t[0].j, t[0].k), (1, 2));
        assert_eq!((t[0].d_ij, t[0].d_ik), (1.0, 5.0));
        assert_eq!((t[2].j, t[2].k), (1, 0));
    }

    #[test]
    fn duplicate_is_nearest_and_ties_pick_smaller_index() {
        let t = match_trios(&cloud1d(&[2.0, 7.0, 3.0, 2.0, 1.0])).unwrap();
        assert_eq!((t[0].j, t[0].d_ij), (3, 0.0));
        // from 2.0 (index 3): 0 at distance 0, then 2 and 4 tie at 1
        assert_eq!((t[3].j, t[3].k), (0, 2));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(match_trios(&cloud1d(&[0.0, 1.0])), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn l1_handles_remainders() {
        let a: Vec<f32> = (0..13).map(|i| i as f32).collect();
        let b = vec![0.0; 13];
        assert_eq!(l1_distance(&a, &b), 78.0);
    }
}
