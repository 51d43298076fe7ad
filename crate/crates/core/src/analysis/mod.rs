//! Feature invariance experiments: the mirror discrepancy measure, random
//! pairing baseline and the ablation grid over rendering settings.

mod config;
mod extractor;
mod grid;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{parse_grid, InvarianceConfig, Pairing, Sampling};
pub use extractor::SyntheticExtractor;
pub use grid::{ablation_grid, object_discrepancy, results_to_csv, CorpusObject, InvarianceResult, InvarianceSetup};

use crate::error::{Error, Result};
use crate::features::FeatureCloud;
use crate::geometry::Plane;
use crate::spatial::KdTree;

fn l1(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).abs()).sum()
}

/// Mean L1 feature distance between each point and the cloud point nearest
/// to its mirror image.
pub fn discrepancy(cloud: &FeatureCloud, plane: &Plane) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree = KdTree::new(cloud.points());
    let per_point: Vec<f64> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let (j, _) = tree.nearest(&plane.reflect(&cloud.points()[i])).expect("tree is non-empty");
            l1(cloud.feature(i), cloud.feature(j))
        })
        .collect();
    Ok(per_point.iter().sum::<f64>() / cloud.len() as f64)
}

/// Same measure with each point paired to a uniformly random other point.
pub fn random_pairing_discrepancy(cloud: &FeatureCloud, seed: u64) -> Result<f64> {
    let n = cloud.len();
    match n {
        0 => return Err(Error::EmptyCloud),
        1 => return Err(Error::TooFewPoints { needed: 2, got: 1 }),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = (0..n)
        .map(|i| {
            let j = rng.random_range(0..n - 1);
            let j = if j >= i { j + 1 } else { j };
            l1(cloud.feature(i), cloud.feature(j))
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn line_cloud(features: Vec<f32>, dim: usize) -> FeatureCloud {
        let n = features.len() / dim;
        let pts = (0..n).map(|i| Vec3::new(i as f64 - (n as f64 - 1.0) / 2.0, 0.0, 0.0)).collect();
        FeatureCloud::new(pts, features, dim).unwrap()
    }

    #[test]
    fn mirrored_features_have_zero_discrepancy() {
        let c = line_cloud(vec![1.0, 2.0, 3.0, 2.0, 1.0], 1);
        assert_eq!(discrepancy(&c, &Plane::new(Vec3::x(), 0.0).unwrap()).unwrap(), 0.0);
        // positions -2..2 mirrored about x = 0.5 pair up mismatched values
        let e = discrepancy(&c, &Plane::new(Vec3::x(), -0.5).unwrap()).unwrap();
        assert!(e > 0.0);
    }

    #[test]
    fn two_points_pair_with_each_other() {
        let c = line_cloud(vec![0.0, 4.0], 1);
        assert_eq!(random_pairing_discrepancy(&c, 9).unwrap(), 4.0);
        let constant = line_cloud(vec![2.5; 10], 1);
        assert_eq!(random_pairing_discrepancy(&constant, 1).unwrap(), 0.0);
    }

    #[test]
    fn empty_and_singleton() {
        let empty = FeatureCloud::new(vec![], vec![], 1).unwrap();
        assert!(matches!(discrepancy(&empty, &Plane::new(Vec3::x(), 0.0).unwrap()), Err(Error::EmptyCloud)));
        assert!(matches!(random_pairing_discrepancy(&empty, 0), Err(Error::EmptyCloud)));
        assert!(random_pairing_discrepancy(&line_cloud(vec![1.0], 1), 0).is_err());
    }
}
