use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symplane::features::FeatureCloud;
use symplane::geometry::{Plane, Vec3};
use symplane::pipeline::{detect_synthetic, SyntheticSetup};
use symplane::symmetry::{
    bisector, candidate_planes, chamfer_distance, detect, filter_by_origin, match_trios, plane_through,
    verify_and_select, verify_exhaustive, CandidatePlane, DetectionConfig, ReflectionChamfer,
};
use symplane::synth::{make_shape, uniform_rotation, ShapeKind};

fn brute_directed(p: &[Vec3], q: &[Vec3]) -> f64 {
    p.iter().map(|a| q.iter().map(|b| (a - b).norm_squared()).fold(f64::INFINITY, f64::min)).sum::<f64>()
        / p.len() as f64
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<Vec3> {
    (0..n).map(|_| Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))).collect()
}

fn random_plane(rng: &mut ChaCha8Rng) -> Plane {
    loop {
        let n = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if let Ok(p) = Plane::new(n, rng.random_range(-0.2..0.2)) {
            return p;
        }
    }
}

#[test]
fn chamfer_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let (n, m) = (rng.random_range(1..=500), rng.random_range(1..=500));
        let p = random_points(&mut rng, n, 1.0);
        let q = random_points(&mut rng, m, 1.0);
        let oracle = 0.5 * (brute_directed(&p, &q) + brute_directed(&q, &p));
        let got = chamfer_distance(&p, &q).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.max(1.0), "case {case}: {got} vs {oracle}");
    }
}

#[test]
fn reflection_chamfer_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..50 {
        let n = rng.random_range(3..=500);
        let scale = rng.random_range(0.5..3.0);
        let p = random_points(&mut rng, n, 1.0);
        let rc = ReflectionChamfer::new(&p, scale).unwrap();
        for _ in 0..4 {
            let pl = random_plane(&mut rng);
            let mirrored: Vec<Vec3> = p.iter().map(|x| pl.reflect(x)).collect();
            let oracle = 0.5 * (brute_directed(&p, &mirrored) + brute_directed(&mirrored, &p)) / (scale * scale);
            let got = rc.full(&pl);
            assert!((got - oracle).abs() <= 1e-12 * oracle.max(1.0), "case {case}: {got} vs {oracle}");
        }
    }
}

#[test]
fn chamfer_rejects_empty_sets() {
    assert!(chamfer_distance(&[], &[Vec3::zeros()]).is_err());
    assert!(ReflectionChamfer::new(&[], 1.0).is_err());
}

/// Integer-valued features keep every L1 sum exact in f32, so the oracle can
/// demand the same neighbors including the smaller-index tie rule.
#[test]
fn trios_match_brute_force_l1() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let n = rng.random_range(3..300);
        let dim = rng.random_range(1..40);
        let feats: Vec<f32> = (0..n * dim).map(|_| rng.random_range(0..4) as f32).collect();
        let cloud = FeatureCloud::new(random_points(&mut rng, n, 1.0), feats.clone(), dim).unwrap();
        let trios = match_trios(&cloud).unwrap();
        assert_eq!(trios.len(), n);
        for (i, t) in trios.iter().enumerate() {
            let mut order: Vec<(i64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: i64 = (0..dim).map(|k| (feats[i * dim + k] - feats[j * dim + k]).abs() as i64).sum();
                    (d, j)
                })
                .collect();
            order.sort();
            assert_eq!(t.i, i);
            assert_eq!((t.d_ij as i64, t.j), order[0]);
            assert_eq!((t.d_ik as i64, t.k), order[1]);
        }
    }
}

#[test]
fn trios_need_three_points() {
    let cloud = FeatureCloud::new(vec![Vec3::zeros(), Vec3::x()], vec![0.0, 1.0], 1).unwrap();
    assert!(match_trios(&cloud).is_err());
}

#[test]
fn mirrored_features_are_matched_to_mirror_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let plane = Plane::new(Vec3::new(1.0, 2.0, -0.5), 0.05).unwrap();
    let (half, dim) = (1000, 32);
    let base = random_points(&mut rng, half, 1.0);
    let mut pts = base.clone();
    pts.extend(base.iter().map(|p| plane.reflect(p)));
    let shared: Vec<f32> = (0..half * dim).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut feats = Vec::with_capacity(2 * half * dim);
    for _ in 0..2 {
        for v in &shared {
            feats.push(v + rng.random_range(-0.005..0.005f32));
        }
    }
    let cloud = FeatureCloud::new(pts, feats, dim).unwrap();
    let trios = match_trios(&cloud).unwrap();
    let hits = trios.iter().filter(|t| t.j == (t.i + half) % (2 * half)).count();
    assert!(hits as f64 >= 0.99 * (2 * half) as f64, "{hits}");
    for t in trios.iter().filter(|t| t.j == (t.i + half) % (2 * half)) {
        let cand = bisector(&cloud.points()[t.i], &cloud.points()[t.j], 1e-9).unwrap();
        assert!(cand.angle_deg(&plane) < 1e-6 && cand.offset_gap(&plane) < 1e-9);
    }
}

#[test]
fn candidate_examples() {
    let b = bisector(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(3.0, 0.0, 0.0), 1e-9).unwrap();
    assert!((b.normal() - Vec3::x()).norm() < 1e-12 || (b.normal() + Vec3::x()).norm() < 1e-12);
    assert!(b.signed_distance(&Vec3::new(2.0, 5.0, -1.0)).abs() < 1e-12);
    assert!(bisector(&Vec3::x(), &Vec3::x(), 1e-9).is_none());

    let t = plane_through(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(1.0, 0.0, 1.0), &Vec3::new(0.0, 1.0, 1.0), 1e-9).unwrap();
    assert!((t.normal().z.abs() - 1.0).abs() < 1e-12 && (t.offset().abs() - 1.0).abs() < 1e-12);
    assert!(plane_through(&Vec3::zeros(), &Vec3::x(), &(Vec3::x() * 2.0), 1e-9).is_none());

    let pts = vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
    let cloud = FeatureCloud::new(pts, vec![0.0, 0.0, 5.0], 1).unwrap();
    let trios = match_trios(&cloud).unwrap();
    let cands = candidate_planes(&cloud, &trios, 1.0);
    assert!(cands.len() <= 4 * trios.len());
    assert!(cands.iter().any(|c| c.plane.normal().x.abs() > 1.0 - 1e-12 && c.plane.offset().abs() < 1e-12));
    for c in &cands {
        assert_eq!(c.plane, c.plane.canonical());
    }
}

#[test]
fn origin_filter_is_inclusive() {
    let at = |d: f64| CandidatePlane::new(Plane::new(Vec3::z(), d).unwrap(), symplane::symmetry::Source::External);
    let kept = filter_by_origin(vec![at(0.0), at(0.05), at(-0.05), at(0.0500001)], 1.0, 0.05);
    assert_eq!(kept.len(), 3);
}

fn cuboid_cloud(points: usize, seed: u64) -> (FeatureCloud, f64) {
    let s = make_shape(ShapeKind::Cuboid, seed, 3).unwrap();
    let setup = SyntheticSetup { points, seed, ..SyntheticSetup::default() };
    let nm = symplane::geometry::normalize(&s.mesh).unwrap();
    let local = symplane::pipeline::planes_to_normalized(&nm, &s.gt);
    let vf = symplane::features::synthetic_features(&nm, &local, setup.dim, setup.noise, seed).unwrap();
    let (cloud, _) = symplane::pipeline::feature_cloud(&nm, &vf, points, seed).unwrap();
    (cloud, nm.diagonal())
}

fn filtered_candidates(cloud: &FeatureCloud, diag: f64, cfg: &DetectionConfig) -> Vec<CandidatePlane> {
    let trios = match_trios(cloud).unwrap();
    filter_by_origin(candidate_planes(cloud, &trios, diag), diag, cfg.origin_tol_frac)
}

#[test]
fn lazy_verification_equals_exhaustive() {
    for seed in 0..3 {
        let (cloud, diag) = cuboid_cloud(1500, seed);
        for tau1 in [0.002, 0.01, 0.05] {
            let cfg = DetectionConfig { chamfer_tau1: tau1, seed, ..DetectionConfig::default() };
            let cands = filtered_candidates(&cloud, diag, &cfg);
            let lazy = verify_and_select(cloud.points(), &cands, &cfg, diag).unwrap();
            let full = verify_exhaustive(cloud.points(), &cands, &cfg, diag).unwrap();
            assert_eq!(lazy, full, "seed {seed} tau1 {tau1}");
        }
    }
}

#[test]
fn selection_is_sorted_sound_and_deduplicated() {
    let (cloud, diag) = cuboid_cloud(2000, 4);
    let cfg = DetectionConfig { max_planes: 50, ..DetectionConfig::default() };
    let planes = detect(&cloud, diag, &cfg).unwrap();
    assert!(!planes.is_empty());
    let rc = ReflectionChamfer::new(cloud.points(), diag).unwrap();
    for w in planes.windows(2) {
        assert!(w[0].chamfer <= w[1].chamfer);
        assert!(w[0].confidence >= w[1].confidence);
    }
    for (i, p) in planes.iter().enumerate() {
        let (c, conf) = (p.chamfer.unwrap(), p.confidence.unwrap());
        assert!(c < cfg.chamfer_tau1);
        assert!(conf > 0.0 && conf <= 1.0);
        assert!((conf - (1.0 - c / cfg.chamfer_tau1)).abs() < 1e-12);
        assert!((rc.full(&p.plane) - c).abs() <= 1e-9 * c.max(1e-12));
        assert!(p.plane.offset().abs() <= cfg.origin_tol_frac * diag);
        for q in &planes[..i] {
            let same = p.plane.angle_deg(&q.plane) <= cfg.angle_tau2_deg
                && p.plane.offset_gap(&q.plane) < cfg.offset_tol_frac * diag;
            assert!(!same, "{:?} duplicates {:?}", p.plane, q.plane);
        }
    }
}

#[test]
fn at_most_k_planes() {
    let (cloud, diag) = cuboid_cloud(1500, 5);
    for k in [1, 2, 3] {
        let cfg = DetectionConfig { max_planes: k, ..DetectionConfig::default() };
        assert!(detect(&cloud, diag, &cfg).unwrap().len() <= k);
    }
}

#[test]
fn tighter_chamfer_threshold_keeps_a_prefix() {
    let (cloud, diag) = cuboid_cloud(1500, 6);
    let wide = DetectionConfig { chamfer_tau1: 0.05, max_planes: 1000, ..DetectionConfig::default() };
    let wide_planes = detect(&cloud, diag, &wide).unwrap();
    for tau1 in [0.0005, 0.002, 0.01] {
        let cfg = DetectionConfig { chamfer_tau1: tau1, ..wide.clone() };
        let narrow: Vec<Plane> = detect(&cloud, diag, &cfg).unwrap().iter().map(|c| c.plane).collect();
        let expect: Vec<Plane> =
            wide_planes.iter().filter(|c| c.chamfer.unwrap() < tau1).map(|c| c.plane).collect();
        assert_eq!(narrow, expect, "tau1 {tau1}");
    }
}

#[test]
fn cuboid_planes_are_recovered() {
    let s = make_shape(ShapeKind::Cuboid, 0, 3).unwrap();
    let setup = SyntheticSetup { points: 3000, ..SyntheticSetup::default() };
    let (nm, found, _) = detect_synthetic(&s.mesh, &s.gt, &setup, &DetectionConfig::default()).unwrap();
    let gt = symplane::pipeline::planes_to_normalized(&nm, &s.gt);
    for g in &gt {
        assert!(found.iter().any(|f| f.plane.angle_deg(g) < 1.0 && f.plane.offset_gap(g) < 0.01 * nm.diagonal()));
    }
}

#[test]
fn rigid_rotation_carries_planes_along() {
    let (cloud, diag) = cuboid_cloud(1500, 7);
    let cfg = DetectionConfig::default();
    let base = detect(&cloud, diag, &cfg).unwrap();
    for seed in 0..3 {
        let r = uniform_rotation(seed);
        let rotated = detect(&cloud.map_points(|p| r * p), diag, &cfg).unwrap();
        assert_eq!(base.len(), rotated.len());
        for b in &base {
            let moved = b.plane.rotated(&r);
            let m = rotated
                .iter()
                .find(|c| c.plane.angle_deg(&moved) < 1e-5 && c.plane.offset_gap(&moved) < 1e-9)
                .unwrap_or_else(|| panic!("no match for {moved:?}"));
            assert!((m.chamfer.unwrap() - b.chamfer.unwrap()).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_mirror_sets_have_zero_chamfer(seed in any::<u64>(), n in 2usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plane = random_plane(&mut rng);
        let half = random_points(&mut rng, n, 1.0);
        let mut pts = half.clone();
        pts.extend(half.iter().map(|p| plane.reflect(p)));
        let rc = ReflectionChamfer::new(&pts, 1.0).unwrap();
        prop_assert!(rc.full(&plane) < 1e-20);
    }

    #[test]
    fn chamfer_is_symmetric_and_nonnegative(seed in any::<u64>(), n in 1usize..100, m in 1usize..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_points(&mut rng, n, 2.0);
        let q = random_points(&mut rng, m, 2.0);
        let (a, b) = (chamfer_distance(&p, &q).unwrap(), chamfer_distance(&q, &p).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert_eq!(chamfer_distance(&p, &p).unwrap(), 0.0);
    }
}
