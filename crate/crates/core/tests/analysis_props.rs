use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symplane::analysis::{
    ablation_grid, discrepancy, object_discrepancy, parse_grid, random_pairing_discrepancy, results_to_csv, CorpusObject,
    InvarianceConfig, InvarianceSetup, Pairing, Sampling,
};
use symplane::features::{synthetic_features, FeatureCloud};
use symplane::geometry::{normalize, Plane, Vec3};
use symplane::pipeline::{feature_cloud, planes_to_normalized};
use symplane::render::{RenderConfig, RotationSet, ViewScheme};
use symplane::synth::{make_shape, ShapeKind};

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> FeatureCloud {
    let pts = (0..n)
        .map(|_| Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
        .collect();
    let feats = (0..n * dim).map(|_| rng.random_range(0.0..1.0f32)).collect();
    FeatureCloud::new(pts, feats, dim).unwrap()
}

fn brute_discrepancy(cloud: &FeatureCloud, plane: &Plane) -> f64 {
    let pts = cloud.points();
    let total: f64 = (0..cloud.len())
        .map(|i| {
            let r = plane.reflect(&pts[i]);
            let j = (0..pts.len()).min_by(|&a, &b| (pts[a] - r).norm_squared().total_cmp(&(pts[b] - r).norm_squared())).unwrap();
            cloud.feature(i).iter().zip(cloud.feature(j)).map(|(x, y)| (*x as f64 - *y as f64).abs()).sum::<f64>()
        })
        .sum();
    total / cloud.len() as f64
}

#[test]
fn discrepancy_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (n, d) = (rng.random_range(1..400), rng.random_range(1..20));
        let cloud = random_cloud(&mut rng, n, d);
        let plane = Plane::new(Vec3::new(rng.random_range(-1.0..1.0), 1.0, rng.random_range(-1.0..1.0)), 0.1).unwrap();
        let (got, want) = (discrepancy(&cloud, &plane).unwrap(), brute_discrepancy(&cloud, &plane));
        assert!((got - want).abs() <= 1e-9 * want.max(1.0));
    }
}

#[test]
fn uniform_random_features_give_a_third_per_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cloud = random_cloud(&mut rng, 5000, 384);
    let plane = Plane::new(Vec3::x(), 0.0).unwrap();
    let sym = discrepancy(&cloud, &plane).unwrap();
    let rnd = random_pairing_discrepancy(&cloud, 3).unwrap();
    for e in [sym, rnd] {
        assert!((e - 128.0).abs() < 5.0, "{e}");
    }
}

#[test]
fn empty_and_tiny_clouds_are_errors() {
    let empty = FeatureCloud::new(vec![], vec![], 3).unwrap();
    let plane = Plane::new(Vec3::z(), 0.0).unwrap();
    assert!(discrepancy(&empty, &plane).is_err());
    assert!(random_pairing_discrepancy(&empty, 0).is_err());
    let one = FeatureCloud::new(vec![Vec3::zeros()], vec![1.0, 2.0, 3.0], 3).unwrap();
    assert_eq!(discrepancy(&one, &plane).unwrap(), 0.0);
    assert!(random_pairing_discrepancy(&one, 0).is_err());
}

fn noiseless_cloud(kind: ShapeKind, field_planes: Option<&[Plane]>, points: usize) -> (FeatureCloud, Vec<Plane>) {
    let s = make_shape(kind, 0, 3).unwrap();
    let nm = normalize(&s.mesh).unwrap();
    let planes = match field_planes {
        Some(p) => p.to_vec(),
        None => planes_to_normalized(&nm, &s.gt),
    };
    let vf = synthetic_features(&nm, &planes, 32, 0.0, 4).unwrap();
    (feature_cloud(&nm, &vf, points, 5).unwrap().0, planes)
}

#[test]
fn exact_mirror_cloud_has_zero_discrepancy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plane = Plane::new(Vec3::x(), 0.0).unwrap();
    let field = symplane::features::SymmetricField::new(&[plane], 32, 1.0, 9).unwrap();
    let half: Vec<Vec3> = (0..500)
        .map(|_| Vec3::new(rng.random_range(0.01..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
        .collect();
    let pts: Vec<Vec3> = half.iter().copied().chain(half.iter().map(|p| plane.reflect(p))).collect();
    let feats: Vec<f32> = pts.iter().flat_map(|p| field.eval(p)).map(|v| v as f32).collect();
    let cloud = FeatureCloud::new(pts, feats, 32).unwrap();
    let e = discrepancy(&cloud, &plane).unwrap();
    assert!(e < 1e-9, "{e}");
}

#[test]
fn wrong_plane_on_blob_exceeds_correct_plane_on_symmetric_object() {
    let (sym_cloud, gt) = noiseless_cloud(ShapeKind::Cuboid, None, 10_000);
    let correct = gt.iter().map(|p| discrepancy(&sym_cloud, p).unwrap()).sum::<f64>() / gt.len() as f64;
    // features symmetric about a plane the blob geometry does not share
    let wrong_plane = Plane::new(Vec3::new(0.3, 1.0, -0.2), 0.0).unwrap();
    let (blob, _) = noiseless_cloud(ShapeKind::Blob, Some(&[wrong_plane]), 10_000);
    let wrong = discrepancy(&blob, &wrong_plane).unwrap();
    assert!(wrong > 10.0 * correct, "wrong {wrong} correct {correct}");
}

#[test]
fn random_pairing_dominates_symmetric_pairing() {
    for kind in [ShapeKind::Cube, ShapeKind::Cuboid, ShapeKind::LShape, ShapeKind::NgonPrism(6)] {
        let (cloud, gt) = noiseless_cloud(kind, None, 10_000);
        let rnd = random_pairing_discrepancy(&cloud, 6).unwrap();
        for p in &gt {
            let sym = discrepancy(&cloud, p).unwrap();
            assert!(rnd >= 5.0 * sym, "{kind}: random {rnd} symmetric {sym}");
        }
    }
}

#[test]
fn constant_features_and_two_point_clouds() {
    let pts = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()];
    let cloud = FeatureCloud::new(pts, vec![0.7; 12], 3).unwrap();
    assert_eq!(random_pairing_discrepancy(&cloud, 1).unwrap(), 0.0);
    assert_eq!(discrepancy(&cloud, &Plane::new(Vec3::x(), 0.3).unwrap()).unwrap(), 0.0);
    let two = FeatureCloud::new(vec![Vec3::zeros(), Vec3::x()], vec![1.0, 4.0], 1).unwrap();
    for seed in 0..5 {
        assert_eq!(random_pairing_discrepancy(&two, seed).unwrap(), 3.0);
    }
}

fn small_setup() -> InvarianceSetup {
    InvarianceSetup { render: RenderConfig { size: 112, ..RenderConfig::default() }, ..InvarianceSetup::default() }
}

fn corpus_object(kind: ShapeKind) -> CorpusObject {
    let s = make_shape(kind, 0, 4).unwrap();
    CorpusObject { name: s.name, mesh: s.mesh, gt: s.gt }
}

#[test]
fn t4_repeats_are_bit_identical_to_single_renders() {
    let setup = small_setup();
    let obj = corpus_object(ShapeKind::LShape);
    let base = InvarianceConfig { n_views: 8, sampling: Sampling::FeatureMesh(800), ..InvarianceConfig::default() };
    let t4 = InvarianceConfig { rotations: RotationSet::T4, ..base };
    let a = object_discrepancy(&obj, &base, &setup).unwrap();
    let b = object_discrepancy(&obj, &t4, &setup).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn grid_rows_follow_configs_and_failures_are_skipped() {
    let setup = small_setup();
    let mut corpus = vec![corpus_object(ShapeKind::Cube), corpus_object(ShapeKind::Cuboid)];
    corpus.push(CorpusObject { gt: vec![], ..corpus_object(ShapeKind::Blob) });
    let configs = parse_grid(
        "# two cells\nscheme=fib views=6 sampling=fm:500 pairing=symmetric\nscheme=reg views=6 sampling=rm pairing=random\n",
    )
    .unwrap();
    assert_eq!(configs[1].scheme, ViewScheme::Regular);
    let res = ablation_grid(&corpus, &configs, &setup).unwrap();
    assert_eq!(res.len(), 2);
    // the blob has no ground truth, so only symmetric pairing fails for it
    assert_eq!(res[0].n_objects, 2);
    assert!(res[0].per_object[2].is_none());
    assert_eq!(res[1].n_objects, 3);
    let ok: Vec<f64> = res[0].per_object.iter().flatten().copied().collect();
    assert!((res[0].e_mean - ok.iter().sum::<f64>() / 2.0).abs() < 1e-12);
    let csv = results_to_csv(&res);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "config_id,scheme,n_views,rotations,sampling,pairing,E_mean,E_std,n_objects");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1,reg,6,1,rm,random,"));
    assert!(ablation_grid(&[], &configs, &setup).is_err());
}

#[test]
fn grid_parsing_rejects_bad_lines() {
    assert!(parse_grid("views=0").is_err());
    assert!(parse_grid("sampling=fm:0").is_err());
    assert!(parse_grid("colour=red").is_err());
    assert!(parse_grid("views").is_err());
    assert_eq!(parse_grid("\n# nothing\n\n").unwrap().len(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discrepancy_ignores_point_order(seed in any::<u64>(), n in 2usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = random_cloud(&mut rng, n, 8);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let plane = Plane::new(Vec3::new(0.2, -1.0, 0.5), 0.05).unwrap();
        let (a, b) = (discrepancy(&cloud, &plane).unwrap(), discrepancy(&cloud.permuted(&perm), &plane).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn config_text_roundtrips(
        fib in any::<bool>(),
        views in 1usize..200,
        rot in prop::sample::select(vec![RotationSet::R1, RotationSet::R2, RotationSet::R3, RotationSet::R4, RotationSet::T4]),
        fm in prop::option::of(1usize..100_000),
        random in any::<bool>(),
    ) {
        let cfg = InvarianceConfig {
            scheme: if fib { ViewScheme::Fibonacci } else { ViewScheme::Regular },
            n_views: views,
            rotations: rot,
            sampling: fm.map_or(Sampling::RawMesh, Sampling::FeatureMesh),
            pairing: if random { Pairing::Random } else { Pairing::Symmetric },
        };
        prop_assert_eq!(cfg.to_string().parse::<InvarianceConfig>().unwrap(), cfg);
    }
}
