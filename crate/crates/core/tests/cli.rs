use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use symplane::cli::RunManifest;
use symplane::features::FeatureMap;
use symplane::geometry::{load_mesh, normalize};
use symplane::render::fmap_name;
use symplane::symmetry::PlaneRecord;
use symplane::synth::{make_shape, ShapeKind};
use tempfile::TempDir;

fn symplane(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symplane")).args(args).env_remove("SYMPLANE_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Exports a synthetic shape and returns its mesh and ground-truth paths.
fn export(dir: &Path, kind: &str, tess: &str) -> (PathBuf, PathBuf) {
    let out = symplane(&["synth", kind, "--tessellation", tess, "--out", s(dir), "--stem", kind]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (dir.join(format!("{kind}.obj")), dir.join(format!("{kind}.gt.json")))
}

fn render(mesh: &Path, run: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["render", s(mesh), "--out", s(run), "--size", "112"];
    args.extend_from_slice(extra);
    symplane(&args)
}

fn count_ext(dir: &Path, ext: &str) -> usize {
    std::fs::read_dir(dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == ext)).count()
}

#[test]
fn render_writes_one_png_and_fragment_per_view_and_rotation() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "2");
    let run = tmp.path().join("run");
    let out = render(&mesh, &run, &["--views", "6", "--rotations", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(count_ext(&run, "png"), 24);
    assert_eq!(count_ext(&run, "frag"), 24);
    assert!(run.join("view_005_rot270.png").exists());
    let (m, _) = RunManifest::load(&run).unwrap();
    assert_eq!(m.renders.len(), 24);
    assert_eq!(m.completed, vec!["render".to_string()]);
    assert_eq!(load_mesh(&run.join(&m.mesh), None).unwrap(), load_mesh(&mesh, None).unwrap());

    let again = tmp.path().join("run2");
    assert_eq!(code(&render(&mesh, &again, &["--views", "6", "--rotations", "4"])), 0);
    let (m2, _) = RunManifest::load(&again).unwrap();
    assert_eq!(m.config_hash, m2.config_hash);
    assert_eq!(std::fs::read(run.join("view_003_rot090.png")).unwrap(), std::fs::read(again.join("view_003_rot090.png")).unwrap());

    let other = tmp.path().join("run3");
    assert_eq!(code(&render(&mesh, &other, &["--views", "7", "--rotations", "4"])), 0);
    assert_ne!(RunManifest::load(&other).unwrap().0.config_hash, m.config_hash);
}

#[test]
fn usage_errors_exit_64() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "1");
    let run = tmp.path().join("run");
    assert_eq!(code(&render(&mesh, &run, &["--views", "0"])), 64);
    assert_eq!(code(&render(&mesh, &run, &["--scheme", "spiral"])), 64);
    assert_eq!(code(&symplane(&["detect"])), 64);
    assert_eq!(code(&symplane(&["--threads", "0", "synth", "cube", "--out", s(tmp.path())])), 64);
    assert_eq!(code(&symplane(&["frobnicate"])), 64);
    assert_eq!(code(&symplane(&["--help"])), 0);
}

#[test]
fn bad_mesh_is_a_parse_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nf 1 2 3\n").unwrap();
    assert_eq!(code(&render(&bad, &tmp.path().join("run"), &["--views", "2"])), 2);
}

#[test]
fn missing_feature_map_names_the_render() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "1");
    let run = tmp.path().join("run");
    assert_eq!(code(&render(&mesh, &run, &["--views", "3"])), 0);
    let feats = tmp.path().join("feats");
    std::fs::create_dir(&feats).unwrap();
    for v in [0, 2] {
        FeatureMap::new(v, 0, 8, 4, vec![0.5; 8 * 8 * 4]).unwrap().save(&feats.join(fmap_name(v, 0))).unwrap();
    }
    let out = symplane(&["backproject", s(&run), s(&feats)]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("view_001_rot000.fmap") || stderr(&out).contains("view 1"), "{}", stderr(&out));
}

#[test]
fn feature_maps_are_backprojected_onto_the_mesh() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "lshape", "2");
    let run = tmp.path().join("run");
    assert_eq!(code(&render(&mesh, &run, &["--views", "4", "--rotations", "2"])), 0);
    let feats = tmp.path().join("feats");
    std::fs::create_dir(&feats).unwrap();
    for v in 0..4 {
        for deg in [0, 180] {
            let data = (0..8 * 8 * 3).map(|i| (v * 1000 + deg + i) as f32).collect();
            FeatureMap::new(v, deg, 8, 3, data).unwrap().save(&feats.join(fmap_name(v, deg))).unwrap();
        }
    }
    let out = symplane(&["backproject", s(&run), s(&feats)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (m, dir) = RunManifest::load(&run).unwrap();
    let vf = symplane::features::VertexFeatures::load(&dir.join(m.vertex_features.unwrap())).unwrap();
    assert_eq!(vf.dim(), 3);
    assert!(vf.covered_count() > 0);
    assert!(stdout(&out).contains("dimension 3"));
}

#[test]
fn detect_without_features_exits_5() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "1");
    let run = tmp.path().join("run");
    assert_eq!(code(&render(&mesh, &run, &["--views", "2"])), 0);
    assert_eq!(code(&symplane(&["detect", s(&run)])), 5);
}

#[test]
fn synthetic_backprojection_ground_truth_handling() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "1");
    let run = tmp.path().join("run");
    assert_eq!(code(&render(&mesh, &run, &["--views", "2"])), 0);
    // without planes the synthetic field is simply asymmetric
    assert_eq!(code(&symplane(&["backproject", s(&run), "--synthetic-features"])), 0);
    let missing = tmp.path().join("nope.gt.json");
    assert_eq!(code(&symplane(&["backproject", s(&run), "--synthetic-features", "--gt", s(&missing)])), 6);
}

fn write_planes(path: &Path, planes: &[symplane::geometry::Plane]) {
    let recs: Vec<PlaneRecord> = planes
        .iter()
        .map(|p| {
            let n = p.normal();
            PlaneRecord { normal: [n.x, n.y, n.z], offset: p.offset(), chamfer: 0.0, confidence: 1.0, source: "external".into() }
        })
        .collect();
    std::fs::write(path, serde_json::to_string(&recs).unwrap()).unwrap();
}

#[test]
fn evaluate_reports_and_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (mesh, gt) = export(tmp.path(), "cuboid", "2");
    let shape = make_shape(ShapeKind::Cuboid, 0, 2).unwrap();
    let nm = normalize(&shape.mesh).unwrap();
    let local = symplane::pipeline::planes_to_normalized(&nm, &shape.gt);

    let perfect = tmp.path().join("perfect.json");
    write_planes(&perfect, &local);
    let out = symplane(&["evaluate", s(&perfect), s(&gt), s(&mesh)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("fscore_mean 1.000000"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("perfect.report.json")).unwrap()).unwrap();
    assert_eq!(report["fscore_mean"], 1.0);
    assert!(report["sde_mean"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(tmp.path().join("perfect.report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let empty = tmp.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = symplane(&["evaluate", s(&empty), s(&gt), s(&mesh), "--thresholds", "0.05"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("sde_mean n/a"));
    let csv = std::fs::read_to_string(tmp.path().join("empty.report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.05,0,0,3,"));
    assert!(csv.trim_end().ends_with("n/a"));

    let no_gt = tmp.path().join("missing.gt.json");
    assert_eq!(code(&symplane(&["evaluate", s(&perfect), s(&no_gt), s(&mesh)])), 6);
    std::fs::write(tmp.path().join("garbage.json"), "{not json").unwrap();
    assert_eq!(code(&symplane(&["evaluate", s(&tmp.path().join("garbage.json")), s(&gt), s(&mesh)])), 2);
    assert_eq!(code(&symplane(&["evaluate", s(&perfect), s(&gt), s(&mesh), "--thresholds", "0.1,0.05"])), 64);
}

#[test]
fn full_pipeline_on_small_shapes() {
    let tmp = TempDir::new().unwrap();
    for (kind, min_planes) in [("cuboid", 3), ("blob", 0)] {
        let (mesh, gt) = export(tmp.path(), kind, "3");
        let run = tmp.path().join(format!("run_{kind}"));
        assert_eq!(code(&render(&mesh, &run, &["--views", "6"])), 0);
        let out = symplane(&["backproject", s(&run), "--synthetic-features", "--gt", s(&gt)]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
        let out = symplane(&["detect", s(&run), "--points", "2000", "--k", "1"]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
        let planes: Vec<PlaneRecord> =
            serde_json::from_str(&std::fs::read_to_string(run.join("planes.json")).unwrap()).unwrap();
        assert!(planes.len() <= 1);
        assert!(planes.len() >= min_planes.min(1));
        let (m, _) = RunManifest::load(&run).unwrap();
        assert_eq!(m.completed, vec!["render", "backproject", "detect"]);
        assert_eq!(m.config["detect"]["max_planes"], 1);
    }
}

#[test]
fn config_file_supplies_defaults() {
    let tmp = TempDir::new().unwrap();
    let (mesh, _) = export(tmp.path(), "cube", "1");
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# shared settings\nviews = 3\nsize = 56\nrotations = 2\ntau1 = 0.5\n").unwrap();
    let run = tmp.path().join("run");
    let out = symplane(&["--config", s(&cfg), "render", s(&mesh), "--out", s(&run)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(count_ext(&run, "png"), 6);
    let img = image::open(run.join("view_000_rot000.png")).unwrap();
    assert_eq!(img.width(), 56);
    let run2 = tmp.path().join("run2");
    assert_eq!(code(&symplane(&["--config", s(&cfg), "render", s(&mesh), "--out", s(&run2), "--views", "2"])), 0);
    assert_eq!(count_ext(&run2, "png"), 4);
}

#[test]
fn invariance_writes_one_row_per_config() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    for kind in ["cube", "cuboid", "lshape", "prism5", "prism8"] {
        let out = symplane(&["synth", kind, "--tessellation", "3", "--out", s(&corpus), "--stem", kind]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
    }
    let grid = tmp.path().join("grid.txt");
    std::fs::write(&grid, "views=4 sampling=fm:300\nviews=4 sampling=rm rotations=4\n").unwrap();
    let csv = tmp.path().join("e.csv");
    let out = symplane(&["invariance", s(&corpus), s(&grid), "--size", "112", "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r.ends_with(",5")), "{text}");

    let out = symplane(&["invariance", s(&corpus), s(&grid), "--size", "112", "--pairing", "both"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows.iter().filter(|r| r.contains(",random,")).count(), 2);

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&symplane(&["invariance", s(&empty)])), 64);
}
