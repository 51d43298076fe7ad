use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use super::manifest::{RenderEntry, RunManifest};
use super::*;
use crate::analysis::{ablation_grid, parse_grid, results_to_csv, CorpusObject, InvarianceConfig, InvarianceSetup, Pairing};
use crate::features::{load_feature_map, merge_view, render_contribution, synthetic_features, Accumulator, VertexFeatures};
use crate::geometry::{load_mesh, normalize, save_obj, MeshFormat, NormalizedMesh, Plane};
use crate::metrics::{evaluate as eval_planes, load_ground_truth, EvalConfig, DEFAULT_THRESHOLDS};
use crate::pipeline::{feature_cloud, planes_to_normalized};
use crate::render::{fmap_name, frag_name, png_name, render_each, save_png, FragmentBuffer, RenderConfig, RotationSet, ViewScheme};
use crate::symmetry::{detect_with_stats, planes_from_json, planes_to_json, DetectionConfig, PlaneRecord};
use crate::synth::{export_shape, gt_to_json, make_shape, random_rotation, ShapeKind};

const MESH_COPY: &str = "mesh.obj";
const VERTEX_FEATURES: &str = "vertex_features.bin";
const PLANES: &str = "planes.json";

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Input mesh (.obj or .off).
    pub mesh: PathBuf,
    /// Number of viewpoints.
    #[arg(long, default_value_t = 42, value_parser = clap::value_parser!(u64).range(1..))]
    pub views: u64,
    /// Viewpoint scheme: fib or reg.
    #[arg(long, default_value = "fib")]
    pub scheme: ViewScheme,
    /// In-plane rotations per view: 1, 2, 3, 4 or t4.
    #[arg(long, default_value = "1")]
    pub rotations: RotationSet,
    /// Output run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Image side in pixels.
    #[arg(long, default_value_t = 518)]
    pub size: u32,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = 40.0)]
    pub fov: f64,
    /// Camera distance in bounding-box diagonals.
    #[arg(long, default_value_t = 2.2)]
    pub radius_factor: f64,
    /// Object id recorded in the manifest (default: mesh file stem).
    #[arg(long)]
    pub id: Option<String>,
}

#[derive(Args, Debug)]
pub struct BackprojectArgs {
    /// Run directory or its manifest.json.
    pub manifest: PathBuf,
    /// Directory of .fmap files named like the renders.
    pub features: Option<PathBuf>,
    /// Generate reflection-invariant vertex features instead of reading maps.
    #[arg(long)]
    pub synthetic_features: bool,
    /// Ground-truth planes for synthetic features (input mesh coordinates).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Object id inside a multi-object ground-truth file.
    #[arg(long)]
    pub object_id: Option<String>,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Run directory or its manifest.json.
    pub manifest: PathBuf,
    /// Surface samples in the feature cloud.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(3..))]
    pub points: u64,
    /// Chamfer acceptance threshold (diagonal-normalized).
    #[arg(long, default_value_t = 0.01)]
    pub tau1: f64,
    /// Angular deduplication threshold in degrees.
    #[arg(long, default_value_t = 1.0)]
    pub tau2: f64,
    /// Maximum number of planes.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Largest plane distance from the center, in diagonals.
    #[arg(long, default_value_t = 0.05)]
    pub origin_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: planes.json in the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Detected planes JSON (normalized coordinates).
    pub planes: PathBuf,
    /// Ground-truth JSON (input mesh coordinates).
    pub gt: PathBuf,
    /// The evaluated mesh.
    pub mesh: PathBuf,
    /// Comma-separated plane-distance thresholds.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub sde_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report SDE in mesh units instead of diagonal-normalized units.
    #[arg(long)]
    pub raw_sde: bool,
    #[arg(long)]
    pub object_id: Option<String>,
    /// Output prefix; writes <prefix>.json and <prefix>.csv
    /// (default: next to the planes file).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PairingChoice {
    Symmetric,
    Random,
    /// Every grid cell under both pairings.
    Both,
}

#[derive(Args, Debug)]
pub struct InvarianceArgs {
    /// Directory of meshes with `<stem>.gt.json` ground truth.
    pub corpus: PathBuf,
    /// Grid file, one `key=value ...` configuration per line.
    pub grid: Option<PathBuf>,
    /// Override the pairing of every configuration.
    #[arg(long, value_enum)]
    pub pairing: Option<PairingChoice>,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 518)]
    pub size: u32,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// cube, cuboid, lshape, prism<N> or blob.
    pub kind: ShapeKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub tessellation: u64,
    /// Apply the uniform random rotation drawn from this seed.
    #[arg(long)]
    pub rotate: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// File stem (default: the shape name).
    #[arg(long)]
    pub stem: Option<String>,
}

fn io_err(code: i32, what: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::new(code, format!("{}: {e}", what.display()))
}

fn load_input_mesh(path: &Path) -> CliResult<NormalizedMesh> {
    let mesh = load_mesh(path, None).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    normalize(&mesh).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn run_mesh(m: &RunManifest, dir: &Path) -> CliResult<NormalizedMesh> {
    load_input_mesh(&dir.join(&m.mesh))
}

fn load_run(path: &Path) -> CliResult<(RunManifest, PathBuf)> {
    RunManifest::load(path).map_err(|e| CliError::usage(e.to_string()))
}

fn save_run(m: &RunManifest, dir: &Path) -> CliResult<()> {
    m.save(dir).map_err(CliError::stage(EXIT_FAILURE))
}

pub fn render(a: RenderArgs) -> CliResult<()> {
    let mesh = load_mesh(&a.mesh, None).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", a.mesh.display())))?;
    let nm = normalize(&mesh).map_err(CliError::stage(EXIT_RENDER))?;
    if a.size == 0 || !(a.fov > 0.0 && a.fov < 180.0) || !(a.radius_factor > 0.0) {
        return Err(CliError::usage("size, fov and radius factor must be positive (fov below 180)"));
    }
    let cfg = RenderConfig { size: a.size, fov_deg: a.fov, radius_factor: a.radius_factor };
    let views = a.scheme.viewpoints(a.views as usize, cfg.radius(nm.diagonal())).map_err(CliError::stage(EXIT_RENDER))?;
    std::fs::create_dir_all(&a.out).map_err(io_err(EXIT_RENDER, &a.out))?;
    save_obj(&mesh, &a.out.join(MESH_COPY)).map_err(CliError::stage(EXIT_RENDER))?;
    render_each(&nm, &views, a.rotations, &cfg, |r| {
        save_png(&r.image, &a.out.join(png_name(r.view_id, r.rotation_deg)))?;
        r.fragments.save(&a.out.join(frag_name(r.view_id, r.rotation_deg)))
    })
    .map_err(CliError::stage(EXIT_RENDER))?;
    let renders: Vec<RenderEntry> = (0..views.len() as u32)
        .flat_map(|v| {
            a.rotations.angles().iter().map(move |&deg| RenderEntry {
                view_id: v,
                rotation_deg: deg,
                png: png_name(v, deg),
                frag: frag_name(v, deg),
            })
        })
        .collect();
    let c = nm.centroid_applied();
    let id = a.id.clone().unwrap_or_else(|| a.mesh.file_stem().map_or("object".into(), |s| s.to_string_lossy().into_owned()));
    let mut m = RunManifest {
        object_id: id,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        mesh: MESH_COPY.to_string(),
        diagonal: nm.diagonal(),
        centroid_applied: [c.x, c.y, c.z],
        renders,
        vertex_features: None,
        planes: None,
        config: BTreeMap::new(),
        config_hash: String::new(),
        completed: Vec::new(),
    };
    let stage = json!({
        "scheme": a.scheme.to_string(),
        "views": a.views,
        "rotations": a.rotations.to_string(),
        "size": a.size,
        "fov_deg": a.fov,
        "radius_factor": a.radius_factor,
    });
    m.record_stage("render", stage).map_err(CliError::stage(EXIT_FAILURE))?;
    save_run(&m, &a.out)?;
    println!("rendered {} images from {} views into {}", m.renders.len(), views.len(), a.out.display());
    println!("config hash {}", m.config_hash);
    Ok(())
}

fn backproject_maps(m: &RunManifest, dir: &Path, fdir: &Path, nm: &NormalizedMesh) -> CliResult<VertexFeatures> {
    for r in &m.renders {
        let p = fdir.join(fmap_name(r.view_id, r.rotation_deg));
        if !p.is_file() {
            return Err(CliError::new(
                EXIT_PAIRING,
                format!("missing feature map for view {} rotation {} ({})", r.view_id, r.rotation_deg, p.display()),
            ));
        }
    }
    let mut by_view: BTreeMap<u32, Vec<&RenderEntry>> = BTreeMap::new();
    for r in &m.renders {
        by_view.entry(r.view_id).or_default().push(r);
    }
    let groups: Vec<(u32, Vec<&RenderEntry>)> = by_view.into_iter().collect();
    let mut acc = Accumulator::new(nm.mesh().vertex_count());
    let mut dim = None;
    // bounded batches keep memory flat for large view counts
    for batch in groups.chunks(16) {
        let views = batch
            .par_iter()
            .map(|(_, entries)| {
                let mut contribs = Vec::with_capacity(entries.len());
                let mut dims = Vec::new();
                for r in entries {
                    let frags = FragmentBuffer::load(&dir.join(&r.frag))?;
                    let map = load_feature_map(&fdir.join(fmap_name(r.view_id, r.rotation_deg)))?;
                    if (map.view_id, map.rotation_deg) != (r.view_id, r.rotation_deg) {
                        return Err(Error::Pairing(format!(
                            "{} holds view {} rotation {}",
                            fmap_name(r.view_id, r.rotation_deg),
                            map.view_id,
                            map.rotation_deg
                        )));
                    }
                    dims.push(map.dim() as usize);
                    contribs.push(render_contribution(nm.mesh(), &frags, &map)?);
                }
                Ok((merge_view(&contribs)?, dims))
            })
            .collect::<crate::Result<Vec<_>>>()
            .map_err(CliError::stage(EXIT_PAIRING))?;
        for ((view_id, _), (c, dims)) in batch.iter().zip(&views) {
            for d in dims {
                if *dim.get_or_insert(*d) != *d {
                    return Err(CliError::new(EXIT_PAIRING, format!("feature dimension {d} differs from {}", dim.unwrap_or(0))));
                }
            }
            acc.add_view(*view_id, c).map_err(CliError::stage(EXIT_PAIRING))?;
        }
    }
    acc.finish(dim.unwrap_or(1)).map_err(CliError::stage(EXIT_PAIRING))
}

pub fn backproject(a: BackprojectArgs) -> CliResult<()> {
    let (mut m, dir) = load_run(&a.manifest)?;
    let nm = run_mesh(&m, &dir)?;
    let (vf, stage) = if a.synthetic_features {
        if !(a.noise >= 0.0) {
            return Err(CliError::usage("noise must be non-negative"));
        }
        let planes = match &a.gt {
            Some(p) => load_ground_truth(p, a.object_id.as_deref()).map_err(|e| CliError::new(EXIT_NO_GT, e.to_string()))?,
            None => Vec::new(),
        };
        let local = planes_to_normalized(&nm, &planes);
        let vf = synthetic_features(&nm, &local, a.dim, a.noise, a.seed).map_err(CliError::stage(EXIT_FAILURE))?;
        let gt: Vec<[f64; 4]> = planes.iter().map(Plane::to_vec4).collect();
        (vf, json!({"mode": "synthetic", "dim": a.dim, "noise": a.noise, "seed": a.seed, "planes": gt}))
    } else {
        let fdir = a.features.as_ref().ok_or_else(|| CliError::usage("a feature-map directory or --synthetic-features is required"))?;
        let vf = backproject_maps(&m, &dir, fdir, &nm)?;
        (vf, json!({"mode": "maps", "features": fdir.display().to_string()}))
    };
    vf.save(&dir.join(VERTEX_FEATURES)).map_err(CliError::stage(EXIT_FAILURE))?;
    m.vertex_features = Some(VERTEX_FEATURES.to_string());
    m.record_stage("backproject", stage).map_err(CliError::stage(EXIT_FAILURE))?;
    save_run(&m, &dir)?;
    println!(
        "vertex features: {} vertices, dimension {}, covered {}, uncovered fraction {:.4}",
        vf.len(),
        vf.dim(),
        vf.covered_count(),
        vf.uncovered_fraction()
    );
    Ok(())
}

pub fn detect(a: DetectArgs) -> CliResult<()> {
    let (mut m, dir) = load_run(&a.manifest)?;
    let vf_path = m
        .vertex_features
        .as_ref()
        .map(|p| dir.join(p))
        .filter(|p| p.is_file())
        .ok_or_else(|| CliError::new(EXIT_NO_FEATURES, "no vertex features in this run; run backproject first"))?;
    let vf = VertexFeatures::load(&vf_path).map_err(CliError::stage(EXIT_NO_FEATURES))?;
    let nm = run_mesh(&m, &dir)?;
    let cfg = DetectionConfig {
        origin_tol_frac: a.origin_frac,
        chamfer_tau1: a.tau1,
        angle_tau2_deg: a.tau2,
        max_planes: a.k as usize,
        seed: a.seed,
        ..DetectionConfig::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let (cloud, dropped) = feature_cloud(&nm, &vf, a.points as usize, a.seed).map_err(CliError::stage(EXIT_NO_FEATURES))?;
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} samples on faces with uncovered vertices");
    }
    let (found, stats) = detect_with_stats(&cloud, nm.diagonal(), &cfg).map_err(CliError::stage(EXIT_NO_FEATURES))?;
    let text = planes_to_json(&found).map_err(CliError::stage(EXIT_FAILURE))?;
    let out = a.out.clone().unwrap_or_else(|| dir.join(PLANES));
    std::fs::write(&out, text + "\n").map_err(io_err(EXIT_FAILURE, &out))?;
    if a.out.is_none() {
        m.planes = Some(PLANES.to_string());
    }
    let mut stage = serde_json::to_value(&cfg).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    stage["points"] = json!(a.points);
    m.record_stage("detect", stage).map_err(CliError::stage(EXIT_FAILURE))?;
    save_run(&m, &dir)?;
    println!(
        "{} planes ({} candidates, {} near the center, {} samples)",
        found.len(),
        stats.candidates,
        stats.after_origin_filter,
        cloud.len()
    );
    for (i, c) in found.iter().enumerate() {
        let r = PlaneRecord::from_candidate(c);
        println!(
            "plane {i}: normal ({:.6}, {:.6}, {:.6}) offset {:.6} chamfer {:.3e} confidence {:.6} source {}",
            r.normal[0], r.normal[1], r.normal[2], r.offset, r.chamfer, r.confidence, r.source
        );
    }
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let gt = load_ground_truth(&a.gt, a.object_id.as_deref()).map_err(|e| CliError::new(EXIT_NO_GT, e.to_string()))?;
    let nm = load_input_mesh(&a.mesh)?;
    let text = std::fs::read_to_string(&a.planes).map_err(io_err(EXIT_PARSE, &a.planes))?;
    let detected: Vec<Plane> = planes_from_json(&text)
        .and_then(|rs| rs.iter().map(PlaneRecord::plane).collect())
        .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", a.planes.display())))?;
    let cfg = EvalConfig {
        thresholds: a.thresholds.clone().unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()),
        sde_samples: a.sde_samples as usize,
        seed: a.seed,
        raw_sde: a.raw_sde,
    };
    let report = eval_planes(&nm, &detected, &planes_to_normalized(&nm, &gt), &cfg).map_err(CliError::stage(EXIT_FAILURE))?;
    let prefix = a.out.clone().unwrap_or_else(|| a.planes.with_extension("report"));
    let json_path = PathBuf::from(format!("{}.json", prefix.display()));
    let csv_path = PathBuf::from(format!("{}.csv", prefix.display()));
    let json_text = report.to_json().map_err(CliError::stage(EXIT_FAILURE))?;
    std::fs::write(&json_path, json_text + "\n").map_err(io_err(EXIT_FAILURE, &json_path))?;
    std::fs::write(&csv_path, report.to_csv()).map_err(io_err(EXIT_FAILURE, &csv_path))?;
    let sde = report.sde_mean.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
    println!("fscore_mean {:.6} sde_mean {sde}", report.fscore_mean);
    for t in &report.per_threshold {
        println!(
            "threshold {}: tp {} fp {} fn {} precision {:.6} recall {:.6} fscore {:.6}",
            t.threshold, t.tp, t.fp, t.fn_, t.precision, t.recall, t.fscore
        );
    }
    Ok(())
}

fn load_corpus(dir: &Path) -> CliResult<Vec<CorpusObject>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| MeshFormat::from_path(p).is_some()).collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let name = p.file_stem().map_or(String::new(), |s| s.to_string_lossy().into_owned());
        let mesh = match load_mesh(&p, None) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("skipping {}: {e}", p.display());
                eprintln!("warning: skipping {}: {e}", p.display());
                continue;
            }
        };
        let gt = load_ground_truth(&p.with_file_name(format!("{name}.gt.json")), Some(&name)).unwrap_or_else(|e| {
            eprintln!("warning: {name}: {e}");
            Vec::new()
        });
        out.push(CorpusObject { name, mesh, gt });
    }
    Ok(out)
}

pub fn invariance(a: InvarianceArgs) -> CliResult<()> {
    let corpus = load_corpus(&a.corpus)?;
    if corpus.is_empty() {
        return Err(CliError::usage(format!("no meshes in {}", a.corpus.display())));
    }
    let mut configs = match &a.grid {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_err(EXIT_USAGE, p))?;
            parse_grid(&text).map_err(|e| CliError::usage(e.to_string()))?
        }
        None => vec![InvarianceConfig::default()],
    };
    if configs.is_empty() {
        return Err(CliError::usage("the grid file lists no configurations"));
    }
    configs = match a.pairing {
        None => configs,
        Some(PairingChoice::Symmetric) => configs.into_iter().map(|c| InvarianceConfig { pairing: Pairing::Symmetric, ..c }).collect(),
        Some(PairingChoice::Random) => configs.into_iter().map(|c| InvarianceConfig { pairing: Pairing::Random, ..c }).collect(),
        Some(PairingChoice::Both) => configs
            .into_iter()
            .flat_map(|c| [InvarianceConfig { pairing: Pairing::Symmetric, ..c }, InvarianceConfig { pairing: Pairing::Random, ..c }])
            .collect(),
    };
    let setup = InvarianceSetup {
        dim: a.dim,
        noise: a.noise,
        seed: a.seed,
        render: RenderConfig { size: a.size, ..RenderConfig::default() },
        ..InvarianceSetup::default()
    };
    let results = ablation_grid(&corpus, &configs, &setup).map_err(CliError::stage(EXIT_FAILURE))?;
    for r in &results {
        for (obj, e) in corpus.iter().zip(&r.per_object) {
            if e.is_none() {
                eprintln!("warning: {} failed under [{}]", obj.name, r.config);
            }
        }
    }
    let csv = results_to_csv(&results);
    match &a.out {
        Some(p) => std::fs::write(p, &csv).map_err(io_err(EXIT_FAILURE, p))?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn synth(a: SynthArgs) -> CliResult<()> {
    let mut shape = make_shape(a.kind, a.seed, a.tessellation as usize).map_err(CliError::stage(EXIT_FAILURE))?;
    if let Some(r) = a.rotate {
        shape = random_rotation(&shape, r);
    }
    let stem = a.stem.clone().unwrap_or_else(|| shape.name.clone());
    export_shape(&shape, &a.out, &stem).map_err(CliError::stage(EXIT_FAILURE))?;
    if !shape.extended_gt.is_empty() {
        let p = a.out.join(format!("{stem}.gt_extended.json"));
        let text = gt_to_json(&shape.extended_gt).map_err(CliError::stage(EXIT_FAILURE))?;
        std::fs::write(&p, text).map_err(io_err(EXIT_FAILURE, &p))?;
    }
    println!(
        "{stem}: {} vertices, {} faces, {} ground-truth planes",
        shape.mesh.vertex_count(),
        shape.mesh.face_count(),
        shape.gt.len()
    );
    Ok(())
}
