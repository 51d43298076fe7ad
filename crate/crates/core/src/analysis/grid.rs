use std::collections::HashMap;
use std::sync::Mutex;

use super::{discrepancy, random_pairing_discrepancy, InvarianceConfig, Pairing, Sampling, SyntheticExtractor};
use crate::error::{Error, Result};
use crate::features::{merge_view, render_contribution, Accumulator, Contribution, FeatureCloud, VertexFeatures};
use crate::geometry::{normalize, NormalizedMesh, Plane, TriangleMesh};
use crate::pipeline::{feature_cloud, planes_to_normalized};
use crate::render::{render_each, RenderConfig, RotationSet, ViewScheme};

/// A mesh with its known symmetry planes, both in input coordinates.
#[derive(Clone, Debug)]
pub struct CorpusObject {
    pub name: String,
    pub mesh: TriangleMesh,
    pub gt: Vec<Plane>,
}

/// Settings shared by every grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceSetup {
    pub dim: usize,
    pub noise: f64,
    pub seed: u64,
    pub patch_px: u32,
    pub render: RenderConfig,
}

impl Default for InvarianceSetup {
    fn default() -> Self {
        InvarianceSetup { dim: 32, noise: 0.02, seed: 0, patch_px: 14, render: RenderConfig::default() }
    }
}

/// Discrepancy of every object under one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceResult {
    pub config: InvarianceConfig,
    /// Per object in corpus order; `None` where the object failed.
    pub per_object: Vec<Option<f64>>,
    pub e_mean: f64,
    pub e_std: f64,
    pub n_objects: usize,
}

impl InvarianceResult {
    fn new(config: InvarianceConfig, per_object: Vec<Option<f64>>) -> InvarianceResult {
        let ok: Vec<f64> = per_object.iter().flatten().copied().collect();
        let n = ok.len();
        let (e_mean, e_std) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let m = ok.iter().sum::<f64>() / n as f64;
            (m, (ok.iter().map(|e| (e - m).powi(2)).sum::<f64>() / n as f64).sqrt())
        };
        InvarianceResult { config, per_object, e_mean, e_std, n_objects: n }
    }
}

type RenderSetKey = (ViewScheme, usize, RotationSet);

struct Prepared {
    mesh: NormalizedMesh,
    gt: Vec<Plane>,
}

fn prepare(obj: &CorpusObject) -> Result<Prepared> {
    let mesh = normalize(&obj.mesh)?;
    let gt = planes_to_normalized(&mesh, &obj.gt);
    Ok(Prepared { mesh, gt })
}

/// Renders, extracts and backprojects one object under one view setting.
fn vertex_features(p: &Prepared, key: RenderSetKey, setup: &InvarianceSetup) -> Result<VertexFeatures> {
    let (scheme, n_views, rotations) = key;
    let ex = SyntheticExtractor::new(&p.mesh, &p.gt, setup.dim, setup.noise, setup.seed, setup.patch_px)?;
    let views = scheme.viewpoints(n_views, setup.render.radius(p.mesh.diagonal()))?;
    let out: Mutex<Vec<(u32, Contribution)>> = Mutex::new(Vec::new());
    render_each(&p.mesh, &views, rotations, &setup.render, |r| {
        let map = ex.extract(&p.mesh, r.view_id, r.rotation_deg, &r.fragments)?;
        let c = render_contribution(p.mesh.mesh(), &r.fragments, &map)?;
        out.lock().expect("contribution sink poisoned").push((r.view_id, c));
        Ok(())
    })?;
    let mut out = out.into_inner().expect("contribution sink poisoned");
    // each view's renders arrive in rotation order from a single task
    out.sort_by_key(|(v, _)| *v);
    let mut acc = Accumulator::new(p.mesh.mesh().vertex_count());
    for chunk in out.chunk_by(|a, b| a.0 == b.0) {
        let renders: Vec<Contribution> = chunk.iter().map(|(_, c)| c.clone()).collect();
        acc.add_view(chunk[0].0, &merge_view(&renders)?)?;
    }
    acc.finish(setup.dim)
}

fn cloud_for(p: &Prepared, vf: &VertexFeatures, sampling: Sampling, seed: u64) -> Result<FeatureCloud> {
    match sampling {
        Sampling::RawMesh => FeatureCloud::from_vertices(p.mesh.mesh(), vf),
        Sampling::FeatureMesh(n) => Ok(feature_cloud(&p.mesh, vf, n, seed)?.0),
    }
}

fn measure(p: &Prepared, vf: &VertexFeatures, cfg: &InvarianceConfig, seed: u64) -> Result<f64> {
    let cloud = cloud_for(p, vf, cfg.sampling, seed)?;
    match cfg.pairing {
        Pairing::Random => random_pairing_discrepancy(&cloud, seed),
        Pairing::Symmetric => {
            if p.gt.is_empty() {
                return Err(Error::MissingGroundTruth("symmetric pairing needs a ground-truth plane".into()));
            }
            let mut total = 0.0;
            for plane in &p.gt {
                total += discrepancy(&cloud, plane)?;
            }
            Ok(total / p.gt.len() as f64)
        }
    }
}

/// Feature discrepancy of one object, averaged over its ground-truth planes.
pub fn object_discrepancy(obj: &CorpusObject, cfg: &InvarianceConfig, setup: &InvarianceSetup) -> Result<f64> {
    cfg.validate()?;
    let p = prepare(obj)?;
    let vf = vertex_features(&p, (cfg.scheme, cfg.n_views, cfg.rotations), setup)?;
    measure(&p, &vf, cfg, setup.seed)
}

/// Runs every configuration on every object. Vertex features are shared
/// between cells that differ only in sampling or pairing. Objects that fail
/// are logged and left out of the averages.
pub fn ablation_grid(corpus: &[CorpusObject], configs: &[InvarianceConfig], setup: &InvarianceSetup) -> Result<Vec<InvarianceResult>> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let mut per_cfg: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(corpus.len()); configs.len()];
    for obj in corpus {
        let p = match prepare(obj) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("{}: {e}", obj.name);
                per_cfg.iter_mut().for_each(|v| v.push(None));
                continue;
            }
        };
        let mut cache: HashMap<RenderSetKey, Option<VertexFeatures>> = HashMap::new();
        for (ci, cfg) in configs.iter().enumerate() {
            let key = (cfg.scheme, cfg.n_views, cfg.rotations);
            let vf = cache.entry(key).or_insert_with(|| {
                vertex_features(&p, key, setup).map_err(|e| log::warn!("{} [{cfg}]: {e}", obj.name)).ok()
            });
            let e = vf.as_ref().and_then(|vf| {
                measure(&p, vf, cfg, setup.seed).map_err(|e| log::warn!("{} [{cfg}]: {e}", obj.name)).ok()
            });
            per_cfg[ci].push(e);
        }
    }
    Ok(configs.iter().zip(per_cfg).map(|(c, v)| InvarianceResult::new(*c, v)).collect())
}

/// CSV with one row per configuration.
pub fn results_to_csv(results: &[InvarianceResult]) -> String {
    let mut out = String::from("config_id,scheme,n_views,rotations,sampling,pairing,E_mean,E_std,n_objects\n");
    for (i, r) in results.iter().enumerate() {
        let c = &r.config;
        out.push_str(&format!(
            "{i},{},{},{},{},{},{},{},{}\n",
            c.scheme, c.n_views, c.rotations, c.sampling, c.pairing, r.e_mean, r.e_std, r.n_objects
        ));
    }
    out
}
