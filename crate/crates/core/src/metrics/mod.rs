//! Evaluation against ground-truth planes: symmetry distance error and
//! threshold-averaged F-score.

mod gt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

pub use gt::{load_ground_truth, parse_ground_truth};

use crate::error::{Error, Result};
use crate::geometry::{sample_surface, NormalizedMesh, Plane};
use crate::spatial::TriangleBvh;

/// Plane-distance thresholds the F-score is averaged over.
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.05, 0.1, 0.15, 0.2];

/// Surface samples per SDE evaluation.
pub const DEFAULT_SDE_SAMPLES: usize = 1000;

/// Point-to-surface distances of reflected samples against a fixed mesh.
pub struct SdeEvaluator<'a> {
    mesh: &'a NormalizedMesh,
    bvh: TriangleBvh,
}

impl<'a> SdeEvaluator<'a> {
    pub fn new(mesh: &'a NormalizedMesh) -> SdeEvaluator<'a> {
        SdeEvaluator { bvh: TriangleBvh::new(mesh.mesh()), mesh }
    }

    /// Mean squared distance from the mirror images of `n_samples` surface
    /// samples to the mesh. Coordinates are divided by the diagonal unless
    /// `raw` is set.
    pub fn sde(&self, plane: &Plane, n_samples: usize, seed: u64, raw: bool) -> Result<f64> {
        let samples = sample_surface(self.mesh, n_samples, seed)?;
        let sum: f64 = samples
            .par_iter()
            .map(|s| self.bvh.closest(&plane.reflect(&s.point)).map_or(0.0, |(_, d2)| d2))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let mean = sum / samples.len() as f64;
        Ok(if raw { mean } else { mean / self.mesh.diagonal().powi(2) })
    }
}

/// Symmetry distance error of `plane` on `mesh` in diagonal-normalized units.
pub fn sde(mesh: &NormalizedMesh, plane: &Plane, n_samples: usize, seed: u64) -> Result<f64> {
    SdeEvaluator::new(mesh).sde(plane, n_samples, seed, false)
}

/// `(a, b, c, d)` with the offset divided by the diagonal.
pub fn plane_vec4(plane: &Plane, diag: f64) -> [f64; 4] {
    let n = plane.normal();
    [n.x, n.y, n.z, plane.offset() / diag]
}

/// `min(‖P − Q‖, ‖P + Q‖)` on 4-vectors.
pub fn plane_distance(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for k in 0..4 {
        minus += (p[k] - q[k]).powi(2);
        plus += (p[k] + q[k]).powi(2);
    }
    minus.min(plus).sqrt()
}

/// Precision, recall and F-score at one distance threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ThresholdScore {
    fn from_counts(threshold: f64, tp: usize, fp: usize, fn_: usize) -> ThresholdScore {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let fscore = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        ThresholdScore { threshold, tp, fp, fn_, precision, recall, fscore }
    }
}

/// Scores detected planes against ground truth. Both lists hold 4-vectors as
/// produced by [`plane_vec4`]. Matching is one-to-one and greedy in
/// ascending distance; a pair matches when its distance is below the
/// threshold.
pub fn fscore(detected: &[[f64; 4]], gt: &[[f64; 4]], thresholds: &[f64]) -> Result<Vec<ThresholdScore>> {
    validate_thresholds(thresholds)?;
    let mut pairs: Vec<(f64, usize, usize)> = detected
        .iter()
        .enumerate()
        .flat_map(|(i, d)| gt.iter().enumerate().map(move |(j, g)| (plane_distance(d, g), i, j)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(thresholds
        .iter()
        .map(|&t| {
            let mut det_used = vec![false; detected.len()];
            let mut gt_used = vec![false; gt.len()];
            let mut tp = 0;
            for &(d, i, j) in pairs.iter().take_while(|p| p.0 < t) {
                debug_assert!(d < t);
                if !det_used[i] && !gt_used[j] {
                    det_used[i] = true;
                    gt_used[j] = true;
                    tp += 1;
                }
            }
            ThresholdScore::from_counts(t, tp, detected.len() - tp, gt.len() - tp)
        })
        .collect())
}

fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument("at least one threshold is required".into()));
    }
    if thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("thresholds must be positive and strictly ascending".into()));
    }
    Ok(())
}

/// Evaluation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub thresholds: Vec<f64>,
    pub sde_samples: usize,
    pub seed: u64,
    /// Report SDE in input units instead of diagonal-normalized units.
    pub raw_sde: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { thresholds: DEFAULT_THRESHOLDS.to_vec(), sde_samples: DEFAULT_SDE_SAMPLES, seed: 0, raw_sde: false }
    }
}

fn na_if_none<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        _ => s.serialize_str("n/a"),
    }
}

/// Per-object evaluation result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    /// Mean SDE over detected planes; absent when nothing was detected.
    #[serde(serialize_with = "na_if_none")]
    pub sde_mean: Option<f64>,
    pub sde_per_plane: Vec<f64>,
    pub sde_raw_units: bool,
    pub fscore_mean: f64,
    pub per_threshold: Vec<ThresholdScore>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per threshold.
    pub fn to_csv(&self) -> String {
        let sde = self.sde_mean.map_or_else(|| "n/a".to_string(), |v| format!("{v:e}"));
        let mut out = String::from("threshold,tp,fp,fn,precision,recall,fscore,fscore_mean,sde_mean\n");
        for t in &self.per_threshold {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.threshold, t.tp, t.fp, t.fn_, t.precision, t.recall, t.fscore, self.fscore_mean, sde
            ));
        }
        out
    }
}

/// Scores `detected` planes (normalized coordinates) against `gt` planes
/// (normalized coordinates) on `mesh`.
pub fn evaluate(mesh: &NormalizedMesh, detected: &[Plane], gt: &[Plane], cfg: &EvalConfig) -> Result<EvalReport> {
    let diag = mesh.diagonal();
    let det4: Vec<[f64; 4]> = detected.iter().map(|p| plane_vec4(p, diag)).collect();
    let gt4: Vec<[f64; 4]> = gt.iter().map(|p| plane_vec4(p, diag)).collect();
    let per_threshold = fscore(&det4, &gt4, &cfg.thresholds)?;
    let fscore_mean = per_threshold.iter().map(|t| t.fscore).sum::<f64>() / per_threshold.len() as f64;
    let ev = SdeEvaluator::new(mesh);
    let sde_per_plane =
        detected.iter().map(|p| ev.sde(p, cfg.sde_samples, cfg.seed, cfg.raw_sde)).collect::<Result<Vec<_>>>()?;
    let sde_mean =
        (!sde_per_plane.is_empty()).then(|| sde_per_plane.iter().sum::<f64>() / sde_per_plane.len() as f64);
    Ok(EvalReport { sde_mean, sde_per_plane, sde_raw_units: cfg.raw_sde, fscore_mean, per_threshold })
}
