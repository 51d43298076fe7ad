//! Feature-space matching, candidate planes, Chamfer verification and
//! selection of reflective symmetry planes.

mod candidates;
mod chamfer;
mod matching;
mod verify;

use serde::{Deserialize, Serialize};

pub use candidates::{bisector, candidate_planes, filter_by_origin, plane_through, CandidatePlane, Source};
pub use chamfer::{chamfer_distance, ReflectionChamfer};
pub use matching::{l1_distance, match_trios, MatchTrio};
pub use verify::{verify_and_select, verify_exhaustive};

use crate::error::{Error, Result};
use crate::features::FeatureCloud;
use crate::geometry::Plane;

/// Detection thresholds. Distances are relative to the bounding-box
/// diagonal; the Chamfer threshold applies to squared distances after
/// dividing coordinates by the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub origin_tol_frac: f64,
    pub chamfer_tau1: f64,
    pub angle_tau2_deg: f64,
    pub max_planes: usize,
    /// Offset gap below which two planes within the angular threshold are
    /// considered the same.
    pub offset_tol_frac: f64,
    /// Seed of the point order used when accumulating Chamfer sums.
    pub seed: u64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            origin_tol_frac: 0.05,
            chamfer_tau1: 0.01,
            angle_tau2_deg: 1.0,
            max_planes: 10,
            offset_tol_frac: 0.01,
            seed: 0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.origin_tol_frac, self.chamfer_tau1, self.angle_tau2_deg, self.offset_tol_frac];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || self.max_planes == 0 {
            return Err(Error::InvalidArgument(format!("invalid detection config {self:?}")));
        }
        Ok(())
    }
}

/// Counts from one detection run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub points: usize,
    pub trios: usize,
    pub candidates: usize,
    pub after_origin_filter: usize,
    pub selected: usize,
}

/// Matching, candidate generation, origin filter, verification and selection.
pub fn detect(cloud: &FeatureCloud, diag: f64, cfg: &DetectionConfig) -> Result<Vec<CandidatePlane>> {
    detect_with_stats(cloud, diag, cfg).map(|(p, _)| p)
}

pub fn detect_with_stats(cloud: &FeatureCloud, diag: f64, cfg: &DetectionConfig) -> Result<(Vec<CandidatePlane>, DetectionStats)> {
    cfg.validate()?;
    if !(diag > 0.0) {
        return Err(Error::InvalidArgument("diagonal must be positive".into()));
    }
    let trios = match_trios(cloud)?;
    let cands = candidate_planes(cloud, &trios, diag);
    let n_cands = cands.len();
    let cands = filter_by_origin(cands, diag, cfg.origin_tol_frac);
    let planes = verify_and_select(cloud.points(), &cands, cfg, diag)?;
    let stats = DetectionStats {
        points: cloud.len(),
        trios: trios.len(),
        candidates: n_cands,
        after_origin_filter: cands.len(),
        selected: planes.len(),
    };
    log::info!("detection: {stats:?}");
    Ok((planes, stats))
}

/// One entry of the detection JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub normal: [f64; 3],
    pub offset: f64,
    pub chamfer: f64,
    pub confidence: f64,
    pub source: String,
}

impl PlaneRecord {
    pub fn from_candidate(c: &CandidatePlane) -> PlaneRecord {
        let p = c.plane.canonical();
        let n = p.normal();
        PlaneRecord {
            normal: [n.x, n.y, n.z],
            offset: p.offset(),
            chamfer: c.chamfer.unwrap_or(f64::NAN),
            confidence: c.confidence.unwrap_or(f64::NAN),
            source: c.source.to_string(),
        }
    }

    pub fn plane(&self) -> Result<Plane> {
        Plane::from_vec4([self.normal[0], self.normal[1], self.normal[2], self.offset])
    }
}

pub fn planes_to_json(planes: &[CandidatePlane]) -> Result<String> {
    let records: Vec<PlaneRecord> = planes.iter().map(PlaneRecord::from_candidate).collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

pub fn planes_from_json(text: &str) -> Result<Vec<PlaneRecord>> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn json_roundtrip_uses_canonical_sign() {
        let mut c = CandidatePlane::new(Plane::new(-Vec3::y(), 0.25).unwrap(), Source::Pair(1, 2));
        c.chamfer = Some(1e-5);
        c.confidence = Some(0.999);
        let text = planes_to_json(&[c]).unwrap();
        let back = planes_from_json(&text).unwrap();
        assert_eq!(back[0].normal, [0.0, 1.0, 0.0]);
        assert_eq!(back[0].offset, -0.25);
        assert_eq!(back[0].source, "pair(1,2)");
    }

    #[test]
    fn config_validation() {
        assert!(DetectionConfig::default().validate().is_ok());
        let bad = DetectionConfig { max_planes: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
