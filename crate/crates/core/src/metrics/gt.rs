use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Plane;

#[derive(Deserialize)]
#[serde(untagged)]
enum GtFile {
    Planes(Vec<[f64; 4]>),
    ById(BTreeMap<String, Vec<[f64; 4]>>),
}

/// Parses a ground-truth file: either a JSON array of `[a, b, c, d]` or an
/// object mapping object ids to such arrays. With an id map, `id` selects
/// the entry; it may be omitted when the map has a single entry. An empty
/// list is valid and describes an object without symmetry.
pub fn parse_ground_truth(text: &str, id: Option<&str>) -> Result<Vec<Plane>> {
    let file: GtFile = serde_json::from_str(text)?;
    let rows = match file {
        GtFile::Planes(rows) => rows,
        GtFile::ById(mut map) => match id {
            Some(id) => map.remove(id).ok_or_else(|| Error::MissingGroundTruth(format!("no entry for `{id}`")))?,
            None if map.len() == 1 => map.into_values().next().unwrap_or_default(),
            None => {
                return Err(Error::MissingGroundTruth(format!(
                    "file holds {} objects; an object id is required",
                    map.len()
                )))
            }
        },
    };
    rows.into_iter().map(Plane::from_vec4).collect()
}

pub fn load_ground_truth(path: &Path, id: Option<&str>) -> Result<Vec<Plane>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MissingGroundTruth(format!("{}: {e}", path.display())))?;
    parse_ground_truth(&text, id)
}
