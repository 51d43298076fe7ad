use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;

use super::{FeatureMap, VertexFeatures};
use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::render::FragmentBuffer;

/// Identifies one render: a viewpoint index and its in-plane rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RenderKey {
    pub view_id: u32,
    pub rotation_deg: u32,
}

impl RenderKey {
    pub fn new(view_id: u32, rotation_deg: u32) -> RenderKey {
        RenderKey { view_id, rotation_deg }
    }
}

impl std::fmt::Display for RenderKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "view {} rotation {}", self.view_id, self.rotation_deg)
    }
}

/// Sparse per-vertex features seen in one render (or one view).
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    /// Ascending vertex ids.
    ids: Vec<u32>,
    /// `ids.len() * d` values.
    means: Vec<f64>,
    /// Number of renders merged into each entry.
    renders: Vec<u32>,
    dim: usize,
}

impl Contribution {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }
}

/// Features one render assigns to vertices.
///
/// Every vertex of a face that wins at least one pixel receives the feature
/// of that pixel's patch; a vertex reached through several pixels gets the
/// mean over those pixels.
pub fn render_contribution(mesh: &TriangleMesh, frags: &FragmentBuffer, map: &FeatureMap) -> Result<Contribution> {
    let (w, h) = (frags.width(), frags.height());
    let p = map.grid();
    if w != h || w % p != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{w}x{h} fragment grid cannot be split into {p}x{p} patches"
        )));
    }
    let px = w / p;
    let nf = mesh.face_count();
    // (face, patch) pair counts, sorted so accumulation order is fixed
    let mut pairs: Vec<u64> = Vec::new();
    for y in 0..h {
        let row = frags.data()[(y * w) as usize..((y + 1) * w) as usize].iter();
        for (x, f) in row.enumerate() {
            if !f.is_covered() {
                continue;
            }
            if f.face as usize >= nf {
                return Err(Error::DimensionMismatch(format!(
                    "fragment face {} out of range for {nf} faces",
                    f.face
                )));
            }
            let patch = (y / px) * p + x as u32 / px;
            pairs.push(((f.face as u64) << 32) | patch as u64);
        }
    }
    pairs.sort_unstable();
    let mut triples: Vec<(u32, u32, u32)> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j] == pairs[i] {
            j += 1;
        }
        let (face, patch) = ((pairs[i] >> 32) as usize, pairs[i] as u32);
        for &v in &mesh.faces()[face] {
            triples.push((v as u32, patch, (j - i) as u32));
        }
        i = j;
    }
    triples.sort_unstable();

    let dim = map.dim() as usize;
    let mut out = Contribution { ids: Vec::new(), means: Vec::new(), renders: Vec::new(), dim };
    let mut acc = vec![0.0f64; dim];
    let mut i = 0;
    while i < triples.len() {
        let v = triples[i].0;
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut count = 0u64;
        while i < triples.len() && triples[i].0 == v {
            let (_, patch, c) = triples[i];
            for (a, &f) in acc.iter_mut().zip(map.patch_flat(patch as usize)) {
                *a += c as f64 * f as f64;
            }
            count += c as u64;
            i += 1;
        }
        out.ids.push(v);
        out.means.extend(acc.iter().map(|a| a / count as f64));
        out.renders.push(1);
    }
    Ok(out)
}

/// Element-wise sum of equally long slices by recursive halving.
fn pairwise_sum(parts: &[&[f64]], out: &mut [f64]) {
    match parts.len() {
        0 => out.iter_mut().for_each(|o| *o = 0.0),
        1 => out.copy_from_slice(parts[0]),
        n => {
            let mut right = vec![0.0; out.len()];
            pairwise_sum(&parts[..n / 2], out);
            pairwise_sum(&parts[n / 2..], &mut right);
            out.iter_mut().zip(&right).for_each(|(o, r)| *o += r);
        }
    }
}

/// Merges the renders of one viewpoint: per vertex, the mean over the
/// renders that saw it, summed pairwise in the given order.
pub fn merge_view(contribs: &[Contribution]) -> Result<Contribution> {
    let dim = contribs.first().map_or(0, |c| c.dim);
    if contribs.iter().any(|c| c.dim != dim) {
        return Err(Error::DimensionMismatch("feature dimension differs between renders".into()));
    }
    let mut entries: Vec<(u32, usize, usize)> = contribs
        .iter()
        .enumerate()
        .flat_map(|(r, c)| c.ids.iter().enumerate().map(move |(k, &v)| (v, r, k)))
        .collect();
    entries.sort_unstable();
    let mut out = Contribution { ids: Vec::new(), means: Vec::new(), renders: Vec::new(), dim };
    let mut buf = vec![0.0; dim];
    let mut i = 0;
    while i < entries.len() {
        let v = entries[i].0;
        let start = i;
        while i < entries.len() && entries[i].0 == v {
            i += 1;
        }
        let parts: Vec<&[f64]> = entries[start..i]
            .iter()
            .map(|&(_, r, k)| &contribs[r].means[k * dim..(k + 1) * dim])
            .collect();
        pairwise_sum(&parts, &mut buf);
        let m = parts.len() as f64;
        out.ids.push(v);
        out.means.extend(buf.iter().map(|s| s / m));
        out.renders.push(entries[start..i].iter().map(|&(_, r, k)| contribs[r].renders[k]).sum());
    }
    Ok(out)
}

/// Folds per-view contributions into per-vertex means.
///
/// Views must be added in strictly ascending id order, which makes the
/// result independent of how the views were computed or scheduled.
pub struct Accumulator {
    dim: Option<usize>,
    sum: Vec<f64>,
    views: Vec<u32>,
    visibility: Vec<u32>,
    last_view: Option<u32>,
}

impl Accumulator {
    pub fn new(vertex_count: usize) -> Accumulator {
        Accumulator {
            dim: None,
            sum: Vec::new(),
            views: vec![0; vertex_count],
            visibility: vec![0; vertex_count],
            last_view: None,
        }
    }

    pub fn add_view(&mut self, view_id: u32, view: &Contribution) -> Result<()> {
        if self.last_view.is_some_and(|l| view_id <= l) {
            return Err(Error::InvalidArgument(format!("view {view_id} added out of order")));
        }
        self.last_view = Some(view_id);
        if view.ids.is_empty() {
            return Ok(());
        }
        let dim = *self.dim.get_or_insert(view.dim);
        if dim != view.dim {
            return Err(Error::DimensionMismatch(format!("feature dimension {} vs {dim}", view.dim)));
        }
        if self.sum.is_empty() {
            self.sum = vec![0.0; self.views.len() * dim];
        }
        for (k, &v) in view.ids.iter().enumerate() {
            let v = v as usize;
            if v >= self.views.len() {
                return Err(Error::DimensionMismatch(format!("vertex {v} out of range")));
            }
            let dst = &mut self.sum[v * dim..(v + 1) * dim];
            dst.iter_mut().zip(&view.means[k * dim..(k + 1) * dim]).for_each(|(s, m)| *s += m);
            self.views[v] += 1;
            self.visibility[v] += view.renders[k];
        }
        Ok(())
    }

    /// Final features; `dim` is used when no view contributed anything.
    pub fn finish(self, dim: usize) -> Result<VertexFeatures> {
        let dim = self.dim.unwrap_or(dim);
        let n = self.views.len();
        let mut data = vec![0.0f32; n * dim];
        for v in 0..n {
            if self.views[v] > 0 {
                let c = self.views[v] as f64;
                for (d, s) in data[v * dim..(v + 1) * dim].iter_mut().zip(&self.sum[v * dim..(v + 1) * dim]) {
                    *d = (s / c) as f32;
                }
            }
        }
        VertexFeatures::new(dim, data, self.visibility)
    }
}

/// Pairs fragment buffers with feature maps by key. Repeated keys pair in
/// order of appearance.
fn pair_up<'a>(
    fragments: &'a [(RenderKey, FragmentBuffer)],
    maps: &'a [FeatureMap],
) -> Result<Vec<(RenderKey, &'a FragmentBuffer, &'a FeatureMap)>> {
    let mut by_key: HashMap<RenderKey, VecDeque<&FeatureMap>> = HashMap::new();
    for m in maps {
        by_key.entry(RenderKey::new(m.view_id, m.rotation_deg)).or_default().push_back(m);
    }
    let mut out = Vec::with_capacity(fragments.len());
    for (key, frags) in fragments {
        let map = by_key
            .get_mut(key)
            .and_then(|q| q.pop_front())
            .ok_or_else(|| Error::Pairing(format!("no feature map for {key}")))?;
        out.push((*key, frags, map));
    }
    let mut leftover: Vec<RenderKey> =
        by_key.iter().filter(|(_, q)| !q.is_empty()).map(|(k, _)| *k).collect();
    if !leftover.is_empty() {
        leftover.sort();
        return Err(Error::Pairing(format!("feature map without fragments for {}", leftover[0])));
    }
    Ok(out)
}

/// Backprojects paired feature maps onto mesh vertices.
///
/// Per render, pixel contributions to a vertex are averaged; renders of the
/// same view are then averaged, and finally the views. The result does not
/// depend on the input order except for the relative order of repeated keys.
pub fn backproject(
    mesh: &TriangleMesh,
    fragments: &[(RenderKey, FragmentBuffer)],
    maps: &[FeatureMap],
) -> Result<VertexFeatures> {
    let mut pairs = pair_up(fragments, maps)?;
    let dim = maps.first().map_or(1, |m| m.dim() as usize);
    if maps.iter().any(|m| m.dim() as usize != dim) {
        return Err(Error::DimensionMismatch("feature maps disagree on dimension".into()));
    }
    pairs.sort_by_key(|(k, _, _)| *k);
    let mut groups: BTreeMap<u32, Vec<(&FragmentBuffer, &FeatureMap)>> = BTreeMap::new();
    for (k, f, m) in pairs {
        groups.entry(k.view_id).or_default().push((f, m));
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let mut acc = Accumulator::new(mesh.vertex_count());
    // bounded batches keep memory flat for large view counts
    for batch in groups.chunks(16) {
        let views: Vec<Contribution> = batch
            .par_iter()
            .map(|(_, renders)| {
                let c: Vec<Contribution> = renders
                    .iter()
                    .map(|(f, m)| render_contribution(mesh, f, m))
                    .collect::<Result<_>>()?;
                merge_view(&c)
            })
            .collect::<Result<_>>()?;
        for ((view_id, _), c) in batch.iter().zip(&views) {
            acc.add_view(*view_id, c)?;
        }
    }
    acc.finish(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::render::Fragment;

    fn tri_mesh() -> TriangleMesh {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()];
        TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    fn one_pixel(face: i32, x: u32, y: u32) -> FragmentBuffer {
        let mut fb = FragmentBuffer::empty(4, 4);
        fb.data_mut()[(y * 4 + x) as usize] = Fragment { face, bary: [1.0, 0.0, 0.0], depth: 1.0 };
        fb
    }

    fn const_map(view: u32, rot: u32, vals: [f32; 4]) -> FeatureMap {
        // 2x2 patches, d = 1
        FeatureMap::new(view, rot, 2, 1, vals.to_vec()).unwrap()
    }

    #[test]
    fn single_pixel_assigns_patch_feature() {
        let frags = vec![(RenderKey::new(0, 0), one_pixel(0, 3, 0))];
        let maps = vec![const_map(0, 0, [1.0, 2.0, 3.0, 4.0])];
        let vf = backproject(&tri_mesh(), &frags, &maps).unwrap();
        for v in 0..3 {
            assert_eq!(vf.feature(v), &[2.0]);
            assert_eq!(vf.visibility()[v], 1);
        }
        assert!(!vf.is_covered(3));
        assert_eq!(vf.feature(3), &[0.0]);
    }

    #[test]
    fn two_views_average() {
        let frags = vec![(RenderKey::new(0, 0), one_pixel(0, 0, 0)), (RenderKey::new(1, 0), one_pixel(0, 0, 0))];
        let maps = vec![const_map(1, 0, [5.0; 4]), const_map(0, 0, [1.0; 4])];
        let vf = backproject(&tri_mesh(), &frags, &maps).unwrap();
        assert_eq!(vf.feature(0), &[3.0]);
    }

    #[test]
    fn pixels_within_render_are_averaged_first() {
        // view 0: vertex 0 through 3 pixels in patch 0 (value 0) and 1 in patch 3 (value 8)
        let mut fb = FragmentBuffer::empty(4, 4);
        for (x, y) in [(0, 0), (1, 0), (0, 1), (3, 3)] {
            fb.data_mut()[y * 4 + x] = Fragment { face: 0, bary: [1.0, 0.0, 0.0], depth: 1.0 };
        }
        let frags = vec![(RenderKey::new(0, 0), fb), (RenderKey::new(1, 0), one_pixel(0, 0, 0))];
        let maps = vec![const_map(0, 0, [0.0, 0.0, 0.0, 8.0]), const_map(1, 0, [4.0; 4])];
        let vf = backproject(&tri_mesh(), &frags, &maps).unwrap();
        // render means: 2.0 and 4.0
        assert_eq!(vf.feature(0), &[3.0]);
    }

    #[test]
    fn pairing_errors() {
        let frags = vec![(RenderKey::new(0, 0), one_pixel(0, 0, 0))];
        let wrong = vec![const_map(0, 90, [0.0; 4])];
        assert!(matches!(backproject(&tri_mesh(), &frags, &wrong), Err(Error::Pairing(_))));
        let extra = vec![const_map(0, 0, [0.0; 4]), const_map(2, 0, [0.0; 4])];
        assert!(matches!(backproject(&tri_mesh(), &frags, &extra), Err(Error::Pairing(_))));
    }

    #[test]
    fn incompatible_grid() {
        let frags = vec![(RenderKey::new(0, 0), one_pixel(0, 0, 0))];
        let maps = vec![FeatureMap::new(0, 0, 3, 1, vec![0.0; 9]).unwrap()];
        assert!(matches!(backproject(&tri_mesh(), &frags, &maps), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn repeated_renders_are_exact() {
        let frags: Vec<_> = (0..4).map(|_| (RenderKey::new(0, 0), one_pixel(1, 2, 2))).collect();
        let maps: Vec<_> = (0..4).map(|_| const_map(0, 0, [0.1, 0.2, 0.3, 0.7])).collect();
        let four = backproject(&tri_mesh(), &frags, &maps).unwrap();
        let one = backproject(&tri_mesh(), &frags[..1], &maps[..1]).unwrap();
        assert_eq!(four.data(), one.data());
        assert_eq!(four.visibility()[0], 4);
    }

    #[test]
    fn out_of_order_views_rejected() {
        let mut acc = Accumulator::new(1);
        let c = Contribution { ids: vec![], means: vec![], renders: vec![], dim: 1 };
        acc.add_view(3, &c).unwrap();
        assert!(acc.add_view(3, &c).is_err());
    }
}
