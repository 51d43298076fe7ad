use std::fmt::Write as _;
use std::path::Path;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

/// Loads a mesh; `format` defaults to the one implied by the file extension.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriangleMesh> {
    let format = format.or_else(|| MeshFormat::from_path(path)).ok_or_else(|| {
        Error::InvalidArgument(format!("cannot infer mesh format of {}", path.display()))
    })?;
    let text = std::fs::read_to_string(path)?;
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Off => parse_off(&text),
    }
}

/// Splits a polygon into triangles around its first corner, skipping
/// triangles that repeat an index.
fn fan(poly: &[usize], out: &mut Vec<[usize; 3]>) {
    for w in 1..poly.len() - 1 {
        let t = [poly[0], poly[w], poly[w + 1]];
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            out.push(t);
        } else {
            log::warn!("skipping degenerate triangle {t:?}");
        }
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, "missing coordinate"))?;
    tok.parse::<f64>().map_err(|_| Error::parse(line, format!("bad number `{tok}`")))
}

/// Wavefront OBJ reader. Only `v` and `f` records are used.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                poly.clear();
                for tok in toks {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| Error::parse(line, format!("bad face index `{tok}`")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(Error::parse(line, "face index 0"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::parse(line, format!("face index {i} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(Error::parse(line, "face with fewer than 3 corners"));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Object File Format reader (`OFF` header, counts line, vertices, faces).
pub fn parse_off(text: &str) -> Result<TriangleMesh> {
    // (line number, tokens) with comments and blank lines removed
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let c = l.split('#').next().unwrap_or("").trim();
        (!c.is_empty()).then_some((i + 1, c))
    });
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| Error::parse(hl, "missing OFF header"))?
        .trim();
    let counts_line = if rest.is_empty() {
        lines.next().ok_or_else(|| Error::parse(hl, "missing counts"))?
    } else {
        (hl, rest)
    };
    let counts: Vec<usize> = counts_line
        .1
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(counts_line.0, format!("bad count `{t}`"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::parse(counts_line.0, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| Error::parse(0, "truncated vertex list"))?;
        let mut t = l.split_whitespace();
        let x = parse_f64(t.next(), ln)?;
        let y = parse_f64(t.next(), ln)?;
        let z = parse_f64(t.next(), ln)?;
        vertices.push(Vec3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    let mut poly = Vec::new();
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| Error::parse(0, "truncated face list"))?;
        let mut t = l.split_whitespace();
        let k: usize = t
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(ln, "bad face corner count"))?;
        poly.clear();
        for _ in 0..k {
            let i: usize = t
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(ln, "missing face index"))?;
            if i >= nv {
                return Err(Error::parse(ln, format!("face index {i} out of range")));
            }
            poly.push(i);
        }
        if k < 3 {
            return Err(Error::parse(ln, "face with fewer than 3 corners"));
        }
        fan(&poly, &mut faces);
    }
    TriangleMesh::new(vertices, faces)
}

pub fn to_obj_string(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    std::fs::write(path, to_obj_string(mesh))?;
    Ok(())
}
