use std::collections::{HashMap, HashSet};

use crate::geometry::{TriangleMesh, Vec3};

/// Vertex pool keyed by integer lattice coordinates.
struct Lattice {
    index: HashMap<[i64; 3], usize>,
    vertices: Vec<Vec3>,
    step: f64,
    scale: Vec3,
}

impl Lattice {
    fn vertex(&mut self, key: [i64; 3]) -> usize {
        let (step, scale) = (self.step, self.scale);
        let verts = &mut self.vertices;
        *self.index.entry(key).or_insert_with(|| {
            verts.push(Vec3::new(key[0] as f64 * step * scale.x, key[1] as f64 * step * scale.y, key[2] as f64 * step * scale.z));
            verts.len() - 1
        })
    }
}

/// Surface of a union of unit cells, stretched per axis by `scale`.
///
/// Each exposed unit square is cut into `t`×`t` quads and each quad into
/// four triangles around its center, so the tessellation shares every
/// mirror symmetry of the square.
pub fn box_union(cells: &[[i32; 3]], scale: Vec3, t: usize) -> TriangleMesh {
    let set: HashSet<[i32; 3]> = cells.iter().copied().collect();
    let t = t.max(1) as i64;
    // lattice units of 1/(2t) so quad centers land on lattice points
    let mut lat = Lattice { index: HashMap::new(), vertices: Vec::new(), step: 1.0 / (2 * t) as f64, scale };
    let mut faces = Vec::new();
    let mut sorted = cells.to_vec();
    sorted.sort();
    sorted.dedup();
    for cell in sorted {
        for axis in 0..3 {
            for sign in [-1i32, 1] {
                let mut nb = cell;
                nb[axis] += sign;
                if set.contains(&nb) {
                    continue;
                }
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let mut base = [cell[0] as i64 * 2 * t, cell[1] as i64 * 2 * t, cell[2] as i64 * 2 * t];
                if sign > 0 {
                    base[axis] += 2 * t;
                }
                let at = |i: i64, j: i64| {
                    let mut k = base;
                    k[u] += i;
                    k[v] += j;
                    k
                };
                for i in 0..t {
                    for j in 0..t {
                        let a = lat.vertex(at(2 * i, 2 * j));
                        let b = lat.vertex(at(2 * i + 2, 2 * j));
                        let c = lat.vertex(at(2 * i + 2, 2 * j + 2));
                        let d = lat.vertex(at(2 * i, 2 * j + 2));
                        let m = lat.vertex(at(2 * i + 1, 2 * j + 1));
                        for (p, q) in [(a, b), (b, c), (c, d), (d, a)] {
                            // u × v points along +axis
                            faces.push(if sign > 0 { [p, q, m] } else { [p, m, q] });
                        }
                    }
                }
            }
        }
    }
    TriangleMesh::new(lat.vertices, faces).expect("box union is a valid mesh")
}

/// Regular `n`-gon prism with circumradius `radius` and the given height,
/// centered at the origin with its axis along z. Side faces are cut into
/// `t`×`t` quads (four triangles each); caps are fans.
pub fn ngon_prism(n: usize, radius: f64, height: f64, t: usize) -> TriangleMesh {
    let t = t.max(1);
    let corners: Vec<Vec3> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect();
    let ring_len = n * t;
    let perimeter = |q: usize| {
        let (k, s) = (q / t, (q % t) as f64 / t as f64);
        corners[k] * (1.0 - s) + corners[(k + 1) % n] * s
    };
    let mut vertices = Vec::new();
    for j in 0..=t {
        let z = -0.5 * height + height * j as f64 / t as f64;
        for q in 0..ring_len {
            let p = perimeter(q);
            vertices.push(Vec3::new(p.x, p.y, z));
        }
    }
    let ring = |j: usize, q: usize| j * ring_len + q % ring_len;
    let mut faces = Vec::new();
    for j in 0..t {
        for q in 0..ring_len {
            let (a, b, c, d) = (ring(j, q), ring(j, q + 1), ring(j + 1, q + 1), ring(j + 1, q));
            let m = vertices.len();
            vertices.push((vertices[a] + vertices[b] + vertices[c] + vertices[d]) / 4.0);
            for (p, r) in [(a, b), (b, c), (c, d), (d, a)] {
                faces.push([p, r, m]);
            }
        }
    }
    let bottom = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, -0.5 * height));
    let top = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, 0.5 * height));
    for q in 0..ring_len {
        faces.push([bottom, ring(0, q + 1), ring(0, q)]);
        faces.push([top, ring(t, q), ring(t, q + 1)]);
    }
    TriangleMesh::new(vertices, faces).expect("prism is a valid mesh")
}

/// Unit icosphere after `level` midpoint subdivisions.
pub fn icosphere(level: usize) -> TriangleMesh {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, g, 0.0), (1.0, g, 0.0), (-1.0, -g, 0.0), (1.0, -g, 0.0),
        (0.0, -1.0, g), (0.0, 1.0, g), (0.0, -1.0, -g), (0.0, 1.0, -g),
        (g, 0.0, -1.0), (g, 0.0, 1.0), (-g, 0.0, -1.0), (-g, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[e] = *mid.entry(key).or_insert_with(|| {
                    vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                    vertices.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push(m);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces).expect("icosphere is a valid mesh")
}
