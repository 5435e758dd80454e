use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conforming triangulation with its edge structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Triangulation {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// `tri_edges[t][k]` is the edge opposite local vertex `k`.
    pub tri_edges: Vec<[usize; 3]>,
    /// One or two triangles per edge.
    pub edge_triangles: Vec<Vec<usize>>,
    /// Maximal triangle diameter.
    pub h: f64,
    /// Smallest interior angle in degrees.
    pub min_angle: f64,
}

const MIN_ANGLE: f64 = 20.0;

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn angles(p: [[f64; 2]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        out[k] = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]).to_degrees();
    }
    out
}

impl Triangulation {
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Mesh("no triangles".into()));
        }
        let mut triangles = triangles;
        for t in triangles.iter_mut() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t:?} references a missing vertex")));
            }
            let c = cross(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if c.abs() <= 1e-14 {
                return Err(Error::Mesh(format!("degenerate triangle {t:?}")));
            }
            if c < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (ti, t) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (k, slot) in te.iter_mut().enumerate() {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[e].push(ti);
                if edge_triangles[e].len() > 2 {
                    return Err(Error::Mesh(format!("edge {key:?} shared by more than two triangles")));
                }
                *slot = e;
            }
            tri_edges.push(te);
        }
        // no hanging nodes: a vertex strictly inside a boundary edge
        let boundary: Vec<usize> = (0..edges.len()).filter(|&e| edge_triangles[e].len() == 1).collect();
        let used: BTreeSet<usize> = triangles.iter().flatten().copied().collect();
        for &e in &boundary {
            let [a, b] = edges[e];
            let len = dist(vertices[a], vertices[b]);
            for &v in &used {
                if v == a || v == b {
                    continue;
                }
                let p = vertices[v];
                let on_line = cross(vertices[a], vertices[b], p).abs() <= 1e-12 * len * len;
                let t = ((p[0] - vertices[a][0]) * (vertices[b][0] - vertices[a][0])
                    + (p[1] - vertices[a][1]) * (vertices[b][1] - vertices[a][1]))
                    / (len * len);
                if on_line && t > 1e-12 && t < 1.0 - 1e-12 {
                    return Err(Error::Mesh(format!("hanging node {v} on edge {:?}", edges[e])));
                }
            }
        }
        let mut h: f64 = 0.0;
        let mut min_angle: f64 = 180.0;
        for t in &triangles {
            let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            h = h.max(dist(p[0], p[1])).max(dist(p[1], p[2])).max(dist(p[2], p[0]));
            min_angle = angles(p).iter().fold(min_angle, |m, &a| m.min(a));
        }
        Ok(Triangulation { vertices, triangles, edges, tri_edges, edge_triangles, h, min_angle })
    }

    /// `n x n` squares on a rectangle, each split along the same diagonal.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || !(x1 > x0 && y1 > y0) {
            return Err(Error::Mesh("degenerate rectangle".into()));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([x0 + (x1 - x0) * i as f64 / nx as f64, y0 + (y1 - y0) * j as f64 / ny as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(vertices, triangles)
    }

    /// Unit square with squares of side `h_target` (rounded to `1/n`).
    pub fn unit_square(h_target: f64) -> Result<Self> {
        if !(h_target > 0.0 && h_target <= 1.0) {
            return Err(Error::Mesh(format!("square side {h_target} must lie in (0, 1]")));
        }
        let n = (1.0 / h_target).round().max(1.0) as usize;
        Self::rectangle(0.0, 0.0, 1.0, 1.0, n, n)
    }

    /// Ear-clipped simple polygon, refined until the diameter bound holds.
    pub fn polygon(vertices: &[[f64; 2]], h_target: f64) -> Result<Self> {
        let coarse = ear_clip(vertices)?;
        let mut mesh = Self::new(vertices.to_vec(), coarse)?;
        if mesh.min_angle < MIN_ANGLE {
            return Err(Error::Mesh(format!(
                "coarse mesh has minimal angle {:.1} degrees, below {MIN_ANGLE}",
                mesh.min_angle
            )));
        }
        while mesh.h > h_target * (1.0 + 1e-12) {
            mesh = mesh.refine()?;
        }
        Ok(mesh)
    }

    /// Red refinement: every triangle split into four through edge midpoints.
    pub fn refine(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mids: Vec<usize> = self
            .edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
            .collect();
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (t, te) in self.triangles.iter().zip(&self.tri_edges) {
            let m = [mids[te[0]], mids[te[1]], mids[te[2]]];
            triangles.push([t[0], m[2], m[1]]);
            triangles.push([m[2], t[1], m[0]]);
            triangles.push([m[1], m[0], t[2]]);
            triangles.push([m[0], m[1], m[2]]);
        }
        Self::new(vertices, triangles)
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn measure(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].len() == 1
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut out = vec![false; self.vertices.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if self.is_boundary_edge(e) {
                out[a] = true;
                out[b] = true;
            }
        }
        out
    }

    /// `M_S`: triangles sharing at least one vertex with `t` (including `t`).
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut by_vertex = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                by_vertex[v].push(t);
            }
        }
        self.triangles
            .iter()
            .map(|tri| {
                let set: BTreeSet<usize> = tri.iter().flat_map(|&v| by_vertex[v].iter().copied()).collect();
                set.into_iter().collect()
            })
            .collect()
    }

    /// Gradients of the barycentric coordinates on triangle `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p0, p1, p2] = self.triangles[t].map(|v| self.vertices[v]);
        let det = cross(p0, p1, p2);
        let g1 = [(p2[1] - p0[1]) / det, -(p2[0] - p0[0]) / det];
        let g2 = [-(p1[1] - p0[1]) / det, (p1[0] - p0[0]) / det];
        [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
    }

    /// Cartesian point of barycentric coordinates on triangle `t`.
    pub fn point(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let det = cross(a, b, c);
        let l1 = cross(a, p, c) / det;
        let l2 = cross(a, b, p) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Triangle containing `p` (lowest index on shared boundaries).
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| self.barycentric(t, p).iter().all(|&l| l >= -1e-12))
    }
}

fn ear_clip(poly: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::Mesh(format!("polygon needs at least 3 vertices, got {n}")));
    }
    let area: f64 = (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum::<f64>() / 2.0;
    if area.abs() <= 1e-14 {
        return Err(Error::Mesh("degenerate polygon".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if area < 0.0 {
        idx.reverse();
    }
    let mut out = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (a, b, c) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            if cross(poly[a], poly[b], poly[c]) <= 1e-14 {
                continue;
            }
            let blocked = idx.iter().any(|&v| {
                v != a && v != b && v != c && {
                    let p = poly[v];
                    cross(poly[a], poly[b], p) >= 0.0 && cross(poly[b], poly[c], p) >= 0.0 && cross(poly[c], poly[a], p) >= 0.0
                }
            });
            if blocked {
                continue;
            }
            let quality = angles([poly[a], poly[b], poly[c]]).iter().cloned().fold(180.0, f64::min);
            if best.map_or(true, |(_, q)| quality > q) {
                best = Some((k, quality));
            }
        }
        let (k, _) = best.ok_or_else(|| Error::Mesh("polygon is not simple: no ear found".into()))?;
        let m = idx.len();
        out.push([idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]]);
        idx.remove(k);
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts_and_angles() {
        let m = Triangulation::unit_square(0.5).unwrap();
        assert_eq!(m.triangles.len(), 8);
        assert!((m.min_angle - 45.0).abs() < 1e-9);
        assert!((m.h - 0.5 * 2f64.sqrt()).abs() < 1e-12);
        let r = m.refine().unwrap();
        assert_eq!(r.triangles.len(), 32);
        assert!((r.h - m.h / 2.0).abs() < 1e-12);
        assert!((r.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l_shape_polygon() {
        let l = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let m = Triangulation::polygon(&l, 0.3).unwrap();
        assert!((m.measure() - 3.0).abs() < 1e-12);
        assert!(m.h <= 0.3);
        assert!(m.min_angle >= 20.0);
    }

    #[test]
    fn barycentric_round_trip() {
        let m = Triangulation::unit_square(0.25).unwrap();
        let p = [0.37, 0.61];
        let t = m.locate(p).unwrap();
        let b = m.barycentric(t, p);
        let q = m.point(t, b);
        assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
        let g = m.barycentric_gradients(t);
        assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        assert!(Triangulation::polygon(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 0.5).is_err());
    }
}
