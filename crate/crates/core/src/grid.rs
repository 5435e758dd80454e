//! Cartesian grids restricted to a domain, with the edge stencil used for
//! finite-difference divergences and gradients.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{Cell, SampledField, Values};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl CartesianGrid {
    /// `n` cells along the longer side of the box `[x0, x1] x [y0, y1]`.
    pub fn covering(bbox: [f64; 4], n: usize) -> Result<Self> {
        let (w, hgt) = (bbox[2] - bbox[0], bbox[3] - bbox[1]);
        if !(w > 0.0 && hgt > 0.0 && n > 0) {
            return Err(Error::Geometry(format!("degenerate box {bbox:?}")));
        }
        let h = w.max(hgt) / n as f64;
        let nx = (w / h - 1e-9).ceil() as usize;
        let ny = (hgt / h - 1e-9).ceil() as usize;
        Ok(CartesianGrid { origin: [bbox[0], bbox[1]], h, nx, ny })
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + (i as f64 + 0.5) * self.h, self.origin[1] + (j as f64 + 0.5) * self.h]
    }

    /// `[x0, y0, x1, y1]` of cell `(i, j)`.
    pub fn rect(&self, i: usize, j: usize) -> [f64; 4] {
        let x0 = self.origin[0] + i as f64 * self.h;
        let y0 = self.origin[1] + j as f64 * self.h;
        [x0, y0, x0 + self.h, y0 + self.h]
    }
}

/// Cells of a grid whose centroid lies in a domain.
#[derive(Debug, Clone)]
pub struct MaskedGrid {
    pub grid: CartesianGrid,
    /// Active cells `(i, j)` in row-major order.
    pub active: Vec<(usize, usize)>,
    index: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl MaskedGrid {
    pub fn new<P: Fn([f64; 2]) -> bool>(grid: CartesianGrid, inside: P) -> Result<Self> {
        let mut active = Vec::new();
        let mut index = vec![NONE; grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if inside(grid.center(i, j)) {
                    index[j * grid.nx + i] = active.len();
                    active.push((i, j));
                }
            }
        }
        if active.is_empty() {
            return Err(Error::Geometry("no grid cell lies inside the domain".into()));
        }
        Ok(MaskedGrid { grid, active, index })
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.grid.nx || j >= self.grid.ny {
            return None;
        }
        let k = self.index[j * self.grid.nx + i];
        (k != NONE).then_some(k)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let m = self.grid.h * self.grid.h;
        self.active.iter().map(|&(i, j)| Cell { centroid: self.grid.center(i, j), measure: m }).collect()
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        self.active.iter().map(|&(i, j)| self.grid.center(i, j)).collect()
    }

    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.centroids().into_iter().map(f).collect()
    }

    pub fn scalar_field(&self, values: Vec<f64>) -> Result<SampledField> {
        SampledField::scalar(self.cells(), values)
    }

    /// Active cells with at least one inactive (or missing) neighbour.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &(i, j)) in self.active.iter().enumerate() {
            let nb = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            if nb.iter().any(|&(a, b)| self.index_of(a, b).is_none()) {
                out.push(k);
            }
        }
        out
    }

    /// Distance from each active centroid to the complement of the union of
    /// active cells.
    pub fn boundary_distances(&self) -> Vec<f64> {
        let g = &self.grid;
        let outer = [g.origin[0], g.origin[1], g.origin[0] + g.nx as f64 * g.h, g.origin[1] + g.ny as f64 * g.h];
        let holes: Vec<[f64; 4]> = (0..g.ny)
            .flat_map(|j| (0..g.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.index_of(i, j).is_none())
            .map(|(i, j)| g.rect(i, j))
            .collect();
        self.centroids()
            .into_iter()
            .map(|p| {
                let mut d = (p[0] - outer[0]).min(outer[2] - p[0]).min(p[1] - outer[1]).min(outer[3] - p[1]);
                for r in &holes {
                    let dx = (r[0] - p[0]).max(p[0] - r[2]).max(0.0);
                    let dy = (r[1] - p[1]).max(p[1] - r[3]).max(0.0);
                    d = d.min(dx.hypot(dy));
                }
                d
            })
            .collect()
    }

    /// Checks that `field` lives on exactly these cells.
    pub fn check_field(&self, field: &SampledField) -> Result<()> {
        let ok = field.len() == self.len()
            && field.cells().iter().zip(self.centroids()).all(|(c, p)| {
                (c.centroid[0] - p[0]).abs() <= 1e-9 * self.grid.h && (c.centroid[1] - p[1]).abs() <= 1e-9 * self.grid.h
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry("field cells do not match the grid".into()))
        }
    }

    /// Evaluation points (centroids, then three Gauss points per edge) with
    /// per-cell links.
    pub fn stencil(&self) -> Stencil {
        self.stencil_with(3)
    }

    /// Stencil with `m` Gauss-Legendre points per edge.
    pub fn stencil_with(&self, m: usize) -> Stencil {
        let g = &self.grid;
        let (xs, ws) = gauss_legendre(m.max(1));
        let nodes: Vec<f64> = xs.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights: Vec<f64> = ws.iter().map(|w| 0.5 * w).collect();
        let mut points = self.centroids();
        let cells = points.len();
        let mut vertical: HashMap<(usize, usize), usize> = HashMap::new();
        let mut horizontal: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = 0usize;
        let mut faces = Vec::with_capacity(self.len());
        for &(i, j) in &self.active {
            let x0 = g.origin[0] + i as f64 * g.h;
            let y0 = g.origin[1] + j as f64 * g.h;
            let mut edge = |map: &mut HashMap<(usize, usize), usize>, key: (usize, usize), start: [f64; 2], dir: [f64; 2]| -> usize {
                *map.entry(key).or_insert_with(|| {
                    for t in &nodes {
                        points.push([start[0] + t * g.h * dir[0], start[1] + t * g.h * dir[1]]);
                    }
                    edges += 1;
                    edges - 1
                })
            };
            let left = edge(&mut vertical, (i, j), [x0, y0], [0.0, 1.0]);
            let right = edge(&mut vertical, (i + 1, j), [x0 + g.h, y0], [0.0, 1.0]);
            let bottom = edge(&mut horizontal, (i, j), [x0, y0], [1.0, 0.0]);
            let top = edge(&mut horizontal, (i, j + 1), [x0, y0 + g.h], [1.0, 0.0]);
            faces.push([left, right, bottom, top]);
        }
        Stencil { points, faces, cells, weights, h: g.h }
    }
}

#[derive(Debug, Clone)]
pub struct Stencil {
    /// Centroids first (`0..cells`), then the Gauss points of each edge.
    pub points: Vec<[f64; 2]>,
    /// `[left, right, bottom, top]` edge indices per active cell.
    pub faces: Vec<[usize; 4]>,
    pub cells: usize,
    /// Gauss weights on the unit edge.
    pub weights: Vec<f64>,
    pub h: f64,
}

impl Stencil {
    /// Edge average of `u`.
    fn mean(&self, u: &[[f64; 2]], edge: usize) -> [f64; 2] {
        let m = self.weights.len();
        let base = self.cells + edge * m;
        let mut out = [0.0, 0.0];
        for (q, w) in self.weights.iter().enumerate() {
            out[0] += w * u[base + q][0];
            out[1] += w * u[base + q][1];
        }
        out
    }

    /// Flux-form divergence per cell.
    pub fn divergence(&self, u: &[[f64; 2]]) -> Vec<f64> {
        self.faces
            .iter()
            .map(|&[l, r, b, t]| (self.mean(u, r)[0] - self.mean(u, l)[0] + self.mean(u, t)[1] - self.mean(u, b)[1]) / self.h)
            .collect()
    }

    /// Cell average of the gradient, `G[i][j] = d_j u_i`, from edge averages.
    pub fn gradient(&self, u: &[[f64; 2]]) -> Vec<[[f64; 2]; 2]> {
        self.faces
            .iter()
            .map(|&[l, r, b, t]| {
                let (ul, ur, ub, ut) = (self.mean(u, l), self.mean(u, r), self.mean(u, b), self.mean(u, t));
                [
                    [(ur[0] - ul[0]) / self.h, (ut[0] - ub[0]) / self.h],
                    [(ur[1] - ul[1]) / self.h, (ut[1] - ub[1]) / self.h],
                ]
            })
            .collect()
    }

    pub fn centroid_values(&self, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
        u[..self.cells].to_vec()
    }
}

/// Relative discrete `L^2` distance `||a - b|| / ||b||` with cell weights.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn vector_field(cells: Vec<Cell>, u: Vec<[f64; 2]>) -> Result<SampledField> {
    SampledField::new(cells, Values::Vector(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_on_quadratic_fields() {
        let g = CartesianGrid::covering([-1.0, -1.0, 1.0, 1.0], 16).unwrap();
        let m = MaskedGrid::new(g, |p| p[0] * p[0] + p[1] * p[1] < 1.0).unwrap();
        let st = m.stencil();
        let u: Vec<[f64; 2]> = st.points.iter().map(|p| [2.0 * p[0] + p[1] * p[1], -p[0] * p[0] + 3.0 * p[1]]).collect();
        for d in st.divergence(&u) {
            assert!((d - 5.0).abs() < 1e-12);
        }
        for (gr, c) in st.gradient(&u).iter().zip(m.centroids()) {
            assert!((gr[0][0] - 2.0).abs() < 1e-12 && (gr[0][1] - 2.0 * c[1]).abs() < 1e-12);
            assert!((gr[1][0] + 2.0 * c[0]).abs() < 1e-12 && (gr[1][1] - 3.0).abs() < 1e-12);
        }
        // every interior edge is shared
        let edges = (st.points.len() - st.cells) / st.weights.len();
        assert!(edges < 4 * st.cells);
    }
}
