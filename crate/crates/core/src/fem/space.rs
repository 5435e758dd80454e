use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::mesh::Triangulation;
use crate::error::{Error, Result};
use crate::field::{SampledField, Values};
use crate::quadrature::TriangleRule;

pub type Mat2 = [[f64; 2]; 2];

/// Continuous vector Lagrange elements of degree 1 or 2 vanishing on the
/// boundary, paired with mean-free piecewise constants.
#[derive(Debug, Clone)]
pub struct FESpacePair {
    pub mesh: Triangulation,
    pub degree: usize,
    /// Scalar node to free-node index; `None` on the boundary.
    free: Vec<Option<usize>>,
    pub free_nodes: usize,
    areas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLabel {
    pub k: usize,
    pub m: usize,
}

impl std::fmt::Display for PairLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}/P{}", self.k, self.m)
    }
}

impl FESpacePair {
    pub fn new(mesh: Triangulation, degree: usize) -> Result<Self> {
        if !(degree == 1 || degree == 2) {
            return Err(Error::Precondition(format!("velocity degree {degree} not supported (1 or 2)")));
        }
        let bv = mesh.boundary_vertices();
        let mut nodes_boundary = bv.clone();
        if degree == 2 {
            nodes_boundary.extend((0..mesh.edges.len()).map(|e| mesh.is_boundary_edge(e)));
        }
        let mut free = Vec::with_capacity(nodes_boundary.len());
        let mut count = 0;
        for b in nodes_boundary {
            if b {
                free.push(None);
            } else {
                free.push(Some(count));
                count += 1;
            }
        }
        let areas = (0..mesh.triangles.len()).map(|t| mesh.area(t)).collect();
        Ok(FESpacePair { mesh, degree, free, free_nodes: count, areas })
    }

    pub fn label(&self) -> PairLabel {
        PairLabel { k: self.degree, m: 0 }
    }

    /// Velocity unknowns `M_h`.
    pub fn velocity_dofs(&self) -> usize {
        2 * self.free_nodes
    }

    /// Mean-free pressure unknowns `N_h`.
    pub fn pressure_dofs(&self) -> usize {
        self.mesh.triangles.len() - 1
    }

    pub fn elements(&self) -> usize {
        self.mesh.triangles.len()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Scalar nodes (all, boundary included).
    pub fn scalar_nodes(&self) -> usize {
        self.free.len()
    }

    pub fn free_index(&self, node: usize) -> Option<usize> {
        self.free[node]
    }

    /// Local scalar nodes of triangle `t`: vertices, then the edges opposite them.
    pub fn local_nodes(&self, t: usize) -> Vec<usize> {
        let tri = self.mesh.triangles[t];
        let mut v = tri.to_vec();
        if self.degree == 2 {
            let nv = self.mesh.vertices.len();
            v.extend(self.mesh.tri_edges[t].iter().map(|e| nv + e));
        }
        v
    }

    /// Coordinates of a scalar node.
    pub fn node_point(&self, node: usize) -> [f64; 2] {
        let nv = self.mesh.vertices.len();
        if node < nv {
            self.mesh.vertices[node]
        } else {
            let [a, b] = self.mesh.edges[node - nv];
            let (p, q) = (self.mesh.vertices[a], self.mesh.vertices[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }
    }

    /// Local basis values and gradients at barycentric point `l` on `t`.
    pub fn basis(&self, t: usize, l: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let g = self.mesh.barycentric_gradients(t);
        if self.degree == 1 {
            return (l.to_vec(), g.to_vec());
        }
        let mut vals = Vec::with_capacity(6);
        let mut grads = Vec::with_capacity(6);
        for i in 0..3 {
            vals.push(l[i] * (2.0 * l[i] - 1.0));
            let c = 4.0 * l[i] - 1.0;
            grads.push([c * g[i][0], c * g[i][1]]);
        }
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            vals.push(4.0 * l[i] * l[j]);
            grads.push([4.0 * (l[j] * g[i][0] + l[i] * g[j][0]), 4.0 * (l[j] * g[i][1] + l[i] * g[j][1])]);
        }
        (vals, grads)
    }

    /// Free dof of component `c` at scalar node `node`.
    pub fn dof(&self, node: usize, c: usize) -> Option<usize> {
        self.free[node].map(|f| 2 * f + c)
    }

    /// `A_full[i][e] = int_e div(phi_i)` for every element.
    pub fn divergence_matrix_full(&self) -> DMatrix<f64> {
        let rule = TriangleRule::collapsed(2);
        let mut a = DMatrix::zeros(self.velocity_dofs(), self.elements());
        for t in 0..self.elements() {
            let nodes = self.local_nodes(t);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let (_, grads) = self.basis(t, *p);
                for (n, gr) in nodes.iter().zip(&grads) {
                    for c in 0..2 {
                        if let Some(i) = self.dof(*n, c) {
                            a[(i, t)] += w * self.areas[t] * gr[c];
                        }
                    }
                }
            }
        }
        a
    }

    /// `A_ij = int p_j div(phi_i)` against the mean-free basis
    /// `p_j = chi_j - |S_j|/|Omega|`, `j < N_el - 1`.
    pub fn divergence_matrix(&self) -> DMatrix<f64> {
        let full = self.divergence_matrix_full();
        let omega: f64 = self.areas.iter().sum();
        let n = self.pressure_dofs();
        let mut a = DMatrix::zeros(full.nrows(), n);
        for i in 0..full.nrows() {
            let total: f64 = full.row(i).iter().sum();
            for j in 0..n {
                a[(i, j)] = full[(i, j)] - self.areas[j] / omega * total;
            }
        }
        a
    }

    /// `int grad(phi_i) : grad(phi_j)`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let rule = TriangleRule::collapsed(2);
        let mut k = DMatrix::zeros(self.velocity_dofs(), self.velocity_dofs());
        for t in 0..self.elements() {
            let nodes = self.local_nodes(t);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let (_, grads) = self.basis(t, *p);
                let wa = w * self.areas[t];
                for (a, ga) in nodes.iter().zip(&grads) {
                    for (b, gb) in nodes.iter().zip(&grads) {
                        let v = wa * (ga[0] * gb[0] + ga[1] * gb[1]);
                        for c in 0..2 {
                            if let (Some(i), Some(j)) = (self.dof(*a, c), self.dof(*b, c)) {
                                k[(i, j)] += v;
                            }
                        }
                    }
                }
            }
        }
        k
    }

    /// Gram matrix of the mean-free pressure basis.
    pub fn pressure_gram(&self) -> DMatrix<f64> {
        let omega: f64 = self.areas.iter().sum();
        let n = self.pressure_dofs();
        DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { self.areas[i] } else { 0.0 };
            d - self.areas[i] * self.areas[j] / omega
        })
    }

    /// Element values of `sum z_j p_j`.
    pub fn pressure_values(&self, z: &DVector<f64>) -> Vec<f64> {
        let omega: f64 = self.areas.iter().sum();
        let shift: f64 = z.iter().zip(&self.areas).map(|(a, b)| a * b).sum::<f64>() / omega;
        (0..self.elements()).map(|j| if j < z.len() { z[j] } else { 0.0 } - shift).collect()
    }

    /// Coefficients of a mean-free piecewise constant given by element values.
    pub fn pressure_coefficients(&self, values: &[f64]) -> Result<DVector<f64>> {
        if values.len() != self.elements() {
            return Err(Error::Precondition(format!("{} element values for {} elements", values.len(), self.elements())));
        }
        let omega: f64 = self.areas.iter().sum();
        let mean: f64 = values.iter().zip(&self.areas).map(|(v, a)| v * a).sum::<f64>() / omega;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if mean.abs() > 1e-10 * scale {
            return Err(Error::Precondition(format!("pressure has mean {mean:.3e}, expected zero")));
        }
        let last = values[values.len() - 1];
        Ok(DVector::from_iterator(self.pressure_dofs(), values[..self.pressure_dofs()].iter().map(|v| v - last)))
    }

    /// Cells (centroid, area) of the elements, for element-wise fields.
    pub fn element_cells(&self) -> Vec<crate::field::Cell> {
        (0..self.elements())
            .map(|t| crate::field::Cell { centroid: self.mesh.centroid(t), measure: self.areas[t] })
            .collect()
    }

    /// `b_i = int H : grad(phi_i)` for `H` constant on each element.
    pub fn load_elementwise(&self, h: &SampledField) -> Result<DVector<f64>> {
        let mats = match h.values() {
            Values::Matrix(m) if m.len() == self.elements() => m,
            Values::Matrix(m) => {
                return Err(Error::Precondition(format!("{} matrices for {} elements", m.len(), self.elements())));
            }
            _ => return Err(Error::Precondition("stress input must be a matrix field".into())),
        };
        let full = self.divergence_like(|t| mats[t]);
        Ok(full)
    }

    /// `b_i = int H : grad(phi_i)` for a smooth `H`, by a degree-10 rule.
    pub fn load_function<F: Fn([f64; 2]) -> Mat2>(&self, h: F) -> DVector<f64> {
        let rule = TriangleRule::collapsed(6);
        let mut b = DVector::zeros(self.velocity_dofs());
        for t in 0..self.elements() {
            let nodes = self.local_nodes(t);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let x = self.mesh.point(t, *p);
                let hm = h(x);
                let (_, grads) = self.basis(t, *p);
                let wa = w * self.areas[t];
                for (n, g) in nodes.iter().zip(&grads) {
                    for c in 0..2 {
                        if let Some(i) = self.dof(*n, c) {
                            b[i] += wa * (hm[c][0] * g[0] + hm[c][1] * g[1]);
                        }
                    }
                }
            }
        }
        b
    }

    fn divergence_like<F: Fn(usize) -> Mat2>(&self, h: F) -> DVector<f64> {
        let rule = TriangleRule::collapsed(2);
        let mut b = DVector::zeros(self.velocity_dofs());
        for t in 0..self.elements() {
            let nodes = self.local_nodes(t);
            let hm = h(t);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let (_, grads) = self.basis(t, *p);
                let wa = w * self.areas[t];
                for (n, g) in nodes.iter().zip(&grads) {
                    for c in 0..2 {
                        if let Some(i) = self.dof(*n, c) {
                            b[i] += wa * (hm[c][0] * g[0] + hm[c][1] * g[1]);
                        }
                    }
                }
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p2_basis_is_nodal_and_complete() {
        let mesh = Triangulation::unit_square(0.5).unwrap();
        let v = FESpacePair::new(mesh, 2).unwrap();
        let nodes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
        for (k, l) in nodes.iter().enumerate() {
            let (vals, _) = v.basis(3, *l);
            for (j, x) in vals.iter().enumerate() {
                assert_relative_eq!(*x, if j == k { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        let (vals, grads) = v.basis(3, [0.2, 0.3, 0.5]);
        assert_relative_eq!(vals.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(grads.iter().map(|g| g[0]).sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn divergence_columns_annihilate_constants() {
        let mesh = Triangulation::unit_square(0.25).unwrap();
        let v = FESpacePair::new(mesh, 2).unwrap();
        let full = v.divergence_matrix_full();
        for i in 0..full.nrows() {
            assert!(full.row(i).iter().sum::<f64>().abs() < 1e-14);
        }
        assert_eq!(v.velocity_dofs(), 2 * (9 + 40));
        assert_eq!(v.pressure_dofs(), 31);
    }

    #[test]
    fn pressure_load_is_a_times_coefficients() {
        let mesh = Triangulation::unit_square(0.25).unwrap();
        let v = FESpacePair::new(mesh, 2).unwrap();
        let vals: Vec<f64> = (0..v.elements()).map(|t| ((t * 7) % 5) as f64 - 2.0).collect();
        let mean = vals.iter().zip(v.areas()).map(|(a, b)| a * b).sum::<f64>();
        let vals: Vec<f64> = vals.iter().map(|x| x - mean).collect();
        let z = v.pressure_coefficients(&vals).unwrap();
        let back = v.pressure_values(&z);
        for (a, b) in vals.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        let mats: Vec<Mat2> = vals.iter().map(|&q| [[q, 0.0], [0.0, q]]).collect();
        let h = SampledField::new(v.element_cells(), Values::Matrix(mats)).unwrap();
        let b = v.load_elementwise(&h).unwrap();
        let az = v.divergence_matrix() * &z;
        assert!((b - az).amax() < 1e-13);
    }
}
