use nalgebra::{DVector, Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::space::{FESpacePair, Mat2};
use crate::error::{Error, Result};
use crate::norms::luxemburg;
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::young::YoungFunction;

/// A vector field with an analytic gradient, `gradient[c][d] = d u_c / d x_d`.
pub trait VectorField {
    fn value(&self, p: [f64; 2]) -> [f64; 2];
    fn gradient(&self, p: [f64; 2]) -> Mat2;
}

/// A P2 (or P1) velocity given by its values at every scalar node.
#[derive(Debug, Clone)]
pub struct FeField<'a> {
    pub space: &'a FESpacePair,
    pub nodal: Vec<[f64; 2]>,
}

impl<'a> FeField<'a> {
    pub fn from_dofs(space: &'a FESpacePair, x: &DVector<f64>) -> Self {
        let nodal = (0..space.scalar_nodes())
            .map(|n| {
                let get = |c| space.dof(n, c).map_or(0.0, |i| x[i]);
                [get(0), get(1)]
            })
            .collect();
        FeField { space, nodal }
    }

    pub fn dofs(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.space.velocity_dofs());
        for (n, v) in self.nodal.iter().enumerate() {
            for (c, vc) in v.iter().enumerate() {
                if let Some(i) = self.space.dof(n, c) {
                    x[i] = *vc;
                }
            }
        }
        x
    }

    /// Value and gradient at barycentric point `l` of element `t`.
    pub fn eval_in(&self, t: usize, l: [f64; 3]) -> ([f64; 2], Mat2) {
        let (vals, grads) = self.space.basis(t, l);
        let mut u = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for ((n, v), gr) in self.space.local_nodes(t).iter().zip(&vals).zip(&grads) {
            let a = self.nodal[*n];
            for c in 0..2 {
                u[c] += a[c] * v;
                g[c][0] += a[c] * gr[0];
                g[c][1] += a[c] * gr[1];
            }
        }
        (u, g)
    }

    /// `int_S div` on every element, exact.
    pub fn element_divergence(&self) -> Vec<f64> {
        let full = self.space.divergence_matrix_full();
        (full.transpose() * self.dofs()).iter().copied().collect()
    }
}

impl VectorField for FeField<'_> {
    fn value(&self, p: [f64; 2]) -> [f64; 2] {
        match self.space.mesh.locate(p) {
            Some(t) => self.eval_in(t, self.space.mesh.barycentric(t, p)).0,
            None => [0.0; 2],
        }
    }

    fn gradient(&self, p: [f64; 2]) -> Mat2 {
        match self.space.mesh.locate(p) {
            Some(t) => self.eval_in(t, self.space.mesh.barycentric(t, p)).1,
            None => [[0.0; 2]; 2],
        }
    }
}

/// Smooth field from a pair of closures.
pub struct FnField<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F: Fn([f64; 2]) -> [f64; 2], G: Fn([f64; 2]) -> Mat2> VectorField for FnField<F, G> {
    fn value(&self, p: [f64; 2]) -> [f64; 2] {
        (self.value)(p)
    }

    fn gradient(&self, p: [f64; 2]) -> Mat2 {
        (self.gradient)(p)
    }
}

/// `u_c = x(1-x)y(1-y) (a_c + b_c sin(m_c pi x + phi_c) cos(n_c pi y + psi_c))`,
/// vanishing on the boundary of the unit square.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleTrigField {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub m: [f64; 2],
    pub n: [f64; 2],
    pub phi: [f64; 2],
    pub psi: [f64; 2],
    pub scale: f64,
}

impl BubbleTrigField {
    pub fn random<R: Rng>(rng: &mut R, max_frequency: u32) -> Self {
        let mut pick = || -> [f64; 6] {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(1..=max_frequency) as f64,
                rng.gen_range(1..=max_frequency) as f64,
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..2.0 * PI),
            ]
        };
        let (u, v) = (pick(), pick());
        BubbleTrigField {
            a: [u[0], v[0]],
            b: [u[1], v[1]],
            m: [u[2], v[2]],
            n: [u[3], v[3]],
            phi: [u[4], v[4]],
            psi: [u[5], v[5]],
            scale: 1.0,
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scale *= s;
        self
    }
}

impl VectorField for BubbleTrigField {
    fn value(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        let w = x * (1.0 - x) * y * (1.0 - y);
        let mut out = [0.0; 2];
        for c in 0..2 {
            let g = self.a[c] + self.b[c] * (self.m[c] * PI * x + self.phi[c]).sin() * (self.n[c] * PI * y + self.psi[c]).cos();
            out[c] = self.scale * w * g;
        }
        out
    }

    fn gradient(&self, p: [f64; 2]) -> Mat2 {
        let [x, y] = p;
        let (wx, wy) = (x * (1.0 - x), y * (1.0 - y));
        let w = wx * wy;
        let dw = [(1.0 - 2.0 * x) * wy, wx * (1.0 - 2.0 * y)];
        let mut out = [[0.0; 2]; 2];
        for c in 0..2 {
            let (sx, cx) = (self.m[c] * PI * x + self.phi[c]).sin_cos();
            let (sy, cy) = (self.n[c] * PI * y + self.psi[c]).sin_cos();
            let g = self.a[c] + self.b[c] * sx * cy;
            let dg = [self.b[c] * self.m[c] * PI * cx * cy, -self.b[c] * self.n[c] * PI * sx * sy];
            for d in 0..2 {
                out[c][d] = self.scale * (dw[d] * g + w * dg[d]);
            }
        }
        out
    }
}

/// Dual basis weights of the 1D P2 nodes `(start, mid, end)` on a segment of
/// unit length: `theta_j = sum_k D_jk psi_k` with `D` the inverse mass matrix.
fn dual_matrix() -> Matrix3<f64> {
    let m = Matrix3::new(4.0, 2.0, -1.0, 2.0, 16.0, 2.0, -1.0, 2.0, 4.0) / 30.0;
    m.try_inverse().expect("P2 mass matrix is invertible")
}

fn p2_segment_basis(t: f64) -> Vector3<f64> {
    Vector3::new((1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0))
}

const EDGE_ORDER: usize = 10;

/// Scott-Zhang style interpolation onto the P2 velocity space with boundary
/// values set to zero, followed by an edge-bubble correction matching the
/// normal flux through every interior edge.
#[derive(Debug, Clone)]
pub struct Projection<'a> {
    space: &'a FESpacePair,
    /// For each vertex, the edge carrying its dual functional.
    vertex_edge: Vec<usize>,
    dual: Matrix3<f64>,
    gauss: (Vec<f64>, Vec<f64>),
}

impl<'a> Projection<'a> {
    pub fn new(space: &'a FESpacePair) -> Result<Self> {
        if space.degree != 2 {
            return Err(Error::Precondition("the projection is built for P2 velocities".into()));
        }
        let mesh = &space.mesh;
        let bv = mesh.boundary_vertices();
        let mut vertex_edge = vec![usize::MAX; mesh.vertices.len()];
        for (e, &[a, b]) in mesh.edges.iter().enumerate() {
            for v in [a, b] {
                let take = vertex_edge[v] == usize::MAX || (bv[v] && !mesh.is_boundary_edge(vertex_edge[v]) && mesh.is_boundary_edge(e));
                if take {
                    vertex_edge[v] = e;
                }
            }
        }
        let (x, w) = gauss_legendre(EDGE_ORDER);
        let gauss = (x.iter().map(|x| 0.5 * (x + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect());
        Ok(Projection { space, vertex_edge, dual: dual_matrix(), gauss })
    }

    fn edge_point(&self, e: usize, t: f64) -> [f64; 2] {
        let [a, b] = self.space.mesh.edges[e].map(|v| self.space.mesh.vertices[v]);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.space.mesh.edges[e].map(|v| self.space.mesh.vertices[v]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Unit normal of edge `e`, oriented left of `start -> end`.
    fn edge_normal(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.space.mesh.edges[e].map(|v| self.space.mesh.vertices[v]);
        let l = self.edge_length(e);
        [-(b[1] - a[1]) / l, (b[0] - a[0]) / l]
    }

    /// `(int_e u theta_start, int_e u theta_mid, int_e u theta_end) / |e|`.
    fn edge_duals<U: VectorField + ?Sized>(&self, u: &U, e: usize) -> [[f64; 2]; 3] {
        let mut m = [Vector3::zeros(), Vector3::zeros()];
        for (t, w) in self.gauss.0.iter().zip(&self.gauss.1) {
            let v = u.value(self.edge_point(e, *t));
            let psi = p2_segment_basis(*t);
            for c in 0..2 {
                m[c] += psi * (w * v[c]);
            }
        }
        let d = [self.dual * m[0], self.dual * m[1]];
        [[d[0][0], d[1][0]], [d[0][1], d[1][1]], [d[0][2], d[1][2]]]
    }

    /// `int_e u . n` by Gauss-Legendre.
    pub fn edge_flux<U: VectorField + ?Sized>(&self, u: &U, e: usize) -> f64 {
        let n = self.edge_normal(e);
        let l = self.edge_length(e);
        self.gauss.0.iter().zip(&self.gauss.1).map(|(t, w)| {
            let v = u.value(self.edge_point(e, *t));
            w * l * (v[0] * n[0] + v[1] * n[1])
        }).sum()
    }

    /// Local averages only, without the flux correction.
    pub fn interpolate<U: VectorField + ?Sized>(&self, u: &U) -> FeField<'a> {
        let mesh = &self.space.mesh;
        let nv = mesh.vertices.len();
        let mut nodal = vec![[0.0; 2]; self.space.scalar_nodes()];
        for (v, &e) in self.vertex_edge.iter().enumerate() {
            if self.space.free_index(v).is_none() {
                continue;
            }
            let d = self.edge_duals(u, e);
            nodal[v] = if mesh.edges[e][0] == v { d[0] } else { d[2] };
        }
        for e in 0..mesh.edges.len() {
            if self.space.free_index(nv + e).is_some() {
                nodal[nv + e] = self.edge_duals(u, e)[1];
            }
        }
        FeField { space: self.space, nodal }
    }

    pub fn apply<U: VectorField + ?Sized>(&self, u: &U) -> FeField<'a> {
        let mut f = self.interpolate(u);
        let mesh = &self.space.mesh;
        let nv = mesh.vertices.len();
        for e in 0..mesh.edges.len() {
            if mesh.is_boundary_edge(e) {
                continue;
            }
            let [a, b] = mesh.edges[e];
            let n = self.edge_normal(e);
            let l = self.edge_length(e);
            let (ua, um, ub) = (f.nodal[a], f.nodal[nv + e], f.nodal[b]);
            let dot = |v: [f64; 2]| v[0] * n[0] + v[1] * n[1];
            let discrete = l / 6.0 * (dot(ua) + 4.0 * dot(um) + dot(ub));
            let alpha = (self.edge_flux(u, e) - discrete) / (2.0 * l / 3.0);
            f.nodal[nv + e][0] += alpha * n[0];
            f.nodal[nv + e][1] += alpha * n[1];
        }
        f
    }

    /// `int_S div u` on every element through the boundary flux.
    pub fn element_divergence<U: VectorField + ?Sized>(&self, u: &U) -> Vec<f64> {
        let mesh = &self.space.mesh;
        let flux: Vec<f64> = (0..mesh.edges.len()).map(|e| self.edge_flux(u, e)).collect();
        (0..mesh.triangles.len())
            .map(|t| {
                let tri = mesh.triangles[t];
                (0..3)
                    .map(|k| {
                        let e = mesh.tri_edges[t][k];
                        // outward when the edge runs counter-clockwise around t
                        let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let sign = if mesh.edges[e] == [i, j] { -1.0 } else { 1.0 };
                        sign * flux[e]
                    })
                    .sum()
            })
            .collect()
    }
}

/// Largest elementwise defect `|int_S div(Pu) - int_S div u| / |S|`.
pub fn divergence_defect<U: VectorField + ?Sized>(proj: &Projection, u: &U) -> f64 {
    let pu = proj.apply(u);
    let a = pu.element_divergence();
    let b = proj.element_divergence(u);
    a.iter().zip(&b).zip(proj.space.areas()).map(|((x, y), s)| (x - y).abs() / s).fold(0.0, f64::max)
}

fn frob(g: &Mat2) -> f64 {
    (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)).sqrt()
}

/// `(avg_S |v|, avg_S h_S |grad v|)` per element.
fn local_averages<F: Fn(usize, [f64; 3]) -> ([f64; 2], Mat2)>(space: &FESpacePair, eval: F) -> Vec<f64> {
    let rule = TriangleRule::collapsed(4);
    (0..space.elements())
        .map(|t| {
            let h = space.mesh.diameter(t);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let (v, g) = eval(t, *p);
                    w * (v[0].hypot(v[1]) + h * frob(&g))
                })
                .sum()
        })
        .collect()
}

/// Largest ratio of `avg_S |Pu| + avg_S h_S |grad Pu|` to the same quantity of
/// `u` summed over the patch of `S`.
pub fn local_stability<U: VectorField + ?Sized>(proj: &Projection, u: &U) -> f64 {
    let space = proj.space;
    let pu = proj.apply(u);
    let lhs = local_averages(space, |t, l| pu.eval_in(t, l));
    let rhs = local_averages(space, |t, l| {
        let x = space.mesh.point(t, l);
        (u.value(x), u.gradient(x))
    });
    let patches = space.mesh.neighbours();
    lhs.iter()
        .zip(&patches)
        .map(|(l, patch)| {
            let r: f64 = patch.iter().map(|s| rhs[*s]).sum();
            if r > 0.0 { l / r } else if *l == 0.0 { 0.0 } else { f64::INFINITY }
        })
        .fold(0.0, f64::max)
}

/// `||grad(Pu)||_A / ||grad u||_A` with the Frobenius modulus.
pub fn check_orlicz_projection_stability<U: VectorField + ?Sized>(proj: &Projection, u: &U, a: &YoungFunction) -> f64 {
    let space = proj.space;
    let pu = proj.apply(u);
    let rule = TriangleRule::collapsed(5);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for t in 0..space.elements() {
        let area = space.areas()[t];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            num.push((w * area, frob(&pu.eval_in(t, *p).1)));
            den.push((w * area, frob(&u.gradient(space.mesh.point(t, *p)))));
        }
    }
    luxemburg(&num, a) / luxemburg(&den, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::Triangulation;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p2(h: f64) -> FESpacePair {
        FESpacePair::new(Triangulation::unit_square(h).unwrap(), 2).unwrap()
    }

    #[test]
    fn divergence_is_preserved_on_every_element() {
        let v = p2(0.25);
        let proj = Projection::new(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u = BubbleTrigField::random(&mut rng, 3);
            assert!(divergence_defect(&proj, &u) < 1e-12);
        }
    }

    #[test]
    fn flux_divergence_matches_area_quadrature() {
        let v = p2(0.25);
        let proj = Projection::new(&v).unwrap();
        let u = BubbleTrigField::random(&mut ChaCha8Rng::seed_from_u64(5), 2);
        let rule = TriangleRule::collapsed(8);
        for (t, d) in proj.element_divergence(&u).iter().enumerate() {
            let q: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| {
                let g = u.gradient(v.mesh.point(t, *p));
                w * v.areas()[t] * (g[0][0] + g[1][1])
            }).sum();
            assert!((q - d).abs() < 1e-9, "{q} vs {d}");
        }
    }

    #[test]
    fn discrete_fields_are_fixed() {
        let v = p2(0.25);
        let proj = Projection::new(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DVector::from_fn(v.velocity_dofs(), |_, _| rng.gen_range(-1.0..1.0));
        let f = FeField::from_dofs(&v, &x);
        let y = proj.apply(&f).dofs();
        assert!((y - &x).amax() < 1e-12);
        let s2 = YoungFunction::power(2.0).unwrap();
        assert_relative_eq!(check_orlicz_projection_stability(&proj, &f, &s2), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn projection_is_idempotent() {
        let v = p2(0.25);
        let proj = Projection::new(&v).unwrap();
        let u = BubbleTrigField::random(&mut ChaCha8Rng::seed_from_u64(1), 3);
        let once = proj.apply(&u);
        let twice = proj.apply(&once);
        assert!((once.dofs() - twice.dofs()).amax() < 1e-12);
    }

    #[test]
    fn stability_ratio_is_homogeneous() {
        let v = p2(0.25);
        let proj = Projection::new(&v).unwrap();
        let u = BubbleTrigField::random(&mut ChaCha8Rng::seed_from_u64(2), 3);
        let a = YoungFunction::zygmund(1.0, 1.0).unwrap();
        let r1 = check_orlicz_projection_stability(&proj, &u, &a);
        let r2 = check_orlicz_projection_stability(&proj, &u.clone().scaled(7.5), &a);
        assert_relative_eq!(r1, r2, max_relative = 1e-8);
    }
}
