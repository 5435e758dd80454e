use serde::{Deserialize, Serialize};

use super::domain::{Bump, StarDomain};
use crate::error::{Error, Result};
use crate::field::{SampledField, Values};
use crate::grid::{MaskedGrid, Stencil};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayRule {
    /// Closed-form antiderivative of the polynomial bump along the ray.
    Exact,
    /// Gauss-Legendre with the given number of nodes on the clipped segment.
    Gauss(usize),
}

/// Outer quadrature: polar rule on cells touching `x`'s neighbourhood,
/// tensor Gauss of order `near_order` on near cells, 2x2 Gauss up to
/// `mid_radius`, centroid rule beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    pub near_radius: usize,
    pub near_order: usize,
    pub polar_order: usize,
    pub mid_radius: usize,
    pub ray: RayRule,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { near_radius: 2, near_order: 4, polar_order: 12, mid_radius: 12, ray: RayRule::Exact }
    }
}

/// `int_{|x-y|}^inf omega(y + z e) z dz` with `e = (x - y)/|x - y|`.
pub fn ray_weight(bump: &Bump, x: [f64; 2], y: [f64; 2], rule: RayRule) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1]];
    let rho = d[0].hypot(d[1]);
    if rho == 0.0 {
        return 0.0;
    }
    let e = [d[0] / rho, d[1] / rho];
    let w = [y[0] - bump.center[0], y[1] - bump.center[1]];
    let b = e[0] * w[0] + e[1] * w[1];
    let r2 = bump.radius * bump.radius;
    let disc = r2 - (w[0] * w[0] + w[1] * w[1] - b * b);
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let lo = (-sq).max(rho + b);
    if lo >= sq {
        return 0.0;
    }
    let k = bump.normalization() / (r2 * r2 * r2 * r2);
    match rule {
        RayRule::Exact => {
            let prim = |t: f64| {
                let q = disc - t * t;
                let t2 = t * t;
                let p = t * (disc.powi(4) - 4.0 / 3.0 * disc.powi(3) * t2 + 1.2 * disc * disc * t2 * t2
                    - 4.0 / 7.0 * disc * t2 * t2 * t2
                    + t2 * t2 * t2 * t2 / 9.0);
                -q.powi(5) / 10.0 - b * p
            };
            k * (prim(sq) - prim(lo))
        }
        RayRule::Gauss(n) => {
            let (xs, ws) = gauss_legendre(n);
            let (mid, half) = (0.5 * (lo + sq), 0.5 * (sq - lo));
            let mut total = 0.0;
            for (xi, wi) in xs.iter().zip(&ws) {
                let t = mid + half * xi;
                total += wi * (disc - t * t).powi(4) * (t - b);
            }
            k * half * total
        }
    }
}

/// Kernel `(x - y)/|x - y|^2 * ray_weight`.
pub fn kernel(bump: &Bump, x: [f64; 2], y: [f64; 2], rule: RayRule) -> [f64; 2] {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r2 = d[0] * d[0] + d[1] * d[1];
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let w = ray_weight(bump, x, y, rule) / r2;
    [d[0] * w, d[1] * w]
}

/// Source cells of the operator: the active cells of a grid.
pub(crate) struct Sources<'a> {
    pub grid: &'a MaskedGrid,
    pub cells: Vec<usize>,
}

pub(crate) struct Rules {
    near: Vec<(f64, f64)>,
    mid: Vec<(f64, f64)>,
    polar: Vec<(f64, f64)>,
}

impl Rules {
    fn new(q: &Quadrature) -> Self {
        let (x, w) = gauss_legendre(q.near_order);
        let near = x.iter().zip(&w).map(|(a, b)| (0.5 * (a + 1.0), 0.5 * b)).collect();
        let (x, w) = gauss_legendre(2);
        let mid = x.iter().zip(&w).map(|(a, b)| (0.5 * (a + 1.0), 0.5 * b)).collect();
        let (x, w) = gauss_legendre(q.polar_order);
        let polar = x.iter().zip(&w).map(|(a, b)| (0.5 * (a + 1.0), 0.5 * b)).collect();
        Rules { near, mid, polar }
    }
}

/// Integral of the kernel over the triangle `(x, a, b)` in polar coordinates
/// about `x`, signed by orientation.
fn polar_triangle(bump: &Bump, x: [f64; 2], a: [f64; 2], b: [f64; 2], rules: &Rules, ray: RayRule) -> [f64; 2] {
    let (ax, ay) = (a[0] - x[0], a[1] - x[1]);
    let (bx, by) = (b[0] - x[0], b[1] - x[1]);
    let cross = ax * by - ay * bx;
    let scale = (ax * ax + ay * ay).max(bx * bx + by * by);
    if cross.abs() <= 1e-14 * scale {
        return [0.0, 0.0];
    }
    let ta = ay.atan2(ax);
    let mut dt = by.atan2(bx) - ta;
    if dt > std::f64::consts::PI {
        dt -= 2.0 * std::f64::consts::PI;
    } else if dt < -std::f64::consts::PI {
        dt += 2.0 * std::f64::consts::PI;
    }
    // unit normal of ab and distance from x to its line
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len = ex.hypot(ey);
    let (nx, ny) = (ey / len, -ex / len);
    let dist = nx * ax + ny * ay;
    let mut out = [0.0, 0.0];
    for &(ut, wt) in &rules.polar {
        let th = ta + ut * dt;
        let (c, s) = (th.cos(), th.sin());
        let rmax = dist / (nx * c + ny * s);
        let mut acc = 0.0;
        for &(ur, wr) in &rules.polar {
            let r = ur * rmax;
            acc += wr * ray_weight(bump, x, [x[0] + r * c, x[1] + r * s], ray);
        }
        acc *= rmax * wt * dt;
        out[0] -= c * acc;
        out[1] -= s * acc;
    }
    out
}

fn cell_integral(bump: &Bump, x: [f64; 2], rect: [f64; 4], q: &Quadrature, rules: &Rules, h: f64) -> [f64; 2] {
    let ex = (rect[0] - x[0]).max(x[0] - rect[2]).max(0.0);
    let ey = (rect[1] - x[1]).max(x[1] - rect[3]).max(0.0);
    let cheb = ex.max(ey) / h;
    if cheb < 1.0 - 1e-12 {
        let v = [[rect[0], rect[1]], [rect[2], rect[1]], [rect[2], rect[3]], [rect[0], rect[3]]];
        let mut out = [0.0, 0.0];
        for k in 0..4 {
            let t = polar_triangle(bump, x, v[k], v[(k + 1) % 4], rules, q.ray);
            out[0] += t[0];
            out[1] += t[1];
        }
        return out;
    }
    let rule = if cheb < q.near_radius as f64 - 1e-12 {
        Some(&rules.near)
    } else if cheb < q.mid_radius as f64 - 1e-12 {
        Some(&rules.mid)
    } else {
        None
    };
    if let Some(rule) = rule {
        let mut out = [0.0, 0.0];
        for &(u, wu) in rule {
            for &(v, wv) in rule {
                let y = [rect[0] + u * h, rect[1] + v * h];
                let k = kernel(bump, x, y, q.ray);
                out[0] += wu * wv * k[0];
                out[1] += wu * wv * k[1];
            }
        }
        return [out[0] * h * h, out[1] * h * h];
    }
    let k = kernel(bump, x, [0.5 * (rect[0] + rect[2]), 0.5 * (rect[1] + rect[3])], q.ray);
    [k[0] * h * h, k[1] * h * h]
}

/// `u(x)` for several densities at once; `fs[m][k]` is density `m` on source cell `k`.
pub(crate) fn apply_batch(
    bump: &Bump,
    sources: &Sources,
    fs: &[&[f64]],
    x: [f64; 2],
    q: &Quadrature,
    rules_cache: Option<&Rules>,
) -> Vec<[f64; 2]> {
    let own;
    let rules = match rules_cache {
        Some(r) => r,
        None => {
            own = Rules::new(q);
            &own
        }
    };
    let g = &sources.grid.grid;
    let mut out = vec![[0.0, 0.0]; fs.len()];
    for (k, &c) in sources.cells.iter().enumerate() {
        if fs.iter().all(|f| f[k] == 0.0) {
            continue;
        }
        let (i, j) = sources.grid.active[c];
        let val = cell_integral(bump, x, g.rect(i, j), q, rules, g.h);
        for (o, f) in out.iter_mut().zip(fs) {
            o[0] += f[k] * val[0];
            o[1] += f[k] * val[1];
        }
    }
    out
}

/// Single-point evaluation of the Bogovskii operator.
pub fn bogovskii_apply(f: &SampledField, x: [f64; 2], domain: &StarDomain, grid: &MaskedGrid, q: &Quadrature) -> Result<[f64; 2]> {
    grid.check_field(f)?;
    let (vals, _) = mean_free(f.scalar_values()?);
    let sources = Sources { grid, cells: (0..grid.len()).collect() };
    Ok(apply_batch(&domain.bump(), &sources, &[&vals], x, q, None)[0])
}

/// Subtracts the mean when it exceeds `1e-10 ||f||_inf`; returns the removed mean.
pub(crate) fn mean_free(v: &[f64]) -> (Vec<f64>, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if mean.abs() <= 1e-10 * sup {
        (v.to_vec(), 0.0)
    } else {
        (v.iter().map(|x| x - mean).collect(), mean)
    }
}

/// Bogovskii field on a grid: the vector field at centroids, its
/// finite-difference gradient and divergence.
#[derive(Debug, Clone)]
pub struct BogovskiiField {
    pub velocity: SampledField,
    pub gradient: SampledField,
    pub divergence: SampledField,
    /// Mean removed from the input before applying the operator (0 if none).
    pub projected_mean: f64,
    pub point_values: Vec<[f64; 2]>,
}

pub(crate) fn evaluate_points(
    bump: &Bump,
    sources: &Sources,
    fs: &[&[f64]],
    points: &[[f64; 2]],
    q: &Quadrature,
) -> Vec<Vec<[f64; 2]>> {
    let rules = Rules::new(q);
    let mut out = vec![Vec::with_capacity(points.len()); fs.len()];
    for &p in points {
        let v = apply_batch(bump, sources, fs, p, q, Some(&rules));
        for (o, x) in out.iter_mut().zip(v) {
            o.push(x);
        }
    }
    out
}

pub(crate) fn assemble_field(grid: &MaskedGrid, stencil: &Stencil, u: Vec<[f64; 2]>, mean: f64) -> Result<BogovskiiField> {
    let cells = grid.cells();
    let velocity = SampledField::new(cells.clone(), Values::Vector(stencil.centroid_values(&u)))?;
    let gradient = SampledField::new(cells.clone(), Values::Matrix(stencil.gradient(&u)))?;
    let divergence = SampledField::new(cells, Values::Scalar(stencil.divergence(&u)))?;
    Ok(BogovskiiField { velocity, gradient, divergence, projected_mean: mean, point_values: u })
}

/// Applies the operator to each density in `fs` (all on the cells of `grid`).
pub fn bogovskii_fields(fs: &[SampledField], domain: &StarDomain, grid: &MaskedGrid, q: &Quadrature) -> Result<Vec<BogovskiiField>> {
    if fs.is_empty() {
        return Ok(Vec::new());
    }
    let mut vals = Vec::with_capacity(fs.len());
    let mut means = Vec::with_capacity(fs.len());
    for f in fs {
        grid.check_field(f)?;
        let (v, m) = mean_free(f.scalar_values()?);
        vals.push(v);
        means.push(m);
    }
    let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
    let stencil = grid.stencil();
    let sources = Sources { grid, cells: (0..grid.len()).collect() };
    let us = evaluate_points(&domain.bump(), &sources, &refs, &stencil.points, q);
    us.into_iter().zip(means).map(|(u, m)| assemble_field(grid, &stencil, u, m)).collect()
}

pub fn bogovskii_field(f: &SampledField, domain: &StarDomain, grid: &MaskedGrid, q: &Quadrature) -> Result<BogovskiiField> {
    let mut v = bogovskii_fields(std::slice::from_ref(f), domain, grid, q)?;
    v.pop().ok_or_else(|| Error::Inconsistent("no field produced".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::assert_relative_eq;

    #[test]
    fn exact_ray_matches_gauss_and_brute_force() {
        let bump = Bump { center: [0.1, -0.05], radius: 0.5 };
        for (x, y) in [([0.3, 0.2], [-0.6, -0.1]), ([0.05, 0.0], [0.0, 0.02]), ([-0.7, 0.4], [0.6, -0.5])] {
            let e = ray_weight(&bump, x, y, RayRule::Exact);
            let g = ray_weight(&bump, x, y, RayRule::Gauss(16));
            let d = [x[0] - y[0], x[1] - y[1]];
            let rho = d[0].hypot(d[1]);
            let brute = integrate(|z| bump.eval([y[0] + z * d[0] / rho, y[1] + z * d[1] / rho]) * z, rho, 4.0, 16, 400);
            assert_relative_eq!(e, g, max_relative = 1e-11, epsilon = 1e-14);
            assert_relative_eq!(e, brute, max_relative = 1e-6, epsilon = 1e-12);
        }
    }

    #[test]
    fn kernel_vanishes_when_the_ray_misses_the_ball() {
        let bump = Bump { center: [0.0, 0.0], radius: 0.5 };
        assert_eq!(ray_weight(&bump, [0.9, 0.0], [0.8, 0.0], RayRule::Exact), 0.0);
        assert_eq!(ray_weight(&bump, [0.6, 0.9], [0.6, 0.8], RayRule::Exact), 0.0);
    }

    #[test]
    fn zero_density_gives_zero() {
        let d = StarDomain::unit_disk();
        let g = d.grid(12).unwrap();
        let f = g.scalar_field(vec![0.0; g.len()]).unwrap();
        assert_eq!(bogovskii_apply(&f, [0.1, 0.2], &d, &g, &Quadrature::default()).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn linearity() {
        let d = StarDomain::unit_disk();
        let g = d.grid(16).unwrap();
        let q = Quadrature::default();
        let f1 = g.scalar_field(g.sample(|p| p[0])).unwrap();
        let f2 = g.scalar_field(g.sample(|p| p[0] * p[1] - 0.1 * p[1])).unwrap();
        let comb = g
            .scalar_field(f1.scalar_values().unwrap().iter().zip(f2.scalar_values().unwrap()).map(|(a, b)| 2.0 * a - 3.0 * b).collect())
            .unwrap();
        let x = [0.2, -0.3];
        let (u1, u2, u) = (
            bogovskii_apply(&f1, x, &d, &g, &q).unwrap(),
            bogovskii_apply(&f2, x, &d, &g, &q).unwrap(),
            bogovskii_apply(&comb, x, &d, &g, &q).unwrap(),
        );
        for c in 0..2 {
            assert!((u[c] - (2.0 * u1[c] - 3.0 * u2[c])).abs() < 1e-13);
        }
    }
}
