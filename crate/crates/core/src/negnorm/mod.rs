//! Finite-family lower bounds for the negative Orlicz-Sobolev norm of a
//! gradient, the two-sided comparison with Luxemburg norms, and the
//! truncation-mollification approximation of dual elements.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bogovskii::Bump;
use crate::error::{Error, Result};
use crate::field::{SampledField, Values};
use crate::grid::MaskedGrid;
use crate::norms::{luxemburg, luxemburg_norm};
use crate::quadrature::gauss_legendre;
use crate::young::{check_balance, YoungFunction};

/// Vector bubble `e_k X(x) Y(y)` with `X = (x - a)^2 (b - x)^2` on a box of
/// grid cells `[i0, i1) x [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bubble {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
    /// 0 for `e_1`, 1 for `e_2`.
    pub orientation: usize,
}

/// Bubbles on dyadic boxes, aligned and half-shifted, both orientations.
#[derive(Debug, Clone)]
pub struct TestFamily {
    grid: MaskedGrid,
    pub depth: usize,
    pub members: Vec<Bubble>,
    /// Gradient norms keyed by conjugate label and box size in cells.
    norms: Arc<Mutex<HashMap<(String, usize, usize), f64>>>,
}

fn bubble_profile(a: f64, b: f64, x: f64) -> f64 {
    ((x - a) * (b - x)).powi(2)
}

fn bubble_slope(a: f64, b: f64, x: f64) -> f64 {
    2.0 * (x - a) * (b - x) * (a + b - 2.0 * x)
}

impl TestFamily {
    /// Scales `0..depth`: box sides are the grid extent divided by `2^j`;
    /// corners step by half a side. Boxes leaving the domain are dropped.
    /// Families of increasing depth are nested, with earlier members first.
    pub fn bubbles(grid: &MaskedGrid, depth: usize) -> Result<Self> {
        let (nx, ny) = (grid.grid.nx, grid.grid.ny);
        let mut members = Vec::new();
        for j in 0..depth {
            let (wx, wy) = (nx >> j, ny >> j);
            if wx < 2 || wy < 2 {
                return Err(Error::Precondition(format!("grid {nx}x{ny} too coarse for family depth {depth}")));
            }
            let (sx, sy) = ((wx / 2).max(1), (wy / 2).max(1));
            let mut j0 = 0;
            while j0 + wy <= ny {
                let mut i0 = 0;
                while i0 + wx <= nx {
                    let inside = (j0..j0 + wy).all(|jj| (i0..i0 + wx).all(|ii| grid.index_of(ii, jj).is_some()));
                    if inside {
                        for orientation in 0..2 {
                            members.push(Bubble { i0, i1: i0 + wx, j0, j1: j0 + wy, orientation });
                        }
                    }
                    i0 += sx;
                }
                j0 += sy;
            }
        }
        if members.is_empty() {
            return Err(Error::Precondition("test family is empty: no dyadic box fits in the domain".into()));
        }
        Ok(TestFamily { grid: grid.clone(), depth, members, norms: Arc::default() })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grid(&self) -> &MaskedGrid {
        &self.grid
    }

    /// `[x0, y0, x1, y1]` of a member's support.
    pub fn support(&self, m: usize) -> [f64; 4] {
        let b = &self.members[m];
        let g = &self.grid.grid;
        [
            g.origin[0] + b.i0 as f64 * g.h,
            g.origin[1] + b.j0 as f64 * g.h,
            g.origin[0] + b.i1 as f64 * g.h,
            g.origin[1] + b.j1 as f64 * g.h,
        ]
    }

    /// Member value at a point.
    pub fn eval(&self, m: usize, p: [f64; 2]) -> [f64; 2] {
        let s = self.support(m);
        if p[0] <= s[0] || p[0] >= s[2] || p[1] <= s[1] || p[1] >= s[3] {
            return [0.0, 0.0];
        }
        let v = bubble_profile(s[0], s[2], p[0]) * bubble_profile(s[1], s[3], p[1]);
        if self.members[m].orientation == 0 {
            [v, 0.0]
        } else {
            [0.0, v]
        }
    }

    /// Member divergence at a point.
    pub fn divergence(&self, m: usize, p: [f64; 2]) -> f64 {
        let s = self.support(m);
        if p[0] <= s[0] || p[0] >= s[2] || p[1] <= s[1] || p[1] >= s[3] {
            return 0.0;
        }
        if self.members[m].orientation == 0 {
            bubble_slope(s[0], s[2], p[0]) * bubble_profile(s[1], s[3], p[1])
        } else {
            bubble_profile(s[0], s[2], p[0]) * bubble_slope(s[1], s[3], p[1])
        }
    }

    /// `int u div(phi_m)` for `u` constant on cells, as a sum over interior
    /// edges of the box of edge flux times the jump of `u`.
    pub fn pairing(&self, u: &[f64], m: usize) -> f64 {
        let b = self.members[m];
        let g = &self.grid.grid;
        let s = self.support(m);
        let (xs, ws) = gauss_legendre(3);
        let edge_integral = |a: f64, bb: f64, lo: f64| -> f64 {
            xs.iter().zip(&ws).map(|(x, w)| 0.5 * w * g.h * bubble_profile(a, bb, lo + 0.5 * (x + 1.0) * g.h)).sum()
        };
        let cell = |i: usize, j: usize| u[self.grid.index_of(i, j).expect("box lies in the domain")];
        let mut total = 0.0;
        if b.orientation == 0 {
            for i in b.i0 + 1..b.i1 {
                let x = g.origin[0] + i as f64 * g.h;
                let px = bubble_profile(s[0], s[2], x);
                for j in b.j0..b.j1 {
                    let flux = px * edge_integral(s[1], s[3], g.origin[1] + j as f64 * g.h);
                    total += flux * (cell(i - 1, j) - cell(i, j));
                }
            }
        } else {
            for j in b.j0 + 1..b.j1 {
                let y = g.origin[1] + j as f64 * g.h;
                let py = bubble_profile(s[1], s[3], y);
                for i in b.i0..b.i1 {
                    let flux = py * edge_integral(s[0], s[2], g.origin[0] + i as f64 * g.h);
                    total += flux * (cell(i, j - 1) - cell(i, j));
                }
            }
        }
        total
    }

    /// `||grad phi_m||` in `L^at`, memoised by box size.
    pub fn gradient_norm(&self, m: usize, at: &YoungFunction) -> f64 {
        let b = &self.members[m];
        let (w, h) = (b.i1 - b.i0, b.j1 - b.j0);
        let compute = || bubble_gradient_norm(w as f64 * self.grid.grid.h, h as f64 * self.grid.grid.h, at);
        let label = at.label();
        if label.contains("tabulated") {
            return compute();
        }
        let key = (label, w, h);
        if let Some(v) = self.norms.lock().expect("norm cache").get(&key) {
            return *v;
        }
        let v = compute();
        self.norms.lock().expect("norm cache").insert(key, v);
        v
    }
}

/// `||grad phi||` in `L^at` for a bubble on a `w x h` box, from a tensor
/// Gauss rule on a 16 x 16 subdivision of the box.
pub fn bubble_gradient_norm(w: f64, h: f64, at: &YoungFunction) -> f64 {
    let (xs, ws) = gauss_legendre(4);
    let sub = 16;
    let mut nodes = Vec::with_capacity(sub * xs.len());
    for c in 0..sub {
        for (x, wt) in xs.iter().zip(&ws) {
            nodes.push(((c as f64 + 0.5 * (x + 1.0)) / sub as f64, 0.5 * wt / sub as f64));
        }
    }
    let mut pairs = Vec::with_capacity(nodes.len() * nodes.len());
    for &(u, wu) in &nodes {
        let (x, dx) = (bubble_profile(0.0, w, u * w), bubble_slope(0.0, w, u * w));
        for &(v, wv) in &nodes {
            let (y, dy) = (bubble_profile(0.0, h, v * h), bubble_slope(0.0, h, v * h));
            pairs.push((wu * wv * w * h, (dx * y).hypot(x * dy)));
        }
    }
    luxemburg(&pairs, at)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegNormLower {
    pub value: f64,
    /// Index of the maximising member (lowest index on ties).
    pub witness: usize,
    pub pairing: f64,
    pub gradient_norm: f64,
}

/// `max_phi |int u div phi| / ||grad phi||_{L^A~}` over the family.
pub fn neg_norm_lower(u: &SampledField, a: &YoungFunction, family: &TestFamily) -> Result<NegNormLower> {
    if family.is_empty() {
        return Err(Error::Precondition("empty test family".into()));
    }
    family.grid.check_field(u)?;
    let uv = u.scalar_values()?;
    let at = a.conjugate();
    let mut best = NegNormLower { value: 0.0, witness: 0, pairing: 0.0, gradient_norm: 0.0 };
    for m in 0..family.len() {
        let norm = family.gradient_norm(m, &at);
        let pairing = family.pairing(uv, m);
        let value = pairing.abs() / norm;
        if m == 0 || value > best.value {
            best = NegNormLower { value, witness: m, pairing, gradient_norm: norm };
        }
    }
    Ok(best)
}

/// `2 c2 ||u - u_Omega||_{L^A}`.
pub fn neg_norm_upper(u: &SampledField, a: &YoungFunction, c2: f64) -> Result<f64> {
    Ok(2.0 * c2 * luxemburg_norm(&u.mean_free()?, a))
}

/// `|div phi| <= sqrt(n) |grad phi|` in `n = 2` dimensions.
pub const DIVERGENCE_CONSTANT: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSidedReport {
    pub lower: f64,
    pub witness: usize,
    pub upper: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    /// `lower / ||u - u_Omega||_B`
    pub r_low: f64,
    /// `lower / ||u - u_Omega||_A`
    pub r_high: f64,
    pub admissible: bool,
}

pub fn two_sided_check(u: &SampledField, a: &YoungFunction, b: &YoungFunction, family: &TestFamily, c2: f64) -> Result<TwoSidedReport> {
    let admissible = check_balance(a, b, None)?.admissible;
    let lower = neg_norm_lower(u, a, family)?;
    let w = u.mean_free()?;
    let norm_a = luxemburg_norm(&w, a);
    let norm_b = luxemburg_norm(&w, b);
    let ratio = |n: f64| if n > 0.0 { lower.value / n } else { 0.0 };
    Ok(TwoSidedReport {
        lower: lower.value,
        witness: lower.witness,
        upper: 2.0 * c2 * norm_a,
        norm_a,
        norm_b,
        r_low: ratio(norm_b),
        r_high: ratio(norm_a),
        admissible,
    })
}

/// Named test inputs on a grid.
pub fn corpus(grid: &MaskedGrid) -> Result<Vec<(&'static str, SampledField)>> {
    type Profile = fn([f64; 2]) -> f64;
    let items: [(&str, Profile); 10] = [
        ("step_x", |p| (p[0] - 0.5).signum()),
        ("linear", |p| p[0]),
        ("bilinear", |p| p[0] * p[1]),
        ("sine", |p| (2.0 * std::f64::consts::PI * p[0]).sin()),
        ("cosines", |p| (std::f64::consts::PI * p[0]).cos() * (std::f64::consts::PI * p[1]).cos()),
        ("cone", |p| (p[0] - 0.3).hypot(p[1] - 0.6)),
        ("disk", |p| if (p[0] - 0.5).hypot(p[1] - 0.5) < 0.3 { 1.0 } else { 0.0 }),
        ("checker", |p| ((p[0] - 0.5) * (p[1] - 0.5)).signum()),
        ("exponential", |p| (p[0] + p[1]).exp()),
        ("log_peak", |p| -((p[0] - 0.5).hypot(p[1] - 0.5) + 1e-3).ln()),
    ];
    items.into_iter().map(|(n, f)| Ok((n, grid.scalar_field(grid.sample(f))?))).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupApproxStep {
    pub k: usize,
    /// `||v_k||` with `v_k = sign(v) min(|v|, k)`
    pub truncated_norm: f64,
    /// `||phi_k||` for the mollified truncation
    pub mollified_norm: f64,
    /// Mean of `v_k - (v_k)_Omega`
    pub centred_mean: f64,
    /// `int u phi_k` when a `u` is supplied
    pub pairing: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupApproxReport {
    pub target_norm: f64,
    pub target_pairing: Option<f64>,
    pub steps: Vec<SupApproxStep>,
    /// `| ||phi_K|| / ||v|| - 1 |` at the last `k`.
    pub final_relative_error: f64,
}

/// Discrete convolution with the bump of radius `radius`, normalised on the lattice.
pub fn mollify(grid: &MaskedGrid, w: &[f64], radius: f64) -> Vec<f64> {
    let g = &grid.grid;
    let reach = (radius / g.h).ceil() as isize;
    let bump = Bump { center: [0.0, 0.0], radius };
    let mut taps = Vec::new();
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let v = bump.eval([di as f64 * g.h, dj as f64 * g.h]);
            if v > 0.0 {
                taps.push((di, dj, v));
            }
        }
    }
    if taps.is_empty() {
        taps.push((0, 0, 1.0));
    }
    let total: f64 = taps.iter().map(|t| t.2).sum();
    grid.active
        .iter()
        .map(|&(i, j)| {
            let mut acc = 0.0;
            for &(di, dj, v) in &taps {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a < 0 || b < 0 {
                    continue;
                }
                if let Some(k) = grid.index_of(a as usize, b as usize) {
                    acc += v * w[k];
                }
            }
            acc / total
        })
        .collect()
}

/// Truncation at height `k`, restriction to the cells at distance at least
/// `2/k` from the boundary and mollification at scale `1/k`, for each `k`.
/// Norms are taken in the conjugate of `a`.
pub fn sup_approx_convergence(
    v: &SampledField,
    a: &YoungFunction,
    grid: &MaskedGrid,
    ks: &[usize],
    u: Option<&SampledField>,
) -> Result<SupApproxReport> {
    grid.check_field(v)?;
    if let Some(u) = u {
        grid.check_field(u)?;
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Precondition("k values must be positive".into()));
    }
    let at = a.conjugate();
    let vv = v.scalar_values()?;
    let dist = grid.boundary_distances();
    let cells = grid.cells();
    let pair_with = |phi: &[f64]| -> Option<f64> {
        u.map(|u| {
            let uv = u.scalar_values().expect("checked scalar");
            cells.iter().zip(uv).zip(phi).map(|((c, x), y)| c.measure * x * y).sum()
        })
    };
    let target_norm = luxemburg_norm(v, &at);
    let target_pairing = pair_with(vv);
    let mut steps = Vec::with_capacity(ks.len());
    for &k in ks {
        let kf = k as f64;
        let vk: Vec<f64> = vv.iter().map(|x| x.signum() * x.abs().min(kf)).collect();
        let vk_field = v.with_values(Values::Scalar(vk.clone()))?;
        let centred_mean = vk_field.mean_free()?.mean()?;
        let wk: Vec<f64> = vk.iter().zip(&dist).map(|(x, d)| if *d >= 2.0 / kf { *x } else { 0.0 }).collect();
        let phi = mollify(grid, &wk, 1.0 / kf);
        let pairing = pair_with(&phi);
        steps.push(SupApproxStep {
            k,
            truncated_norm: luxemburg_norm(&vk_field, &at),
            mollified_norm: luxemburg_norm(&v.with_values(Values::Scalar(phi))?, &at),
            centred_mean,
            pairing,
        });
    }
    let last = steps.last().expect("non-empty").mollified_norm;
    let final_relative_error = if target_norm > 0.0 { (last / target_norm - 1.0).abs() } else { last };
    Ok(SupApproxReport { target_norm, target_pairing, steps, final_relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CartesianGrid;
    use crate::quadrature::integrate;
    use approx::assert_relative_eq;

    fn square(n: usize) -> MaskedGrid {
        MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 1.0, 1.0], n).unwrap(), |_| true).unwrap()
    }

    #[test]
    fn family_is_nested_and_inside() {
        let g = square(32);
        let f2 = TestFamily::bubbles(&g, 2).unwrap();
        let f3 = TestFamily::bubbles(&g, 3).unwrap();
        assert_eq!(f2.len(), 2 * (1 + 9));
        assert_eq!(&f3.members[..f2.len()], &f2.members[..]);
        assert_eq!(f3.len(), 2 * (1 + 9 + 49));
    }

    #[test]
    fn pairing_matches_divergence_quadrature() {
        let g = square(16);
        let fam = TestFamily::bubbles(&g, 2).unwrap();
        let u = g.sample(|p| p[0] * p[0] + 0.3 * p[1]);
        let uf = g.scalar_field(u.clone()).unwrap();
        for m in [0, 1, 5, 12] {
            // cellwise: int_cell u div(phi) with u constant on the cell
            let mut direct = 0.0;
            for (k, c) in uf.cells().iter().enumerate() {
                let h = g.grid.h;
                let (x0, y0) = (c.centroid[0] - h / 2.0, c.centroid[1] - h / 2.0);
                direct += u[k]
                    * integrate(|x| integrate(|y| fam.divergence(m, [x, y]), y0, y0 + h, 4, 1), x0, x0 + h, 4, 1);
            }
            assert_relative_eq!(fam.pairing(&u, m), direct, max_relative = 1e-10, epsilon = 1e-16);
        }
    }

    #[test]
    fn constants_have_zero_lower_bound() {
        let g = square(16);
        let fam = TestFamily::bubbles(&g, 3).unwrap();
        let u = g.scalar_field(vec![2.5; g.len()]).unwrap();
        let r = neg_norm_lower(&u, &YoungFunction::power(2.0).unwrap(), &fam).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(neg_norm_upper(&u, &YoungFunction::power(2.0).unwrap(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gradient_norm_l2_closed_form() {
        // |grad(X Y)|^2 integrates to 2 int X^2 int X'^2 on a square box
        let w = 0.5;
        let at = YoungFunction::power(2.0).unwrap().conjugate();
        let x2 = integrate(|x| bubble_profile(0.0, w, x).powi(2), 0.0, w, 8, 1);
        let dx2 = integrate(|x| bubble_slope(0.0, w, x).powi(2), 0.0, w, 8, 1);
        // the conjugate of s^2 is s^2/4, so the norm is half the L^2 norm
        let exact = 0.5 * (2.0 * x2 * dx2).sqrt();
        assert_relative_eq!(bubble_gradient_norm(w, w, &at), exact, max_relative = 1e-10);
    }

    #[test]
    fn step_function_lower_bound_grows_with_the_family() {
        let g = square(32);
        let u = g.scalar_field(g.sample(|p| (p[0] - 0.5).signum())).unwrap();
        let a = YoungFunction::power(2.0).unwrap();
        let mut last = 0.0;
        for d in 1..=3 {
            let v = neg_norm_lower(&u, &a, &TestFamily::bubbles(&g, d).unwrap()).unwrap().value;
            assert!(v > 0.0 && v >= last);
            last = v;
        }
        let fam = TestFamily::bubbles(&g, 3).unwrap();
        let base = neg_norm_lower(&u, &a, &fam).unwrap();
        let scaled = neg_norm_lower(&u.map_scalar(|x| 3.0 * x).unwrap(), &a, &fam).unwrap();
        assert_relative_eq!(scaled.value, 3.0 * base.value, max_relative = 1e-12);
        assert_eq!(scaled.witness, base.witness);
        let shifted = neg_norm_lower(&u.map_scalar(|x| x + 7.0).unwrap(), &a, &fam).unwrap();
        assert_relative_eq!(shifted.value, base.value, max_relative = 1e-12);
    }

    #[test]
    fn lower_bound_never_exceeds_holder_bound() {
        let g = square(32);
        let fam = TestFamily::bubbles(&g, 3).unwrap();
        for a in [YoungFunction::power(2.0).unwrap(), YoungFunction::power(1.5).unwrap(), YoungFunction::zygmund(1.0, 1.0).unwrap()] {
            for (name, u) in corpus(&g).unwrap() {
                let r = two_sided_check(&u, &a, &a, &fam, DIVERGENCE_CONSTANT).unwrap();
                assert!(r.lower <= r.upper * (1.0 + 1e-9), "{name} {}: {} > {}", a.label(), r.lower, r.upper);
            }
        }
    }

    #[test]
    fn mollified_truncations_converge() {
        let g = square(64);
        let v = g.scalar_field(g.sample(|p| 3.0 * (std::f64::consts::PI * p[0]).sin().powi(2) * (std::f64::consts::PI * p[1]).sin().powi(2))).unwrap();
        let a = YoungFunction::power(2.0).unwrap();
        let r = sup_approx_convergence(&v, &a, &g, &[1, 2, 4, 8, 16, 32], Some(&v)).unwrap();
        assert!(r.final_relative_error < 0.02, "{}", r.final_relative_error);
        for s in &r.steps {
            assert!(s.centred_mean.abs() < 1e-12);
        }
        // truncations increase toward the target
        for w in r.steps.windows(2) {
            assert!(w[1].truncated_norm >= w[0].truncated_norm);
        }
        assert_relative_eq!(r.steps.last().unwrap().truncated_norm, r.target_norm, max_relative = 1e-12);
    }
}
