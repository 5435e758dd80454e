//! Luxemburg norms, decreasing rearrangements and the Hölder and Poincaré checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SampledField, Values};
use crate::young::YoungFunction;

/// `sum m_i A(v_i / lambda)` for `(m_i, v_i)` pairs.
pub fn modular(pairs: &[(f64, f64)], a: &YoungFunction, lambda: f64) -> f64 {
    let mut total = 0.0;
    for &(m, v) in pairs {
        if v == 0.0 {
            continue;
        }
        let x = a.value(v / lambda);
        if x.is_infinite() {
            return f64::INFINITY;
        }
        total += m * x;
    }
    total
}

/// Least `lambda > 0` with modular at most one.
pub fn luxemburg(pairs: &[(f64, f64)], a: &YoungFunction) -> f64 {
    let vmax = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if vmax == 0.0 {
        return 0.0;
    }
    let mut hi = vmax;
    while modular(pairs, a, hi) > 1.0 {
        hi *= 4.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 4.0;
    while modular(pairs, a, lo) <= 1.0 {
        hi = lo;
        lo /= 4.0;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    while hi / lo - 1.0 > 1e-14 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(pairs, a, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Luxemburg norm of the pointwise modulus of `field`.
pub fn luxemburg_norm(field: &SampledField, a: &YoungFunction) -> f64 {
    luxemburg(&field.weighted_modulus(), a)
}

pub fn field_modular(field: &SampledField, a: &YoungFunction, lambda: f64) -> f64 {
    modular(&field.weighted_modulus(), a, lambda)
}

/// Nonincreasing step function on `[0, L)`: value `values[k]` on
/// `[breaks[k], breaks[k+1])` with `breaks[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn length(&self) -> f64 {
        *self.breaks.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 || s >= self.length() {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= s);
        self.values[k - 1]
    }

    /// `(measure, value)` pieces.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.values.iter().enumerate().map(|(k, &v)| (self.breaks[k + 1] - self.breaks[k], v)).collect()
    }

    /// `int_0^s`.
    pub fn integral_to(&self, s: f64) -> f64 {
        let mut total = 0.0;
        for (k, &v) in self.values.iter().enumerate() {
            let (a, b) = (self.breaks[k], self.breaks[k + 1]);
            if s <= a {
                break;
            }
            total += v * (s.min(b) - a);
        }
        total
    }

    /// Measure of `{ f > t }`.
    pub fn distribution(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > t);
        self.breaks[k]
    }
}

pub type Rearrangement = StepFunction;

/// Decreasing rearrangement of `|field|` on `[0, |Omega|)`.
pub fn rearrange(field: &SampledField) -> Result<Rearrangement> {
    if field.is_empty() {
        return Err(Error::Domain("cannot rearrange an empty field".into()));
    }
    Ok(rearrangement(field))
}

pub(crate) fn rearrangement(field: &SampledField) -> StepFunction {
    let pairs = field.weighted_modulus();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| pairs[j].1.total_cmp(&pairs[i].1));
    let mut breaks = Vec::with_capacity(pairs.len() + 1);
    let mut values = Vec::with_capacity(pairs.len());
    breaks.push(0.0);
    let mut acc = 0.0;
    for i in order {
        acc += pairs[i].0;
        breaks.push(acc);
        values.push(pairs[i].1);
    }
    StepFunction { breaks, values }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderReport {
    pub pairing: f64,
    pub norm_u: f64,
    pub norm_v_conj: f64,
    pub bound: f64,
    pub dual_sup: f64,
    pub holds: bool,
    pub dual_within_bounds: bool,
}

fn pointwise_dot(u: &Values, v: &Values) -> Result<Vec<f64>> {
    Ok(match (u, v) {
        (Values::Scalar(a), Values::Scalar(b)) => a.iter().zip(b).map(|(x, y)| x * y).collect(),
        (Values::Vector(a), Values::Vector(b)) => a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).collect(),
        (Values::Matrix(a), Values::Matrix(b)) => a
            .iter()
            .zip(b)
            .map(|(x, y)| x[0][0] * y[0][0] + x[0][1] * y[0][1] + x[1][0] * y[1][0] + x[1][1] * y[1][1])
            .collect(),
        _ => return Err(Error::Inconsistent("pairing fields of different rank".into())),
    })
}

/// Checks `|int u v| <= 2 ||u||_A ||v||_Ã` and estimates the dual norm of `v`
/// over `family` (the extremal function for `v` is always added).
pub fn holder_pairing_check(
    u: &SampledField,
    v: &SampledField,
    a: &YoungFunction,
    family: &[SampledField],
) -> Result<HolderReport> {
    if !u.same_cells(v) {
        return Err(Error::Geometry("u and v live on different cells".into()));
    }
    let ac = a.conjugate();
    let pair = |x: &SampledField| -> Result<f64> {
        let d = pointwise_dot(x.values(), v.values())?;
        Ok(x.cells().iter().zip(d).map(|(c, p)| c.measure * p).sum())
    };
    let pairing = pair(u)?;
    let norm_u = luxemburg_norm(u, a);
    let norm_v = luxemburg_norm(v, &ac);
    let bound = 2.0 * norm_u * norm_v;
    let mut dual_sup: f64 = 0.0;
    for w in family.iter().chain(std::iter::once(&extremal(v, a, norm_v)?)) {
        if !w.same_cells(v) {
            return Err(Error::Geometry("family member lives on different cells".into()));
        }
        let n = luxemburg_norm(w, a);
        if n > 0.0 && n.is_finite() {
            dual_sup = dual_sup.max(pair(w)?.abs() / n);
        }
    }
    let tol = 1e-9 * bound.max(f64::MIN_POSITIVE);
    Ok(HolderReport {
        pairing,
        norm_u,
        norm_v_conj: norm_v,
        bound,
        dual_sup,
        holds: pairing.abs() <= bound + tol,
        dual_within_bounds: dual_sup >= norm_v * (1.0 - 1e-9) - tol && dual_sup <= 2.0 * norm_v * (1.0 + 1e-9) + tol,
    })
}

/// `sign(v) a(|v| / ||v||_Ã)`, which attains at least `||v||_Ã` in the dual pairing.
fn extremal(v: &SampledField, a: &YoungFunction, norm_v: f64) -> Result<SampledField> {
    let ac = a.conjugate();
    let scale = if norm_v > 0.0 { norm_v } else { 1.0 };
    let mag = |x: f64| -> f64 {
        let d = ac.density(x / scale);
        if d.is_finite() {
            d
        } else {
            a.grid().max
        }
    };
    let vals = match v.values() {
        Values::Scalar(s) => Values::Scalar(s.iter().map(|&x| x.signum() * mag(x.abs())).collect()),
        Values::Vector(s) => Values::Vector(
            s.iter()
                .map(|x| {
                    let n = x[0].hypot(x[1]);
                    if n == 0.0 {
                        [0.0, 0.0]
                    } else {
                        let m = mag(n) / n;
                        [x[0] * m, x[1] * m]
                    }
                })
                .collect(),
        ),
        Values::Matrix(s) => Values::Matrix(
            s.iter()
                .map(|x| {
                    let n = (x[0][0].powi(2) + x[0][1].powi(2) + x[1][0].powi(2) + x[1][1].powi(2)).sqrt();
                    if n == 0.0 {
                        [[0.0; 2]; 2]
                    } else {
                        let m = mag(n) / n;
                        [[x[0][0] * m, x[0][1] * m], [x[1][0] * m, x[1][1] * m]]
                    }
                })
                .collect(),
        ),
    };
    v.with_values(vals)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoincareReport {
    pub ratio: f64,
    pub norm_oscillation: f64,
    pub norm_gradient: f64,
}

/// `||u - u_Omega||_A / (|Omega|^{1/2} ||grad u||_A)` for scalar `u` with a
/// sampled gradient on the same cells.
pub fn poincare_check(u: &SampledField, grad: &SampledField, a: &YoungFunction) -> Result<PoincareReport> {
    if !u.same_cells(grad) {
        return Err(Error::Geometry("u and its gradient live on different cells".into()));
    }
    if grad.rank() != 1 {
        return Err(Error::Inconsistent("gradient must be a vector field".into()));
    }
    let osc = u.mean_free()?;
    let no = luxemburg_norm(&osc, a);
    let ng = luxemburg_norm(grad, a);
    if ng == 0.0 {
        if no > 0.0 {
            return Err(Error::Inconsistent("gradient vanishes but u is not constant".into()));
        }
        return Ok(PoincareReport { ratio: 0.0, norm_oscillation: 0.0, norm_gradient: 0.0 });
    }
    Ok(PoincareReport { ratio: no / (u.measure().sqrt() * ng), norm_oscillation: no, norm_gradient: ng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Cell;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid_cells(n: usize) -> Vec<Cell> {
        let h = 1.0 / n as f64;
        let mut c = Vec::new();
        for j in 0..n {
            for i in 0..n {
                c.push(Cell { centroid: [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h], measure: h * h });
            }
        }
        c
    }

    #[test]
    fn l2_norm_matches_closed_form() {
        let cells = grid_cells(8);
        let vals: Vec<f64> = cells.iter().map(|c| c.centroid[0] - 0.3 * c.centroid[1]).collect();
        let exact = cells.iter().zip(&vals).map(|(c, v)| c.measure * v * v).sum::<f64>().sqrt();
        let f = SampledField::scalar(cells, vals).unwrap();
        assert_relative_eq!(luxemburg_norm(&f, &YoungFunction::power(2.0).unwrap()), exact, max_relative = 1e-12);
    }

    #[test]
    fn linf_norm_is_max() {
        let f = SampledField::scalar(grid_cells(2), vec![0.5, -2.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(luxemburg_norm(&f, &YoungFunction::linf(1.0).unwrap()), 2.0, max_relative = 1e-12);
        assert_relative_eq!(luxemburg_norm(&f, &YoungFunction::power(1.0).unwrap()), 3.5 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn exponential_norm_of_constant() {
        // |Omega| = 1, u = c: A(c / l) = 1 gives l = c / ln 2 for e^t - 1.
        let f = SampledField::scalar(grid_cells(3), vec![2.0; 9]).unwrap();
        assert_relative_eq!(
            luxemburg_norm(&f, &YoungFunction::exponential(1.0).unwrap()),
            2.0 / 2f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rearrangement_is_equimeasurable() {
        let cells = grid_cells(4);
        let vals: Vec<f64> = (0..16).map(|k| ((k * 7) % 5) as f64 - 2.0).collect();
        let f = SampledField::scalar(cells, vals.clone()).unwrap();
        let r = rearrangement(&f);
        for t in [0.0, 0.5, 1.0, 1.5, 2.5] {
            let direct = vals.iter().filter(|v| v.abs() > t).count() as f64 / 16.0;
            assert_relative_eq!(r.distribution(t), direct, epsilon = 1e-15);
        }
        assert_eq!(r.eval(0.0), 2.0);
    }

    #[test]
    fn scaled_indicator_closed_form() {
        let cells = grid_cells(10);
        let vals: Vec<f64> = cells.iter().map(|c| if c.centroid[0] < 0.3 { 2.5 } else { 0.0 }).collect();
        let f = SampledField::scalar(cells, vals).unwrap();
        for a in families() {
            let expect = 2.5 / a.inverse(1.0 / 0.3).unwrap();
            assert_relative_eq!(luxemburg_norm(&f, &a), expect, max_relative = 1e-8);
        }
    }

    #[test]
    fn modular_of_constant() {
        let f = SampledField::scalar(grid_cells(2), vec![1.0; 4]).unwrap();
        let cells: Vec<Cell> = f.cells().iter().map(|c| Cell { measure: 2.0 * c.measure, ..*c }).collect();
        let g = SampledField::scalar(cells, vec![1.0; 4]).unwrap();
        assert_relative_eq!(field_modular(&g, &YoungFunction::power(2.0).unwrap(), 1.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_cell_rearrangement() {
        let cells = vec![
            Cell { centroid: [0.0, 0.0], measure: 0.7 },
            Cell { centroid: [1.0, 0.0], measure: 0.3 },
        ];
        let r = rearrange(&SampledField::scalar(cells, vec![2.0, -5.0]).unwrap()).unwrap();
        assert_eq!(r.values, vec![5.0, 2.0]);
        assert_relative_eq!(r.breaks[1], 0.3);
        let empty = SampledField::scalar(vec![], vec![]).unwrap();
        assert!(matches!(rearrange(&empty), Err(Error::Domain(_))));
    }

    #[test]
    fn poincare_linear_function() {
        let cells = grid_cells(40);
        let u = SampledField::scalar(cells.clone(), cells.iter().map(|c| c.centroid[0]).collect()).unwrap();
        let g = SampledField::new(cells, Values::Vector(vec![[1.0, 0.0]; 1600])).unwrap();
        let rep = poincare_check(&u, &g, &YoungFunction::power(2.0).unwrap()).unwrap();
        // discrete variance of the midpoints: (1 - h^2) / 12
        assert_relative_eq!(rep.ratio, ((1.0 - 1.0 / 1600.0) / 12.0f64).sqrt(), max_relative = 1e-10);
        let mut ratios = Vec::new();
        for a in [
            YoungFunction::power(1.5).unwrap(),
            YoungFunction::power(4.0).unwrap(),
            YoungFunction::zygmund(1.0, 1.0).unwrap(),
            YoungFunction::exponential(1.0).unwrap(),
        ] {
            ratios.push(poincare_check(&u, &g, &a).unwrap().ratio);
        }
        assert!(ratios.iter().all(|r| *r > 0.0 && *r <= 0.5), "{ratios:?}");
    }

    #[test]
    fn holder_on_l2() {
        let cells = grid_cells(6);
        let u = SampledField::scalar(cells.clone(), cells.iter().map(|c| c.centroid[0].sin()).collect()).unwrap();
        let v = SampledField::scalar(cells.clone(), cells.iter().map(|c| c.centroid[1] - 0.5).collect()).unwrap();
        let rep = holder_pairing_check(&u, &v, &YoungFunction::power(2.0).unwrap(), &[]).unwrap();
        assert!(rep.holds && rep.dual_within_bounds, "{rep:?}");
    }

    #[test]
    fn poincare_rejects_inconsistent_gradient() {
        let cells = grid_cells(2);
        let u = SampledField::scalar(cells.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let g = SampledField::new(cells, Values::Vector(vec![[0.0, 0.0]; 4])).unwrap();
        assert!(matches!(poincare_check(&u, &g, &YoungFunction::power(2.0).unwrap()), Err(Error::Inconsistent(_))));
    }

    fn families() -> Vec<YoungFunction> {
        vec![
            YoungFunction::power(1.5).unwrap(),
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::zygmund(1.0, 1.0).unwrap(),
            YoungFunction::exponential(1.0).unwrap(),
            YoungFunction::eyring(),
        ]
    }

    proptest! {
        #[test]
        fn unit_modular_and_homogeneity(vals in proptest::collection::vec(-5.0f64..5.0, 16), which in 0usize..5, lam in 0.1f64..10.0) {
            prop_assume!(vals.iter().any(|v| v.abs() > 1e-6));
            let a = &families()[which];
            let f = SampledField::scalar(grid_cells(4), vals.clone()).unwrap();
            let n = luxemburg_norm(&f, a);
            prop_assert!(field_modular(&f, a, n) <= 1.0 + 1e-12);
            let g = SampledField::scalar(grid_cells(4), vals.iter().map(|v| lam * v).collect()).unwrap();
            let m = luxemburg_norm(&g, a);
            prop_assert!((m - lam * n).abs() <= 1e-10 * m);
        }

        #[test]
        fn triangle_inequality(u in proptest::collection::vec(-5.0f64..5.0, 16), v in proptest::collection::vec(-5.0f64..5.0, 16), which in 0usize..5) {
            let a = &families()[which];
            let fu = SampledField::scalar(grid_cells(4), u.clone()).unwrap();
            let fv = SampledField::scalar(grid_cells(4), v.clone()).unwrap();
            let fw = SampledField::scalar(grid_cells(4), u.iter().zip(&v).map(|(x, y)| x + y).collect()).unwrap();
            let (nu, nv, nw) = (luxemburg_norm(&fu, a), luxemburg_norm(&fv, a), luxemburg_norm(&fw, a));
            prop_assert!(nw <= nu + nv + 1e-9);
        }

        #[test]
        fn modular_at_norm_is_one(vals in proptest::collection::vec(-5.0f64..5.0, 16), which in 0usize..5) {
            prop_assume!(vals.iter().any(|v| v.abs() > 1e-3));
            let a = &families()[which];
            let f = SampledField::scalar(grid_cells(4), vals).unwrap();
            let m = field_modular(&f, a, luxemburg_norm(&f, a));
            prop_assert!((m - 1.0).abs() <= 1e-8, "{}", m);
        }

        #[test]
        fn rearrangement_preserves_norm(vals in proptest::collection::vec(-5.0f64..5.0, 16), which in 0usize..5) {
            prop_assume!(vals.iter().any(|v| v.abs() > 1e-6));
            let a = &families()[which];
            let f = SampledField::scalar(grid_cells(4), vals).unwrap();
            let r = rearrangement(&f);
            let x = luxemburg_norm(&f, a);
            let y = luxemburg(&r.pairs(), a);
            prop_assert!((x - y).abs() <= 1e-12 * x);
        }

        #[test]
        fn holder_holds(u in proptest::collection::vec(-3.0f64..3.0, 16), v in proptest::collection::vec(-3.0f64..3.0, 16), which in 0usize..5) {
            prop_assume!(u.iter().any(|x| x.abs() > 1e-6) && v.iter().any(|x| x.abs() > 1e-6));
            let a = &families()[which];
            let fu = SampledField::scalar(grid_cells(4), u).unwrap();
            let fv = SampledField::scalar(grid_cells(4), v).unwrap();
            let rep = holder_pairing_check(&fu, &fv, a, &[]).unwrap();
            prop_assert!(rep.holds);
            prop_assert!(rep.dual_within_bounds, "{:?}", rep);
        }
    }
}
