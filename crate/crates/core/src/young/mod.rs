//! Young functions: evaluation, conjugation, generalized inverses and growth
//! classification.

mod balance;
mod classify;
mod parse;

pub use balance::{check_balance, BalanceCondition, BalanceReport};
pub use classify::{classify_delta2, classify_nabla2, dominates, GrowthClass};
pub use parse::{parse_young, parse_young_pair, GridSpec, YoungDocument};

use std::sync::Arc;

use crate::error::{Error, Result};

/// Geometric sampling grid on which a Young function is classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { min: 1e-6, max: 1e6, points: 241 }
    }
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && max.is_finite() && points >= 2) {
            return Err(Error::InvalidYoung(format!(
                "grid needs 0 < min < max < inf and at least 2 points, got [{min}, {max}] x {points}"
            )));
        }
        Ok(Grid { min, max, points })
    }

    pub fn samples(&self) -> Vec<f64> {
        log_space(self.min, self.max, self.points)
    }
}

pub fn log_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (min.ln(), max.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                max
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `coef * t^p`
    Power { p: f64, coef: f64 },
    /// `t^p log^alpha(1 + t)`
    Zygmund { p: f64, alpha: f64 },
    /// `exp((t + c)^beta) - exp(c^beta)` with the shift `c` making it convex.
    Exponential { beta: f64 },
    /// Primitive of `arsinh`.
    Eyring,
    /// Zero on `[0, cap]`, infinite beyond.
    LinfCap { cap: f64 },
    /// Density samples on the grid, accumulated by the trapezoid rule.
    Tabulated { knots: Arc<Vec<f64>>, density: Arc<Vec<f64>>, cumulative: Arc<Vec<f64>> },
    /// Legendre conjugate of another function.
    Conjugate(Arc<YoungFunction>),
}

#[derive(Debug, Clone)]
pub struct YoungFunction {
    family: Family,
    grid: Grid,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0)
    }

    pub fn scaled_power(p: f64, coef: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite() && coef > 0.0 && coef.is_finite()) {
            return Err(Error::InvalidYoung(format!("power needs p >= 1 and coef > 0, got p={p} coef={coef}")));
        }
        Ok(Self::from_family(Family::Power { p, coef }))
    }

    pub fn zygmund(p: f64, alpha: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite() && alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidYoung(format!("zygmund needs p >= 1 and alpha >= 0, got p={p} alpha={alpha}")));
        }
        Ok(Self::from_family(Family::Zygmund { p, alpha }))
    }

    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidYoung(format!("exponential needs beta > 0, got {beta}")));
        }
        Ok(Self::from_family(Family::Exponential { beta }))
    }

    pub fn eyring() -> Self {
        Self::from_family(Family::Eyring)
    }

    pub fn linf(cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidYoung(format!("linf cap must be positive, got {cap}")));
        }
        Ok(Self::from_family(Family::LinfCap { cap }))
    }

    /// Young function whose density is given by samples on `grid`.
    ///
    /// Fails unless the density is nonnegative and nondecreasing.
    pub fn tabulated(grid: Grid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.points {
            return Err(Error::InvalidYoung(format!(
                "tabulated density has {} samples, grid has {}",
                density.len(),
                grid.points
            )));
        }
        for (i, d) in density.iter().enumerate() {
            if !d.is_finite() || *d < 0.0 {
                return Err(Error::InvalidYoung(format!("density sample {i} is {d}")));
            }
            if i > 0 && *d < density[i - 1] {
                return Err(Error::InvalidYoung(format!(
                    "density decreases between samples {} and {i}: not convex",
                    i - 1
                )));
            }
        }
        if density.iter().all(|d| *d == 0.0) {
            return Err(Error::InvalidYoung("density vanishes identically".into()));
        }
        let knots = grid.samples();
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(head_integral(&knots, &density, knots[0]));
        for i in 1..knots.len() {
            let prev = cumulative[i - 1];
            cumulative.push(prev + 0.5 * (knots[i] - knots[i - 1]) * (density[i] + density[i - 1]));
        }
        Ok(YoungFunction {
            family: Family::Tabulated {
                knots: Arc::new(knots),
                density: Arc::new(density),
                cumulative: Arc::new(cumulative),
            },
            grid,
        })
    }

    fn from_family(family: Family) -> Self {
        YoungFunction { family, grid: Grid::default() }
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        if !matches!(self.family, Family::Tabulated { .. }) {
            self.grid = grid;
        }
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Power { p, coef } if *coef == 1.0 => format!("power({p})"),
            Family::Power { p, coef } => format!("power({p},{coef})"),
            Family::Zygmund { p, alpha } => format!("zygmund({p},{alpha})"),
            Family::Exponential { beta } => format!("exp({beta})"),
            Family::Eyring => "eyring".into(),
            Family::LinfCap { cap } => format!("linf({cap})"),
            Family::Tabulated { .. } => "tabulated".into(),
            Family::Conjugate(inner) => format!("conj({})", inner.label()),
        }
    }

    /// `A(s)`; `+inf` is a legitimate value.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain(format!("Young function evaluated at {s}")));
        }
        Ok(self.value(s))
    }

    /// `A(s)` for `s >= 0`, no argument checking.
    pub fn value(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        if s == f64::INFINITY {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Power { p, coef } => coef * s.powf(*p),
            Family::Zygmund { p, alpha } => {
                let l = s.ln_1p();
                if *alpha == 0.0 {
                    s.powf(*p)
                } else {
                    s.powf(*p) * l.powf(*alpha)
                }
            }
            Family::Exponential { beta } => {
                let c = exp_shift(*beta);
                let cb = c.powf(*beta);
                let e = (s + c).powf(*beta) - cb;
                cb.exp() * e.exp_m1()
            }
            Family::Eyring => {
                let root = (1.0 + s * s).sqrt();
                s * s.asinh() - s * s / (root + 1.0)
            }
            Family::LinfCap { cap } => {
                if s <= *cap {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Family::Tabulated { knots, density, cumulative } => tabulated_value(knots, density, cumulative, s),
            Family::Conjugate(inner) => {
                let r = inner.density_inverse(s);
                if r == f64::INFINITY {
                    return f64::INFINITY;
                }
                if r == 0.0 {
                    return 0.0;
                }
                let v = s * r - inner.value(r);
                v.max(0.0)
            }
        }
    }

    /// `ln A(s)`, finite where the direct value would overflow.
    pub fn ln_value(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { p, coef } => coef.ln() + p * s.ln(),
            Family::Zygmund { p, alpha } => p * s.ln() + alpha * s.ln_1p().ln(),
            Family::Exponential { beta } => {
                let c = exp_shift(*beta);
                let cb = c.powf(*beta);
                let e = (s + c).powf(*beta) - cb;
                if e > 30.0 {
                    cb + e + (-(-e).exp()).ln_1p()
                } else {
                    cb + e.exp_m1().ln()
                }
            }
            _ => self.value(s).ln(),
        }
    }

    /// Left-continuous density `a` with `A(s) = int_0^s a`.
    pub fn density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return match &self.family {
                Family::Power { p, coef } if *p == 1.0 => *coef,
                Family::Exponential { beta } => {
                    let c = exp_shift(*beta);
                    if *beta >= 1.0 {
                        if *beta == 1.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        beta * c.powf(beta - 1.0) * c.powf(*beta).exp()
                    }
                }
                Family::Zygmund { p, alpha } if *p == 1.0 && *alpha == 0.0 => 1.0,
                _ => 0.0,
            };
        }
        match &self.family {
            Family::Power { p, coef } => coef * p * r.powf(p - 1.0),
            Family::Zygmund { p, alpha } => {
                let l = r.ln_1p();
                if *alpha == 0.0 {
                    p * r.powf(p - 1.0)
                } else {
                    p * r.powf(p - 1.0) * l.powf(*alpha) + alpha * r.powf(*p) * l.powf(alpha - 1.0) / (1.0 + r)
                }
            }
            Family::Exponential { beta } => {
                let c = exp_shift(*beta);
                let x = r + c;
                beta * x.powf(beta - 1.0) * x.powf(*beta).exp()
            }
            Family::Eyring => r.asinh(),
            Family::LinfCap { cap } => {
                if r <= *cap {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Family::Tabulated { knots, density, .. } => tabulated_density(knots, density, r),
            Family::Conjugate(inner) => inner.density_inverse(r),
        }
    }

    /// Left-continuous generalized inverse of the density,
    /// `inf { r >= 0 : a(r) >= s }`.
    pub fn density_inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p, coef } => {
                if *p == 1.0 {
                    if s <= *coef {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (s / (coef * p)).powf(1.0 / (p - 1.0))
                }
            }
            Family::Eyring => s.sinh(),
            Family::LinfCap { cap } => *cap,
            _ => least_true(|r| self.density(r) >= s),
        }
    }

    /// Generalized inverse `sup { s >= 0 : A(s) <= r }`.
    pub fn inverse(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("inverse evaluated at {r}")));
        }
        Ok(self.inverse_unchecked(r))
    }

    pub(crate) fn inverse_unchecked(&self, r: f64) -> f64 {
        if r == f64::INFINITY {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Power { p, coef } => (r / coef).powf(1.0 / p),
            Family::LinfCap { cap } => *cap,
            _ => least_true(|s| self.value(s) > r),
        }
    }

    /// `inf { s >= 0 : A(s) >= r }`.
    pub fn least_argument(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { p, coef } => (r / coef).powf(1.0 / p),
            Family::LinfCap { cap } => *cap,
            _ => least_true(|s| self.value(s) >= r),
        }
    }

    /// Legendre conjugate `sup_r (s r - A(r))`.
    pub fn conjugate(&self) -> YoungFunction {
        let family = match &self.family {
            Family::Power { p, coef } if *p == 1.0 => Family::LinfCap { cap: *coef },
            Family::Power { p, coef } => {
                let q = p / (p - 1.0);
                Family::Power { p: q, coef: (p - 1.0) * coef * (coef * p).powf(-q) }
            }
            Family::LinfCap { cap } => Family::Power { p: 1.0, coef: *cap },
            Family::Conjugate(inner) if !matches!(inner.family, Family::Tabulated { .. }) => {
                return (**inner).clone().with_grid(self.grid);
            }
            _ => Family::Conjugate(Arc::new(self.clone())),
        };
        YoungFunction { family, grid: self.grid }
    }

    /// Copy with the density sampled on `grid`; cheap to evaluate when the
    /// original needs a root search per value.
    pub fn tabulate(&self, grid: Grid) -> Result<YoungFunction> {
        let dens: Vec<f64> = grid.samples().iter().map(|r| self.density(*r)).collect();
        if dens.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidYoung(format!("{} has an infinite density on the grid", self.label())));
        }
        YoungFunction::tabulated(grid, dens)
    }

    /// Lazily evaluated conjugate, even when a closed form exists.
    pub fn conjugate_numeric(&self) -> YoungFunction {
        YoungFunction { family: Family::Conjugate(Arc::new(self.clone())), grid: self.grid }
    }

    /// Whether `A` takes the value `+inf` somewhere.
    pub fn is_degenerate(&self) -> bool {
        match &self.family {
            Family::LinfCap { .. } => true,
            Family::Conjugate(inner) => inner.density_bounded(),
            _ => false,
        }
    }

    fn density_bounded(&self) -> bool {
        match &self.family {
            Family::Power { p, .. } => *p == 1.0,
            Family::Zygmund { p, alpha } => *p == 1.0 && *alpha == 0.0,
            Family::Tabulated { .. } => true,
            Family::Conjugate(inner) => inner.is_degenerate(),
            _ => false,
        }
    }
}

/// Shift `c` for which `exp((t + c)^beta)` is convex on `[0, inf)`.
pub(crate) fn exp_shift(beta: f64) -> f64 {
    if beta < 1.0 {
        ((1.0 - beta) / beta).powf(1.0 / beta)
    } else {
        0.0
    }
}

/// `inf { x >= 0 : pred(x) }` for a monotone predicate, by bisection on the
/// log axis. Returns `+inf` if the predicate never holds below `1e300`.
pub(crate) fn least_true<P: Fn(f64) -> bool>(pred: P) -> f64 {
    const TINY: f64 = 1e-300;
    const HUGE: f64 = 1e300;
    if pred(TINY) {
        return 0.0;
    }
    let (mut lo, mut hi);
    if pred(1.0) {
        hi = 1.0;
        lo = 1e-3;
        while pred(lo) {
            hi = lo;
            lo *= 1e-3;
            if lo < TINY {
                lo = TINY;
                break;
            }
        }
    } else {
        lo = 1.0;
        hi = 1e3;
        while !pred(hi) {
            lo = hi;
            hi *= 1e3;
            if hi > HUGE {
                return f64::INFINITY;
            }
        }
    }
    while hi / lo - 1.0 > 1e-14 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn head_exponent(knots: &[f64], density: &[f64]) -> f64 {
    if knots.len() >= 2 && density[0] > 0.0 && density[1] > 0.0 {
        ((density[1] / density[0]).ln() / (knots[1] / knots[0]).ln()).max(0.0)
    } else {
        0.0
    }
}

fn head_integral(knots: &[f64], density: &[f64], s: f64) -> f64 {
    let k = head_exponent(knots, density);
    density[0] * s.powf(k + 1.0) / ((k + 1.0) * knots[0].powf(k))
}

fn tabulated_density(knots: &[f64], density: &[f64], r: f64) -> f64 {
    let n = knots.len();
    if r <= knots[0] {
        let k = head_exponent(knots, density);
        return density[0] * (r / knots[0]).powf(k);
    }
    if r >= knots[n - 1] {
        return density[n - 1];
    }
    let i = knots.partition_point(|&k| k < r);
    let (a, b) = (knots[i - 1], knots[i]);
    let t = (r - a) / (b - a);
    density[i - 1] + t * (density[i] - density[i - 1])
}

fn tabulated_value(knots: &[f64], density: &[f64], cumulative: &[f64], s: f64) -> f64 {
    let n = knots.len();
    if s <= knots[0] {
        return head_integral(knots, density, s);
    }
    if s >= knots[n - 1] {
        return cumulative[n - 1] + (s - knots[n - 1]) * density[n - 1];
    }
    let i = knots.partition_point(|&k| k < s);
    let a = knots[i - 1];
    let ds = tabulated_density(knots, density, s);
    cumulative[i - 1] + 0.5 * (s - a) * (density[i - 1] + ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn analytic() -> Vec<YoungFunction> {
        vec![
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(1.5).unwrap(),
            YoungFunction::power(4.0).unwrap(),
            YoungFunction::zygmund(1.0, 1.0).unwrap(),
            YoungFunction::zygmund(1.0, 2.0).unwrap(),
            YoungFunction::zygmund(2.0, 1.0).unwrap(),
            YoungFunction::exponential(1.0).unwrap(),
            YoungFunction::exponential(0.5).unwrap(),
            YoungFunction::eyring(),
        ]
    }

    #[test]
    fn power_two_at_three_is_nine() {
        let a = YoungFunction::power(2.0).unwrap();
        assert_eq!(a.eval(3.0).unwrap(), 9.0);
    }

    #[test]
    fn negative_argument_is_domain_error() {
        let a = YoungFunction::power(2.0).unwrap();
        assert!(matches!(a.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(a.inverse(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_conjugates() {
        let a = YoungFunction::power(2.0).unwrap().conjugate();
        assert_relative_eq!(a.value(2.0), 1.0, max_relative = 1e-15);
        // p = 3: conjugate is (2/3) (s/3)^{3/2} * 3 / 3 ... direct Legendre sup
        let p3 = YoungFunction::power(3.0).unwrap();
        let c = p3.conjugate();
        for s in [0.1, 1.0, 7.0] {
            let brute = (1..200000).map(|k| k as f64 * 1e-4).map(|r| s * r - r.powi(3)).fold(0.0, f64::max);
            assert_relative_eq!(c.value(s), brute, max_relative = 1e-6);
        }
        let l1 = YoungFunction::power(1.0).unwrap().conjugate();
        assert_eq!(l1.value(1.0), 0.0);
        assert_eq!(l1.value(1.0 + 1e-9), f64::INFINITY);
    }

    #[test]
    fn eyring_conjugate_is_cosh_minus_one() {
        let c = YoungFunction::eyring().conjugate();
        for s in [1e-3, 0.5, 2.0, 10.0] {
            assert_relative_eq!(c.value(s), s.cosh() - 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn exponential_conjugate_closed_form() {
        // e^t - 1 has conjugate s ln s - s + 1 for s >= 1, zero below.
        let c = YoungFunction::exponential(1.0).unwrap().conjugate();
        assert_eq!(c.value(0.5), 0.0);
        for s in [1.5, 10.0, 1e4] {
            assert_relative_eq!(c.value(s), s * s.ln() - s + 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn conjugate_involution_on_grid() {
        let pts = log_space(1e-3, 1e2, 100);
        for a in analytic() {
            let cc = a.conjugate_numeric().conjugate_numeric();
            for &s in &pts {
                let (x, y) = (a.value(s), cc.value(s));
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-300), "{} at {s}: {x} vs {y}", a.label());
            }
        }
    }

    #[test]
    fn inverse_sandwich_on_grid() {
        let pts = log_space(1e-3, 1e3, 200);
        for a in analytic() {
            let c = a.conjugate();
            for &r in &pts {
                let prod = a.inverse(r).unwrap() * c.inverse(r).unwrap();
                assert!(prod >= r * (1.0 - 1e-9) && prod <= 2.0 * r * (1.0 + 1e-9), "{} r={r} prod={prod}", a.label());
            }
        }
    }

    #[test]
    fn density_matches_difference_quotient() {
        for a in analytic() {
            for s in [0.01, 0.3, 2.0, 9.0] {
                let h = 1e-6 * s;
                let fd = (a.value(s + h) - a.value(s - h)) / (2.0 * h);
                assert_relative_eq!(a.density(s), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn tabulated_power_two() {
        let grid = Grid::new(1e-3, 1e3, 601).unwrap();
        let dens: Vec<f64> = grid.samples().iter().map(|r| 2.0 * r).collect();
        let a = YoungFunction::tabulated(grid, dens).unwrap();
        for s in [1e-4, 0.5, 3.0, 500.0] {
            assert_relative_eq!(a.value(s), s * s, max_relative = 1e-12);
        }
        let c = a.conjugate();
        assert_relative_eq!(c.value(2.0), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn tabulated_rejects_decreasing_density() {
        let grid = Grid::new(1.0, 2.0, 3).unwrap();
        assert!(matches!(YoungFunction::tabulated(grid, vec![1.0, 0.5, 2.0]), Err(Error::InvalidYoung(_))));
    }

    #[test]
    fn ln_value_survives_overflow() {
        let a = YoungFunction::exponential(1.0).unwrap();
        assert_eq!(a.value(1000.0), f64::INFINITY);
        assert_relative_eq!(a.ln_value(1000.0), 1000.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn young_inequality(s in 1e-3f64..1e2, t in 1e-3f64..1e2, which in 0usize..9) {
            let a = &analytic()[which];
            let c = a.conjugate();
            let lhs = s * t;
            let rhs = a.value(s) + c.value(t);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-300);
        }

        #[test]
        fn homogeneity_bound(s in 1e-3f64..1e2, lam in 1.0f64..10.0, which in 0usize..9) {
            let a = &analytic()[which];
            prop_assert!(lam * a.value(s) <= a.value(lam * s) * (1.0 + 1e-12));
        }

        #[test]
        fn conjugate_is_nondecreasing(s in 1e-3f64..50.0, which in 0usize..9) {
            let c = analytic()[which].conjugate();
            prop_assert!(c.value(s) <= c.value(1.01 * s) * (1.0 + 1e-12) + 1e-300);
        }
    }
}
