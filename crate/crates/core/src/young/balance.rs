use serde::{Deserialize, Serialize};

use super::{log_space, YoungFunction};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Least constants in the two balance conditions
///
/// `t int_0^t B(s)/s^2 ds <= A(c_11 t)` and `t int_0^t A~(s)/s^2 ds <= B~(c_12 t)`,
/// either for all `t` or for `t >= t0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    pub c_11: f64,
    pub c_12: f64,
    /// Zero when both conditions hold globally, `+inf` when no threshold works.
    pub t0: f64,
    pub admissible: bool,
    pub first: BalanceCondition,
    pub second: BalanceCondition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceCondition {
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    pub convergent_at_zero: bool,
}

const POINTS_PER_DECADE: f64 = 20.0;
const STABLE: f64 = 1.01;

/// Tests both balance conditions for the pair `(A, B)` over `t_range`
/// (default `[1e-4, 1e4]`).
pub fn check_balance(a: &YoungFunction, b: &YoungFunction, t_range: Option<(f64, f64)>) -> Result<BalanceReport> {
    let (t_min, t_max) = t_range.unwrap_or((1e-4, 1e4));
    if !(t_min > 0.0 && t_max > t_min * 1e4 && t_max.is_finite()) {
        return Err(Error::Domain(format!("balance range [{t_min}, {t_max}] must span at least four decades")));
    }
    let n = ((t_max / t_min).log10() * POINTS_PER_DECADE).round() as usize + 1;
    let ts = log_space(t_min, t_max, n);
    let a_conj = a.conjugate();
    let b_conj = b.conjugate();
    let first = Condition::new(a, b, &ts);
    let second = Condition::new(&b_conj, &a_conj, &ts);

    let g1 = first.curve(0.0);
    let g2 = second.curve(0.0);
    let s1 = first.convergent.then(|| global_sup(&ts, &g1)).flatten();
    let s2 = second.convergent.then(|| global_sup(&ts, &g2)).flatten();
    let mut report = BalanceReport {
        c_11: f64::INFINITY,
        c_12: f64::INFINITY,
        t0: f64::INFINITY,
        admissible: false,
        first: BalanceCondition { t: ts.clone(), c: g1.clone(), convergent_at_zero: first.convergent },
        second: BalanceCondition { t: ts.clone(), c: g2.clone(), convergent_at_zero: second.convergent },
    };
    if let (Some(c1), Some(c2)) = (s1, s2) {
        report.c_11 = c1;
        report.c_12 = c2;
        report.t0 = 0.0;
        report.admissible = true;
        return Ok(report);
    }
    let mut t0 = t_min * 100.0;
    while t0 <= t_max / 100.0 * (1.0 + 1e-9) {
        let k = ts.partition_point(|&t| t < t0 * (1.0 - 1e-12));
        let c1 = first.curve(t0);
        let c2 = second.curve(t0);
        let s1 = tail_sup(&ts[k..], &c1[k..]);
        let s2 = tail_sup(&ts[k..], &c2[k..]);
        if let (Some(x), Some(y)) = (s1, s2) {
            report.c_11 = x;
            report.c_12 = y;
            report.t0 = t0;
            report.admissible = true;
            report.first.c = c1;
            report.second.c = c2;
            return Ok(report);
        }
        t0 *= 10.0;
    }
    Ok(report)
}

fn global_sup(t: &[f64], c: &[f64]) -> Option<f64> {
    let s = tail_sup(t, c)?;
    let bottom = t[0] * 100.0;
    let k = t.partition_point(|&x| x <= bottom);
    let above = c[k..].iter().copied().fold(0.0, f64::max);
    (s <= STABLE * above.max(f64::MIN_POSITIVE)).then_some(s)
}

fn tail_sup(t: &[f64], c: &[f64]) -> Option<f64> {
    if c.iter().any(|v| !v.is_finite()) || t.len() < 2 {
        return None;
    }
    let top = t[t.len() - 1] / 100.0;
    let k = t.partition_point(|&x| x < top);
    if k == 0 {
        return None;
    }
    let before = c[..k].iter().copied().fold(0.0, f64::max);
    let all = c.iter().copied().fold(0.0, f64::max);
    (all <= STABLE * before || all == 0.0).then_some(all)
}

struct Condition<'a> {
    upper: &'a YoungFunction,
    integrand: &'a YoungFunction,
    ts: &'a [f64],
    convergent: bool,
    tail: f64,
}

impl<'a> Condition<'a> {
    fn new(upper: &'a YoungFunction, integrand: &'a YoungFunction, ts: &'a [f64]) -> Self {
        let r = ts[0];
        let br = integrand.value(r);
        let (convergent, tail) = if br == 0.0 {
            (true, 0.0)
        } else if !br.is_finite() {
            (false, f64::INFINITY)
        } else {
            let gamma = (integrand.value(2.0 * r) / br).log2();
            if gamma > 1.01 {
                (true, br / (r * (gamma - 1.0)))
            } else {
                (false, f64::INFINITY)
            }
        };
        Condition { upper, integrand, ts, convergent, tail }
    }

    /// `c(t)` on the grid, integrating from `0` when convergent and from `t0`
    /// otherwise. Points below `t0` get `0`.
    fn curve(&self, t0: f64) -> Vec<f64> {
        let from_zero = self.convergent;
        let mut acc = if from_zero { self.tail } else { 0.0 };
        let mut prev = self.ts[0];
        if !from_zero && t0 <= 0.0 {
            return vec![f64::INFINITY; self.ts.len()];
        }
        let mut out = Vec::with_capacity(self.ts.len());
        for &t in self.ts {
            if !from_zero && t < t0 * (1.0 - 1e-12) {
                out.push(0.0);
                prev = t;
                continue;
            }
            if !from_zero && prev < t0 {
                prev = t0.min(t);
            }
            acc += log_integral(self.integrand, prev, t);
            prev = t;
            let l = t * acc;
            if !l.is_finite() {
                let c = if self.upper.is_degenerate() { self.upper.least_argument(f64::MAX) / t } else { f64::INFINITY };
                out.push(c);
                continue;
            }
            out.push(self.upper.least_argument(l) / t);
        }
        out
    }
}

/// `int_a^b B(s)/s^2 ds` on the log axis.
fn log_integral(b: &YoungFunction, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (x, w) = gauss_legendre(8);
    let (la, lb) = (lo.ln(), hi.ln());
    let panels = ((lb - la) / 0.25).ceil().max(1.0) as usize;
    let step = (lb - la) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = la + (p as f64 + 0.5) * step;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + 0.5 * step * xi;
            let s = u.exp();
            total += 0.5 * step * wi * b.value(s) / s;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_pairs_match_closed_form() {
        for p in [1.5, 2.0, 4.0] {
            let a = YoungFunction::power(p).unwrap();
            let r = check_balance(&a, &a, None).unwrap();
            let expect = (p - 1.0f64).powf(-1.0 / p);
            assert!(r.admissible);
            assert_eq!(r.t0, 0.0);
            assert_relative_eq!(r.c_11, expect, max_relative = 1e-6);
            let q = p / (p - 1.0);
            assert_relative_eq!(r.c_12, (q - 1.0f64).powf(-1.0 / q), max_relative = 1e-6);
        }
    }

    #[test]
    fn linear_and_bounded_pairs_fail() {
        let l1 = YoungFunction::power(1.0).unwrap();
        assert!(!check_balance(&l1, &l1, None).unwrap().admissible);
        let linf = YoungFunction::linf(1.0).unwrap();
        assert!(!check_balance(&linf, &linf, None).unwrap().admissible);
    }

    #[test]
    fn zygmund_and_exponential_pairs_hold_near_infinity() {
        let pairs = [
            (YoungFunction::zygmund(1.0, 1.0).unwrap(), YoungFunction::zygmund(1.0, 0.0).unwrap()),
            (YoungFunction::zygmund(1.0, 2.0).unwrap(), YoungFunction::zygmund(1.0, 1.0).unwrap()),
            (YoungFunction::exponential(0.5).unwrap(), YoungFunction::exponential(1.0 / 3.0).unwrap()),
            (YoungFunction::exponential(1.0).unwrap(), YoungFunction::exponential(0.5).unwrap()),
        ];
        for (a, b) in pairs {
            let r = check_balance(&a, &b, None).unwrap();
            assert!(r.admissible, "{} {}: {:?} {:?}", a.label(), b.label(), r.c_11, r.c_12);
            assert!(r.t0 > 0.0 && r.c_11.is_finite() && r.c_12.is_finite());
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let a = YoungFunction::power(3.0).unwrap();
        let b = YoungFunction::power(2.5).unwrap();
        let r = check_balance(&a, &b, None).unwrap();
        let s = check_balance(&b.conjugate(), &a.conjugate(), None).unwrap();
        assert_relative_eq!(r.c_11, s.c_12, max_relative = 1e-9);
        assert_relative_eq!(r.c_12, s.c_11, max_relative = 1e-9);
    }
}
