use serde::{Deserialize, Serialize};

use super::YoungFunction;

/// Outcome of a growth test sampled on the function's grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    Global { constant: f64 },
    NearInfinity { constant: f64, s0: f64 },
    Fails,
}

impl GrowthClass {
    pub fn holds(&self) -> bool {
        !matches!(self, GrowthClass::Fails)
    }

    pub fn is_global(&self) -> bool {
        matches!(self, GrowthClass::Global { .. })
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            GrowthClass::Global { constant } | GrowthClass::NearInfinity { constant, .. } => Some(*constant),
            GrowthClass::Fails => None,
        }
    }
}

const STABLE: f64 = 1.01;
const TAIL_SLACK: f64 = 10.0;

fn sup(q: &[f64]) -> f64 {
    q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Classifies a sampled profile `q(s)` on an increasing grid `s`.
///
/// A profile is bounded near infinity when its running sup gains less than
/// 1% across the top two decades; it is bounded globally when the same holds
/// at the bottom two decades and every sample is finite.
pub(crate) fn classify_profile(s: &[f64], q: &[f64]) -> GrowthClass {
    let n = s.len();
    if n < 2 {
        return GrowthClass::Fails;
    }
    let top = s[n - 1] / 100.0;
    let bottom = s[0] * 100.0;
    let first_top = s.partition_point(|&x| x < top);
    if first_top == 0 || q[first_top..].iter().any(|v| !v.is_finite()) {
        return GrowthClass::Fails;
    }
    // finite tail [start, n)
    let mut start = n;
    while start > 0 && q[start - 1].is_finite() {
        start -= 1;
    }
    if start >= first_top {
        return GrowthClass::Fails;
    }
    let before_top = sup(&q[start..first_top]);
    let all_tail = sup(&q[start..]);
    if all_tail > STABLE * before_top {
        return GrowthClass::Fails;
    }
    let last_bottom = s.partition_point(|&x| x <= bottom);
    if start == 0 && last_bottom < n {
        let above = sup(&q[last_bottom..]);
        if all_tail <= STABLE * above {
            return GrowthClass::Global { constant: all_tail };
        }
    }
    let top_sup = sup(&q[first_top..]);
    let mut k = first_top;
    while k > start && sup(&q[k - 1..]) <= TAIL_SLACK * top_sup {
        k -= 1;
    }
    GrowthClass::NearInfinity { constant: sup(&q[k..]), s0: s[k] }
}

fn doubling_ratio(a: &YoungFunction, s: f64) -> f64 {
    let (x, y) = (a.value(s), a.value(2.0 * s));
    if x == 0.0 {
        return if y == 0.0 { 1.0 } else { f64::INFINITY };
    }
    if x.is_finite() && y.is_finite() {
        y / x
    } else if a.is_degenerate() {
        if x.is_infinite() {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        (a.ln_value(2.0 * s) - a.ln_value(s)).exp()
    }
}

fn doubling_grid(a: &YoungFunction) -> Vec<f64> {
    let g = a.grid();
    g.samples().into_iter().filter(|&s| 2.0 * s <= g.max * (1.0 + 1e-12)).collect()
}

/// `A(2s) <= C A(s)`: globally, near infinity, or not at all.
pub fn classify_delta2(a: &YoungFunction) -> GrowthClass {
    let s = doubling_grid(a);
    let q: Vec<f64> = s
        .iter()
        .map(|&x| {
            let r = doubling_ratio(a, x);
            if r.is_nan() {
                f64::INFINITY
            } else {
                r
            }
        })
        .collect();
    classify_profile(&s, &q)
}

/// `A(2s) >= C A(s)` with `C > 2`; the reported constant is the best `C`.
pub fn classify_nabla2(a: &YoungFunction) -> GrowthClass {
    let s = doubling_grid(a);
    let q: Vec<f64> = s
        .iter()
        .map(|&x| {
            let r = doubling_ratio(a, x);
            if r.is_nan() {
                0.0
            } else if r - 2.0 > 1e-12 {
                1.0 / (r - 2.0)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    match classify_profile(&s, &q) {
        GrowthClass::Global { constant } => GrowthClass::Global { constant: 2.0 + 1.0 / constant },
        GrowthClass::NearInfinity { constant, s0 } => GrowthClass::NearInfinity { constant: 2.0 + 1.0 / constant, s0 },
        GrowthClass::Fails => GrowthClass::Fails,
    }
}

/// Whether `B(s) <= A(C s)`, with the least such `C`.
pub fn dominates(a: &YoungFunction, b: &YoungFunction) -> GrowthClass {
    let s = a.grid().samples();
    let q: Vec<f64> = s
        .iter()
        .map(|&x| {
            let bx = b.value(x);
            if bx.is_infinite() {
                if a.is_degenerate() {
                    a.least_argument(f64::MAX) / x
                } else {
                    f64::INFINITY
                }
            } else {
                a.least_argument(bx) / x
            }
        })
        .collect();
    classify_profile(&s, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn powers_are_delta2_and_nabla2() {
        for p in [1.5, 2.0, 4.0] {
            let a = YoungFunction::power(p).unwrap();
            match classify_delta2(&a) {
                GrowthClass::Global { constant } => assert_relative_eq!(constant, 2f64.powf(p), max_relative = 1e-12),
                other => panic!("{other:?}"),
            }
            match classify_nabla2(&a) {
                GrowthClass::Global { constant } => assert_relative_eq!(constant, 2f64.powf(p), max_relative = 1e-9),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zygmund_llogl_is_delta2_not_nabla2() {
        let a = YoungFunction::zygmund(1.0, 1.0).unwrap();
        assert!(classify_delta2(&a).holds());
        assert_eq!(classify_nabla2(&a), GrowthClass::Fails);
    }

    #[test]
    fn exponential_fails_delta2() {
        let a = YoungFunction::exponential(1.0).unwrap();
        assert_eq!(classify_delta2(&a), GrowthClass::Fails);
        assert!(classify_nabla2(&a).holds());
    }

    #[test]
    fn linear_fails_nabla2() {
        let a = YoungFunction::power(1.0).unwrap();
        assert_eq!(classify_nabla2(&a), GrowthClass::Fails);
    }

    #[test]
    fn self_domination_constant_is_one() {
        let a = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let c = dominates(&a, &a).constant().unwrap();
        assert_relative_eq!(c, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn power_domination_only_near_infinity() {
        let a = YoungFunction::power(3.0).unwrap();
        let b = YoungFunction::power(2.0).unwrap();
        assert!(matches!(dominates(&a, &b), GrowthClass::NearInfinity { .. }));
        assert_eq!(dominates(&b, &a), GrowthClass::Fails);
    }
}
