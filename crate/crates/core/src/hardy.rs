//! Hardy averaging operator and its dual on step functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{luxemburg, StepFunction};
use crate::quadrature::gauss_legendre;
use crate::young::YoungFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyKind {
    /// `(1/s) int_0^s phi`
    Average,
    /// `int_s^L phi(r)/r dr`
    Dual,
}

/// A Hardy operator applied to a step function, evaluated in closed form.
#[derive(Debug, Clone)]
pub struct HardyImage {
    pub kind: HardyKind,
    pub input: StepFunction,
    /// Prefix integrals for the average, suffix sums for the dual.
    acc: Vec<f64>,
}

pub fn hardy(kind: HardyKind, phi: &StepFunction) -> HardyImage {
    let n = phi.values.len();
    let mut acc = vec![0.0; n + 1];
    match kind {
        HardyKind::Average => {
            for k in 0..n {
                acc[k + 1] = acc[k] + phi.values[k] * (phi.breaks[k + 1] - phi.breaks[k]);
            }
        }
        HardyKind::Dual => {
            for k in (0..n).rev() {
                let (a, b) = (phi.breaks[k], phi.breaks[k + 1]);
                let piece = if a > 0.0 { phi.values[k] * (b / a).ln() } else { 0.0 };
                acc[k] = acc[k + 1] + piece;
            }
        }
    }
    HardyImage { kind, input: phi.clone(), acc }
}

impl HardyImage {
    pub fn eval(&self, s: f64) -> f64 {
        let phi = &self.input;
        let len = phi.length();
        if s <= 0.0 {
            return match self.kind {
                HardyKind::Average => phi.values.first().copied().unwrap_or(0.0),
                HardyKind::Dual => f64::INFINITY,
            };
        }
        if s >= len {
            return match self.kind {
                HardyKind::Average => self.acc[phi.values.len()] / s,
                HardyKind::Dual => 0.0,
            };
        }
        let k = phi.breaks.partition_point(|&b| b <= s) - 1;
        match self.kind {
            HardyKind::Average => (self.acc[k] + phi.values[k] * (s - phi.breaks[k])) / s,
            HardyKind::Dual => phi.values[k] * (phi.breaks[k + 1] / s).ln() + self.acc[k + 1],
        }
    }

    /// `(weight, value)` quadrature samples over `(0, L)`.
    ///
    /// Each piece is split into geometric panels; the first piece of the dual
    /// image is integrated through `s = b e^{-x}` to absorb its logarithmic
    /// singularity.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(8);
        let phi = &self.input;
        let mut out = Vec::new();
        for k in 0..phi.values.len() {
            let (a, b) = (phi.breaks[k], phi.breaks[k + 1]);
            if b <= a {
                continue;
            }
            if a == 0.0 {
                if self.kind == HardyKind::Average {
                    out.push((b, phi.values[0]));
                    continue;
                }
                for p in 0..60 {
                    let (xa, xb) = (p as f64, p as f64 + 1.0);
                    for (xi, wi) in x.iter().zip(&w) {
                        let t = 0.5 * (xa + xb) + 0.5 * (xb - xa) * xi;
                        let s = b * (-t).exp();
                        out.push((0.5 * wi * s, self.eval(s)));
                    }
                }
                continue;
            }
            let panels = ((b / a).ln() / 0.5).ceil().max(1.0) as usize;
            let ratio = (b / a).powf(1.0 / panels as f64);
            let mut lo = a;
            for p in 0..panels {
                let hi = if p + 1 == panels { b } else { lo * ratio };
                for (xi, wi) in x.iter().zip(&w) {
                    let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
                    out.push((0.5 * (hi - lo) * wi, self.eval(s)));
                }
                lo = hi;
            }
        }
        out
    }

    pub fn luxemburg_norm(&self, a: &YoungFunction) -> f64 {
        luxemburg(&self.samples(), a)
    }
}

/// `C [ (1/s) int_0^s f* + int_s^L f*(r)/r dr ]` for `0 < s < L`.
pub fn rearrangement_bound_rhs(f_star: &StepFunction, s: f64, c: f64) -> Result<f64> {
    let len = f_star.length();
    if !(s > 0.0 && s < len) {
        return Err(Error::Domain(format!("s = {s} outside (0, {len})")));
    }
    Ok(c * (hardy(HardyKind::Average, f_star).eval(s) + hardy(HardyKind::Dual, f_star).eval(s)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RearrangementCheck {
    pub holds: bool,
    pub max_ratio: f64,
    pub points: Vec<RearrangementPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RearrangementPoint {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Compares `(|grad u|)*(s)` with `C [ (1/s) int_0^s f* + int_s^L f*(r)/r dr ]`
/// at `samples` log-spaced points in `(0, L)`.
pub fn rearrangement_estimate(
    grad_star: &StepFunction,
    f_star: &StepFunction,
    c: f64,
    samples: usize,
) -> Result<RearrangementCheck> {
    let len = f_star.length();
    if (grad_star.length() - len).abs() > 1e-9 * len {
        return Err(Error::Geometry("rearrangements live on intervals of different length".into()));
    }
    let avg = hardy(HardyKind::Average, f_star);
    let dual = hardy(HardyKind::Dual, f_star);
    let lo = len * 1e-4;
    let hi = len * (1.0 - 1e-3);
    let mut points = Vec::with_capacity(samples);
    let mut max_ratio: f64 = 0.0;
    for s in crate::young::log_space(lo, hi, samples) {
        let lhs = grad_star.eval(s);
        let rhs = avg.eval(s) + dual.eval(s);
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_ratio = max_ratio.max(ratio);
        points.push(RearrangementPoint { s, lhs, rhs: c * rhs });
    }
    Ok(RearrangementCheck { holds: max_ratio <= c, max_ratio, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn step(vals: &[f64], len: f64) -> StepFunction {
        let mut v = vals.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        let n = v.len();
        StepFunction { breaks: (0..=n).map(|k| len * k as f64 / n as f64).collect(), values: v }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let phi = step(&[3.0, 2.0, 0.5, 0.1], 2.0);
        let avg = hardy(HardyKind::Average, &phi);
        let dual = hardy(HardyKind::Dual, &phi);
        for s in [0.1, 0.7, 1.3, 1.9] {
            let direct = integrate(|r| phi.eval(r), 0.0, s, 8, 400) / s;
            assert_relative_eq!(avg.eval(s), direct, max_relative = 1e-3);
            let d = integrate(|r| phi.eval(r) / r, s, 2.0, 8, 4000);
            assert_relative_eq!(dual.eval(s), d, max_relative = 1e-3);
        }
    }

    #[test]
    fn half_indicator_average() {
        let phi = StepFunction { breaks: vec![0.0, 0.5, 1.0], values: vec![1.0, 0.0] };
        let avg = hardy(HardyKind::Average, &phi);
        assert_eq!(avg.eval(0.25), 1.0);
        assert_relative_eq!(avg.eval(0.8), 1.0 / 1.6, epsilon = 1e-15);
    }

    #[test]
    fn rhs_for_unit_function() {
        let one = StepFunction { breaks: vec![0.0, 1.0], values: vec![1.0] };
        assert_relative_eq!(rearrangement_bound_rhs(&one, 0.5, 1.0).unwrap(), 1.0 + 2f64.ln(), epsilon = 1e-15);
        assert!(rearrangement_bound_rhs(&one, 1.5, 1.0).is_err());
        let zero = StepFunction { breaks: vec![0.0, 1.0], values: vec![0.0] };
        assert_eq!(rearrangement_bound_rhs(&zero, 0.5, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn dense_grid_oracle_for_hardy_constant() {
        // (1/s) int_0^s of s^{-1/2 + eps} approaches the sharp constant 2 in L^2
        let n = 4000;
        let vals: Vec<f64> = (0..n).map(|k| ((k as f64 + 0.5) / n as f64).powf(-0.45)).collect();
        let phi = step(&vals, 1.0);
        let a = YoungFunction::power(2.0).unwrap();
        let ratio = hardy(HardyKind::Average, &phi).luxemburg_norm(&a) / luxemburg(&phi.pairs(), &a);
        assert!(ratio > 1.6 && ratio <= 2.0, "{ratio}");
    }

    #[test]
    fn samples_integrate_the_image() {
        let phi = step(&[1.0, 1.0, 1.0, 1.0], 1.0);
        // dual image of 1 on (0,1) is -ln s, whose integral is 1
        let d = hardy(HardyKind::Dual, &phi);
        let total: f64 = d.samples().iter().map(|(w, v)| w * v).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-10);
        // int (-ln s)^2 = 2
        let sq: f64 = d.samples().iter().map(|(w, v)| w * v * v).sum();
        assert_relative_eq!(sq, 2.0, max_relative = 1e-10);
    }

    proptest! {
        #[test]
        fn hardy_l2_bound(vals in proptest::collection::vec(0.0f64..10.0, 1..40)) {
            prop_assume!(vals.iter().any(|v| *v > 1e-3));
            let phi = step(&vals, 1.5);
            let a = YoungFunction::power(2.0).unwrap();
            let np = luxemburg(&phi.pairs(), &a);
            for kind in [HardyKind::Average, HardyKind::Dual] {
                let img = hardy(kind, &phi);
                let n = img.luxemburg_norm(&a);
                prop_assert!(n <= 2.01 * np, "{:?}: {} vs {}", kind, n, np);
            }
            let avg = hardy(HardyKind::Average, &phi);
            let s: Vec<f64> = (1..50).map(|k| 1.5 * k as f64 / 50.0).collect();
            prop_assert!(s.windows(2).all(|w| avg.eval(w[1]) <= avg.eval(w[0]) + 1e-12));
        }
    }
}
