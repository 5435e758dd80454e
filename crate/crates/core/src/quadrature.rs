//! Gauss rules on intervals and triangles.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Nodes and weights mapped to `[a, b]`.
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect()
}

/// Integral over `[a, b]` by composite Gauss-Legendre on `panels` equal panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let step = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * step;
        let mid = lo + 0.5 * step;
        for (xi, wi) in x.iter().zip(&w) {
            total += 0.5 * step * wi * f(mid + 0.5 * step * xi);
        }
    }
    total
}

/// Quadrature on the reference triangle with vertices (0,0), (1,0), (0,1).
///
/// Points are barycentric triples; weights sum to one (area-normalised).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed tensor rule, exact for polynomials of degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 0.5 * (xi + 1.0);
            for (xj, wj) in x.iter().zip(&w) {
                let v = 0.5 * (xj + 1.0);
                let s = u * (1.0 - v);
                let t = v;
                points.push([1.0 - s - t, s, t]);
                weights.push(0.25 * wi * wj * (1.0 - v) * 2.0);
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn triangle_rule_moments() {
        let rule = TriangleRule::collapsed(5);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        // int_T x^a y^b = a! b! / (a+b+2)!, normalised by area 1/2
        let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
        for a in 0..=4u32 {
            for b in 0..=(8 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                    .sum();
                let exact = 2.0 * fact(a) * fact(b) / fact(a + b + 2);
                assert_relative_eq!(q, exact, max_relative = 1e-12);
            }
        }
    }
}
