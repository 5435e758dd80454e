use serde::{Deserialize, Serialize};

use super::infsup::{compute_infsup, l2_infsup_oracle, InfSupReport};
use super::mesh::Triangulation;
use super::pressure::{reconstruct_pressure, PressureSystem, SolveMode};
use super::projection::{check_orlicz_projection_stability, local_stability, BubbleTrigField, Projection};
use super::space::FESpacePair;
use crate::error::{Error, Result};
use crate::norms::{luxemburg, modular};
use crate::quadrature::TriangleRule;
use crate::young::YoungFunction;

/// Largest relative deviation from the mean.
pub fn band_deviation(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).abs() / mean.abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfSupRow {
    pub h: f64,
    pub elements: usize,
    pub velocity_dofs: usize,
    pub report: InfSupReport,
    /// Singular-value oracle (quadratic pairs only).
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfSupStudy {
    pub pair: String,
    pub rows: Vec<InfSupRow>,
    pub deviation: f64,
    pub min_value: f64,
}

/// Structured unit-square meshes of the given sides.
pub fn square_levels(hs: &[f64]) -> Result<Vec<Triangulation>> {
    hs.iter().map(|&h| Triangulation::unit_square(h)).collect()
}

pub fn infsup_study(meshes: &[Triangulation], degree: usize, a: &YoungFunction, b: &YoungFunction, with_oracle: bool) -> Result<InfSupStudy> {
    let mut rows = Vec::with_capacity(meshes.len());
    let mut label = String::new();
    for mesh in meshes {
        let space = FESpacePair::new(mesh.clone(), degree)?;
        label = space.label().to_string();
        let report = compute_infsup(&space, a, b)?;
        let oracle = if with_oracle { Some(l2_infsup_oracle(&space)?) } else { None };
        rows.push(InfSupRow { h: space.mesh.h, elements: space.elements(), velocity_dofs: space.velocity_dofs(), report, oracle });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.report.value).collect();
    Ok(InfSupStudy {
        pair: label,
        deviation: band_deviation(&values),
        min_value: values.iter().cloned().fold(f64::INFINITY, f64::min),
        rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub h: f64,
    pub young: String,
    /// Largest `||grad Pu||_A / ||grad u||_A` over the sample fields.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionStudy {
    pub rows: Vec<ProjectionRow>,
    /// Largest local stability ratio per mesh level.
    pub local: Vec<f64>,
    /// Largest elementwise divergence defect.
    pub divergence_defect: f64,
    pub max_ratio: f64,
}

/// Projection checks on unit-square meshes, where the sample fields vanish
/// on the boundary.
pub fn projection_study(meshes: &[Triangulation], youngs: &[YoungFunction], fields: &[BubbleTrigField]) -> Result<ProjectionStudy> {
    let mut rows = Vec::new();
    let mut local = Vec::new();
    let mut defect = 0.0f64;
    for mesh in meshes {
        let square = mesh.vertices.iter().all(|v| (0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[1])) && (mesh.measure() - 1.0).abs() < 1e-12;
        if !square {
            return Err(Error::Precondition("projection checks run on the unit square".into()));
        }
        let space = FESpacePair::new(mesh.clone(), 2)?;
        let proj = Projection::new(&space)?;
        local.push(fields.iter().map(|u| local_stability(&proj, u)).fold(0.0, f64::max));
        defect = fields.iter().map(|u| super::projection::divergence_defect(&proj, u)).fold(defect, f64::max);
        for a in youngs {
            let ratio = fields.iter().map(|u| check_orlicz_projection_stability(&proj, u, a)).fold(0.0, f64::max);
            rows.push(ProjectionRow { h: space.mesh.h, young: a.label(), ratio });
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ProjectionStudy { rows, local, divergence_defect: defect, max_ratio })
}

/// Element-wise integration data for a smooth scalar function.
struct Samples {
    /// `(element, weight, value)`.
    points: Vec<(usize, f64, f64)>,
}

impl Samples {
    fn new<F: Fn([f64; 2]) -> f64>(space: &FESpacePair, f: &F) -> Self {
        let rule = TriangleRule::collapsed(5);
        let mut points = Vec::new();
        for t in 0..space.elements() {
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                points.push((t, w * space.areas()[t], f(space.mesh.point(t, *p))));
            }
        }
        Samples { points }
    }

    fn distance(&self, mu: &[f64], a: &YoungFunction) -> f64 {
        let pairs: Vec<(f64, f64)> = self.points.iter().map(|(t, w, v)| (*w, (mu[*t] - v).abs())).collect();
        luxemburg(&pairs, a)
    }
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// `inf_mu ||mu - f||_A` over mean-free piecewise constants: the element
/// means, then per-element minimisation of the modular at the current norm.
fn best_approximation(space: &FESpacePair, s: &Samples, a: &YoungFunction) -> f64 {
    let n = space.elements();
    let mut mean = vec![0.0; n];
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for (t, w, v) in &s.points {
        mean[*t] += w * v / space.areas()[*t];
        bounds[*t] = (bounds[*t].0.min(*v), bounds[*t].1.max(*v));
    }
    let mut best = s.distance(&mean, a);
    let mut mu = mean.clone();
    for _ in 0..3 {
        let lambda = s.distance(&mu, a);
        let mut next = mu.clone();
        for t in 0..n {
            let local: Vec<(f64, f64)> = s.points.iter().filter(|p| p.0 == t).map(|p| (p.1, p.2)).collect();
            let cost = |c: f64| {
                let pairs: Vec<(f64, f64)> = local.iter().map(|(w, v)| (*w, (c - v).abs())).collect();
                modular(&pairs, a, lambda)
            };
            next[t] = golden(cost, bounds[t].0, bounds[t].1, 40);
        }
        let omega: f64 = space.areas().iter().sum();
        let shift: f64 = next.iter().zip(space.areas()).map(|(m, s)| m * s).sum::<f64>() / omega;
        next.iter_mut().for_each(|m| *m -= shift);
        let d = s.distance(&next, a);
        if d < best {
            best = d;
            mu = next;
        } else {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressureRow {
    pub h: f64,
    /// `||pi_h - pi||_B`
    pub error: f64,
    /// `inf_mu ||mu - pi||_A`
    pub best: f64,
    pub ratio: f64,
    /// `||pi_h||_B / ||H||_A`
    pub stability: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressureStudy {
    pub rows: Vec<PressureRow>,
    pub ratio_deviation: f64,
    pub stability_deviation: f64,
}

/// Pressure recovery for `H = pi I` with a smooth `pi` (its mean removed),
/// dual least-squares mode.
pub fn pressure_error_study<F: Fn([f64; 2]) -> f64>(pi: F, meshes: &[Triangulation], a: &YoungFunction, b: &YoungFunction) -> Result<PressureStudy> {
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let space = FESpacePair::new(mesh.clone(), 2)?;
        let raw = Samples::new(&space, &pi);
        let mean = raw.points.iter().map(|(_, w, v)| w * v).sum::<f64>() / space.mesh.measure();
        let pi = |x: [f64; 2]| pi(x) - mean;
        let load = space.load_function(|x| {
            let v = pi(x);
            [[v, 0.0], [0.0, v]]
        });
        let sol = reconstruct_pressure(&PressureSystem::new(&space, load), SolveMode::DualLeastSquares)?;
        let values = space.pressure_values(&nalgebra::DVector::from_vec(sol.coefficients.clone()));
        let samples = Samples::new(&space, &pi);
        let error = samples.distance(&values, b);
        let best = best_approximation(&space, &samples, a);
        if best <= 0.0 {
            return Err(Error::Precondition("pressure lies in the discrete space; the ratio is undefined".into()));
        }
        let h_norm = {
            let pairs: Vec<(f64, f64)> = samples.points.iter().map(|(_, w, v)| (*w, std::f64::consts::SQRT_2 * v.abs())).collect();
            luxemburg(&pairs, a)
        };
        let ph = {
            let pairs: Vec<(f64, f64)> = values.iter().zip(space.areas()).map(|(v, s)| (*s, v.abs())).collect();
            luxemburg(&pairs, b)
        };
        rows.push(PressureRow { h: space.mesh.h, error, best, ratio: error / best, stability: ph / h_norm, residual: sol.residual });
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let stab: Vec<f64> = rows.iter().map(|r| r.stability).collect();
    Ok(PressureStudy { ratio_deviation: band_deviation(&ratios), stability_deviation: band_deviation(&stab), rows })
}

/// Recover a mean-free piecewise constant defined on the coarse mesh of side
/// `coarse` on the finer mesh of side `fine`, exact mode; returns the largest
/// coefficient error.
pub fn exact_recovery(coarse: f64, fine: f64, values: &[f64]) -> Result<f64> {
    let cmesh = Triangulation::unit_square(coarse)?;
    if values.len() != cmesh.triangles.len() {
        return Err(Error::Precondition(format!("{} values for {} coarse elements", values.len(), cmesh.triangles.len())));
    }
    let space = FESpacePair::new(Triangulation::unit_square(fine)?, 2)?;
    let fine_values: Vec<f64> = (0..space.elements())
        .map(|t| {
            let c = cmesh.locate(space.mesh.centroid(t)).expect("fine centroid lies in the coarse mesh");
            values[c]
        })
        .collect();
    let z = space.pressure_coefficients(&fine_values)?;
    let load = space.load_elementwise(&crate::field::SampledField::new(
        space.element_cells(),
        crate::field::Values::Matrix(fine_values.iter().map(|v| [[*v, 0.0], [0.0, *v]]).collect()),
    )?)?;
    let sol = reconstruct_pressure(&PressureSystem::new(&space, load), SolveMode::Exact)?;
    Ok(sol.coefficients.iter().zip(z.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn coarse_pressures_are_recovered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mesh = Triangulation::unit_square(0.25).unwrap();
        let mut v: Vec<f64> = (0..mesh.triangles.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        for fine in [0.25, 0.125, 0.0625] {
            assert!(exact_recovery(0.25, fine, &v).unwrap() < 1e-10);
        }
    }

    #[test]
    fn smooth_pressure_error_decreases() {
        let s2 = YoungFunction::power(2.0).unwrap();
        let pi = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
        let study = pressure_error_study(pi, &square_levels(&[0.25, 0.125]).unwrap(), &s2, &s2).unwrap();
        assert!(study.rows[1].error < 0.7 * study.rows[0].error);
    }
}
