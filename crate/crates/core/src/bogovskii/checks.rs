use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::BogovskiiField;
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::grid::{relative_l2, MaskedGrid};
use crate::hardy::{rearrangement_estimate, RearrangementCheck};
use crate::norms::{field_modular, luxemburg_norm, rearrangement};
use crate::young::YoungFunction;

/// Relative `L^2` residual of `div u - f`.
pub fn divergence_residual(field: &BogovskiiField, f: &SampledField) -> Result<f64> {
    let d = field.divergence.scalar_values()?;
    let fv = f.scalar_values()?;
    if d.len() != fv.len() {
        return Err(Error::Geometry("divergence and density differ in length".into()));
    }
    let target: Vec<f64> = fv.iter().map(|x| x - field.projected_mean).collect();
    Ok(relative_l2(d, &target))
}

/// `||grad u||_B / ||f||_A`.
pub fn gradient_constant(field: &BogovskiiField, f: &SampledField, a: &YoungFunction, b: &YoungFunction) -> f64 {
    luxemburg_norm(&field.gradient, b) / luxemburg_norm(f, a)
}

/// Least `C` with `int B(|grad u|) <= int A(C |f|)`, by bisection.
pub fn check_modular_bound(f: &SampledField, field: &BogovskiiField, a: &YoungFunction, b: &YoungFunction) -> f64 {
    let lhs = field_modular(&field.gradient, b, 1.0);
    if lhs == 0.0 {
        return 0.0;
    }
    let rhs = |c: f64| field_modular(f, a, 1.0 / c);
    if rhs(1e300) < lhs {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while rhs(hi) < lhs {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while rhs(lo) >= lhs && lo > 1e-300 {
        hi = lo;
        lo /= 2.0;
    }
    while hi / lo - 1.0 > 1e-12 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if rhs(mid) >= lhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest ratio `(|grad u|)*(s) / [Hardy terms of f*](s)` over the samples.
pub fn rearrangement_ratio(f: &SampledField, field: &BogovskiiField, samples: usize) -> Result<f64> {
    Ok(check_rearrangement_estimate(f, field, f64::INFINITY, samples)?.max_ratio)
}

pub fn check_rearrangement_estimate(f: &SampledField, field: &BogovskiiField, c: f64, samples: usize) -> Result<RearrangementCheck> {
    let g = rearrangement(&field.gradient);
    let fs = rearrangement(f);
    rearrangement_estimate(&g, &fs, c, samples)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryDecay {
    pub boundary_max: f64,
    pub interior_error: f64,
    pub exact_boundary_max: f64,
    pub holds: bool,
}

/// Compares `|u|` on boundary-adjacent cells with the discretisation error
/// measured against `exact` on interior cells.
pub fn boundary_decay<E: Fn([f64; 2]) -> [f64; 2]>(field: &BogovskiiField, grid: &MaskedGrid, exact: E) -> Result<BoundaryDecay> {
    let u = match field.velocity.values() {
        crate::field::Values::Vector(v) => v,
        _ => return Err(Error::Inconsistent("velocity must be a vector field".into())),
    };
    let boundary = grid.boundary_cells();
    let mut is_b = vec![false; grid.len()];
    for &k in &boundary {
        is_b[k] = true;
    }
    let cents = grid.centroids();
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let mut interior_error: f64 = 0.0;
    let mut boundary_max: f64 = 0.0;
    let mut exact_boundary_max: f64 = 0.0;
    for k in 0..grid.len() {
        let ex = exact(cents[k]);
        if is_b[k] {
            boundary_max = boundary_max.max(norm(u[k]));
            exact_boundary_max = exact_boundary_max.max(norm(ex));
        } else {
            interior_error = interior_error.max(norm([u[k][0] - ex[0], u[k][1] - ex[1]]));
        }
    }
    Ok(BoundaryDecay {
        boundary_max,
        interior_error,
        exact_boundary_max,
        holds: boundary_max <= 3.0 * (interior_error + exact_boundary_max),
    })
}

/// `|y| - 2/3` on the unit disk and the radial field `x (|x| - 1) / 3`
/// whose divergence it is.
pub fn disk_density(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1]) - 2.0 / 3.0
}

pub fn disk_exact(p: [f64; 2]) -> [f64; 2] {
    let r = p[0].hypot(p[1]);
    [p[0] * (r - 1.0) / 3.0, p[1] * (r - 1.0) / 3.0]
}

/// Smooth random densities: sums of cosine modes, mean-free on the grid.
pub fn random_densities(grid: &MaskedGrid, count: usize, seed: u64) -> Result<Vec<SampledField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let modes: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0..4) as f64,
                    rng.gen_range(0..4) as f64,
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let vals = grid.sample(|p| {
            modes
                .iter()
                .map(|&(a, m, n, ph)| a * (std::f64::consts::PI * (m * p[0] + n * p[1]) + ph).cos())
                .sum()
        });
        out.push(grid.scalar_field(vals)?.mean_free()?);
    }
    Ok(out)
}

/// `chi_E - |E|/|Omega|` for `E` the part of the grid inside `indicator`.
pub fn indicator_density<P: Fn([f64; 2]) -> bool>(grid: &MaskedGrid, indicator: P) -> Result<SampledField> {
    grid.scalar_field(grid.sample(|p| if indicator(p) { 1.0 } else { 0.0 }))?.mean_free()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn disk_density_has_zero_mean() {
        // polar oracle: int_0^1 (r - 2/3) r dr = 0
        let m = integrate(|r| (r - 2.0 / 3.0) * r, 0.0, 1.0, 8, 1);
        assert!(m.abs() < 1e-15);
    }

    #[test]
    fn exact_field_has_the_right_divergence() {
        let h = 1e-5;
        for p in [[0.3, 0.1], [-0.5, 0.4], [0.1, -0.8]] {
            let dx = (disk_exact([p[0] + h, p[1]])[0] - disk_exact([p[0] - h, p[1]])[0]) / (2.0 * h);
            let dy = (disk_exact([p[0], p[1] + h])[1] - disk_exact([p[0], p[1] - h])[1]) / (2.0 * h);
            assert!((dx + dy - disk_density(p)).abs() < 1e-8);
        }
    }
}
