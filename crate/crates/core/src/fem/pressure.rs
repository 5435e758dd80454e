use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::space::{FESpacePair, PairLabel};
use crate::error::{Error, Result};
use crate::field::SampledField;

/// `A z = b` with `A_ij = int p_j div(phi_i)` and `b_i = int H : grad(phi_i)`.
#[derive(Debug, Clone)]
pub struct PressureSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub pair: PairLabel,
    /// Velocity stiffness matrix, needed by [`SolveMode::DualLeastSquares`].
    pub stiffness: Option<DMatrix<f64>>,
}

impl PressureSystem {
    pub fn new(space: &FESpacePair, b: DVector<f64>) -> Self {
        PressureSystem { a: space.divergence_matrix(), b, pair: space.label(), stiffness: Some(space.stiffness()) }
    }
}

pub fn assemble_pressure_system(h: &SampledField, space: &FESpacePair) -> Result<PressureSystem> {
    Ok(PressureSystem::new(space, space.load_elementwise(h)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Requires `b` orthogonal to the kernel of `A^T`.
    Exact,
    /// Projects `b` onto the range of `A` first.
    LeastSquares,
    /// Least squares in the dual velocity norm `|r|_{K^{-1}}`; the pressure
    /// of the discrete Stokes problem with load `b`.
    DualLeastSquares,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressureSolution {
    pub coefficients: Vec<f64>,
    /// `||b - A z|| / ||b||`, in the dual norm for [`SolveMode::DualLeastSquares`].
    pub residual: f64,
    /// `sigma_min / sigma_max` of `A`.
    pub conditioning: f64,
    pub mode: SolveMode,
}

/// Relative singular-value threshold below which `A` counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub fn reconstruct_pressure(system: &PressureSystem, mode: SolveMode) -> Result<PressureSolution> {
    if system.a.nrows() != system.b.len() {
        return Err(Error::Precondition(format!("matrix has {} rows, load has {}", system.a.nrows(), system.b.len())));
    }
    let weighted;
    let (a, b) = if mode == SolveMode::DualLeastSquares {
        let k = system.stiffness.clone().ok_or_else(|| Error::Precondition("dual least squares needs the stiffness matrix".into()))?;
        let l = nalgebra::Cholesky::new(k).ok_or_else(|| Error::Decomposition("stiffness matrix is not positive definite".into()))?;
        let l = l.l();
        weighted = (
            l.solve_lower_triangular(&system.a).expect("triangular factor is invertible"),
            l.solve_lower_triangular(&system.b).expect("triangular factor is invertible"),
        );
        (&weighted.0, &weighted.1)
    } else {
        (&system.a, &system.b)
    };
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.resize(n, 0.0);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if a.nrows() < n || ratio <= RANK_TOLERANCE {
        return Err(Error::RankDeficient { pair: system.pair.to_string(), ratio });
    }
    let z = svd.solve(b, 0.0).map_err(|e| Error::Decomposition(e.to_string()))?;
    let r = b - a * &z;
    let bn = b.norm();
    let residual = if bn > 0.0 { r.norm() / bn } else { r.norm() };
    if mode == SolveMode::Exact && residual > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "load is not orthogonal to the kernel of A^T (relative residual {residual:.3e}); use least squares"
        )));
    }
    Ok(PressureSolution { coefficients: z.iter().copied().collect(), residual, conditioning: ratio, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::Triangulation;
    use crate::field::Values;

    #[test]
    fn zero_load_gives_zero_pressure() {
        let v = FESpacePair::new(Triangulation::unit_square(0.25).unwrap(), 2).unwrap();
        let h = SampledField::new(v.element_cells(), Values::Matrix(vec![[[0.0; 2]; 2]; v.elements()])).unwrap();
        let sys = assemble_pressure_system(&h, &v).unwrap();
        assert_eq!(sys.b.amax(), 0.0);
        let z = reconstruct_pressure(&sys, SolveMode::Exact).unwrap();
        assert!(z.coefficients.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn p1_p0_is_rank_deficient() {
        let v = FESpacePair::new(Triangulation::unit_square(0.25).unwrap(), 1).unwrap();
        let sys = PressureSystem::new(&v, DVector::zeros(v.velocity_dofs()));
        match reconstruct_pressure(&sys, SolveMode::LeastSquares) {
            Err(Error::RankDeficient { pair, .. }) => assert_eq!(pair, "P1/P0"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn p2_p0_has_full_column_rank() {
        for h in [0.25, 0.125] {
            let v = FESpacePair::new(Triangulation::unit_square(h).unwrap(), 2).unwrap();
            let sys = PressureSystem::new(&v, DVector::zeros(v.velocity_dofs()));
            let s = reconstruct_pressure(&sys, SolveMode::Exact).unwrap();
            assert!(s.conditioning > 1e-3, "{}", s.conditioning);
        }
    }
}
