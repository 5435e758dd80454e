//! Truncation and mollification of a smooth function, with the norms
//! converging as the cut-off shrinks.

use orlicz_core::grid::{CartesianGrid, MaskedGrid};
use orlicz_core::negnorm::sup_approx_convergence;
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 1.0, 1.0], 64)?, |_| true)?;
    let pi = std::f64::consts::PI;
    let inputs = [
        ("vanishing", grid.scalar_field(grid.sample(|p| 3.0 * (pi * p[0]).sin().powi(2) * (pi * p[1]).sin().powi(2)))?),
        ("boundary values", grid.scalar_field(grid.sample(|p| 1.0 + p[0] * (1.0 - p[1])))?),
    ];
    for ((name, v), a) in inputs.iter().flat_map(|i| [(i, YoungFunction::power(2.0)), (i, YoungFunction::zygmund(1.0, 1.0))]) {
        let a = a?;
        let r = sup_approx_convergence(v, &a, &grid, &[1, 2, 4, 8, 16, 32], Some(v))?;
        println!("{name}, {}: target {:.6}", a.label(), r.target_norm);
        for s in &r.steps {
            println!("  k={:3} truncated {:.6} mollified {:.6}", s.k, s.truncated_norm, s.mollified_norm);
        }
        println!("  final relative error {:.3e}", r.final_relative_error);
    }
    Ok(())
}
