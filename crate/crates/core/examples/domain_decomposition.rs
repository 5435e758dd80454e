//! Splitting a mean-free density on an L-shaped domain into pieces carried
//! by two overlapping rectangles.

use orlicz_core::bogovskii::{DomainDecomposition, StarDomain};
use orlicz_core::grid::{CartesianGrid, MaskedGrid};
use orlicz_core::norms::luxemburg_norm;
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 2.0, 2.0], 64)?, |p| p[0] < 1.0 || p[1] < 1.0)?;
    let dec = DomainDecomposition::new(vec![StarDomain::rectangle(0.0, 0.0, 2.0, 1.0)?, StarDomain::rectangle(0.0, 0.0, 1.0, 2.0)?], &grid)?;
    println!("measures {:?}", dec.report);
    let f = grid.scalar_field(grid.sample(|p| p[0] * p[0] - p[1]))?.mean_free()?;
    let parts = dec.split(&f)?;
    let a = YoungFunction::zygmund(1.0, 1.0)?;
    let nf = luxemburg_norm(&f, &a);
    for (i, (p, b)) in parts.iter().zip(&dec.report.bounds).enumerate() {
        println!("piece {i}: mean {:.1e}  norm ratio {:.4}  bound {:.2}", p.mean()?, luxemburg_norm(p, &a) / nf, b);
    }
    Ok(())
}
