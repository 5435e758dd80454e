//! Discrete inf-sup constants of P2/P0 on refined unit-square meshes, in L2
//! and in an Orlicz pair.

use std::time::Instant;

use orlicz_core::fem::{compute_infsup, l2_infsup, l2_infsup_oracle, FESpacePair, Triangulation};
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let a = YoungFunction::zygmund(1.0, 1.0)?;
    let b = YoungFunction::zygmund(1.0, 0.0)?;
    for side in [0.25, 0.125] {
        let space = FESpacePair::new(Triangulation::unit_square(side)?, 2)?;
        let t = Instant::now();
        let r = compute_infsup(&space, &a, &b)?;
        println!(
            "side {side}: L2 {:.6} (oracle {:.6})  {}/{} {:.4} converged {} in {:.1}s",
            l2_infsup(&space)?,
            l2_infsup_oracle(&space)?,
            a.label(),
            b.label(),
            r.value,
            r.converged,
            t.elapsed().as_secs_f64()
        );
    }
    let p1 = FESpacePair::new(Triangulation::unit_square(0.25)?, 1)?;
    println!("P1/P0: {:?}", l2_infsup(&p1).map_err(|e| e.to_string()));
    Ok(())
}
