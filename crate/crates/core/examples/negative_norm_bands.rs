use std::time::Instant;

use orlicz_core::grid::{CartesianGrid, MaskedGrid};
use orlicz_core::negnorm::{corpus, two_sided_check, TestFamily, DIVERGENCE_CONSTANT};
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 1.0, 1.0], 64)?, |_| true)?;
    let inputs = corpus(&grid)?;
    let pairs = [
        (YoungFunction::power(2.0)?, YoungFunction::power(2.0)?),
        (YoungFunction::zygmund(1.0, 1.0)?, YoungFunction::zygmund(1.0, 0.0)?),
        (YoungFunction::exponential(1.0)?, YoungFunction::exponential(0.5)?),
    ];
    let depths = [2, 3, 4];
    let families: Vec<TestFamily> = depths.iter().map(|&d| TestFamily::bubbles(&grid, d)).collect::<Result<_, _>>()?;
    for (a, b) in &pairs {
        let t = Instant::now();
        println!("{} / {}", a.label(), b.label());
        for (name, u) in &inputs {
            let rs: Vec<_> = families.iter().map(|f| two_sided_check(u, a, b, f, DIVERGENCE_CONSTANT)).collect::<Result<_, _>>()?;
            let low: Vec<f64> = rs.iter().map(|r| r.r_low).collect();
            let high = rs.last().map(|r| r.r_high).unwrap_or(0.0);
            println!("  {name:12} r_low {low:.4?} spread {:.3} r_high {high:.4}", low[2] / low[0]);
        }
        println!("  {:.1}s", t.elapsed().as_secs_f64());
    }
    Ok(())
}
