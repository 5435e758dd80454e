//! Pressure recovery from the discrete momentum residual: exact for coarse
//! piecewise constants, quasi-optimal for a smooth pressure.

use std::f64::consts::PI;

use orlicz_core::fem::{exact_recovery, pressure_error_study, square_levels, Triangulation};
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let coarse = Triangulation::unit_square(0.5)?;
    let values: Vec<f64> = (0..coarse.triangles.len()).map(|t| if t % 3 == 0 { 2.0 } else { -1.0 }).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let values: Vec<f64> = values.iter().map(|v| v - mean).collect();
    println!("exact recovery error {:.2e}", exact_recovery(0.5, 0.125, &values)?);

    let pi = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
    let l2 = YoungFunction::power(2.0)?;
    let study = pressure_error_study(pi, &square_levels(&[0.25, 0.125, 0.0625])?, &l2, &l2)?;
    for r in &study.rows {
        println!("h {:.4} error {:.4e} best {:.4e} ratio {:.4} stability {:.4}", r.h, r.error, r.best, r.ratio, r.stability);
    }
    println!("ratio deviation {:.4}", study.ratio_deviation);
    Ok(())
}
