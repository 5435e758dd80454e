//! Shear-thinning and shear-thickening stresses along a simple shear.

use orlicz_core::fem::{stress_eval, StressLaw};
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let laws = [
        ("power 1.5", StressLaw::power(1.0, 0.1, 1.5)?),
        ("power 3", StressLaw::power(1.0, 0.1, 3.0)?),
        ("eyring", StressLaw::eyring(1.0, 2.0)?),
        ("potential zygmund", StressLaw::potential(YoungFunction::zygmund(1.0, 1.0)?)),
    ];
    println!("{:>8} {}", "rate", laws.iter().map(|(n, _)| format!("{n:>18}")).collect::<String>());
    for g in [1e-3, 0.1, 1.0, 10.0, 100.0] {
        let xi = [[0.0, g / 2.0], [g / 2.0, 0.0]];
        let row: Vec<String> = laws.iter().map(|(_, l)| stress_eval(l, &xi).map(|s| format!("{:>18.6e}", s[0][1]))).collect::<Result<_, _>>()?;
        println!("{g:>8} {}", row.concat());
    }
    Ok(())
}
