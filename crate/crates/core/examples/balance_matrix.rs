//! Balance constants for a few standard pairs.

use orlicz_core::young::{check_balance, parse_young_pair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs = [
        "power:1.5:power:1.5",
        "power:2:power:2",
        "power:4:power:4",
        "power:3:power:2.5",
        "zygmund:1:1:zygmund:1:0",
        "zygmund:1:2:zygmund:1:1",
        "exp:1:exp:0.5",
        "exp:0.5:exp:0.33333333333",
        "eyring:eyring",
        "power:1:power:1",
        "linf:linf",
    ];
    println!("{:<32} {:>12} {:>12} {:>10} admissible", "pair", "c_11", "c_12", "t0");
    for p in pairs {
        let (a, b) = parse_young_pair(p)?;
        let r = check_balance(&a, &b, None)?;
        println!("{:<32} {:>12.6} {:>12.6} {:>10.1e} {}", p, r.c_11, r.c_12, r.t0, r.admissible);
    }
    Ok(())
}
