//! Conjugates, inverses and growth classes of the shipped Young functions.

use orlicz_core::young::{classify_delta2, classify_nabla2, parse_young};

fn main() -> orlicz_core::Result<()> {
    for lit in ["power:3", "zygmund:1:1", "exp:1", "eyring", "linf:1"] {
        let a = parse_young(lit)?;
        let c = a.conjugate();
        let cc = a.conjugate_numeric().conjugate_numeric();
        println!("{:<14} conjugate {}", a.label(), c.label());
        for s in [0.1, 1.0, 10.0] {
            let r = a.value(s);
            let sandwich = if r > 0.0 && r.is_finite() { a.inverse(r)? * c.inverse(r)? / r } else { f64::NAN };
            println!("  A({s:>4}) = {r:<12.6e} A~~({s:>4}) = {:<12.6e} A^-1 A~^-1 / r = {sandwich:.4}", cc.value(s));
        }
        println!("  delta2 {:?}  nabla2 {:?}", classify_delta2(&a), classify_nabla2(&a));
    }
    Ok(())
}
