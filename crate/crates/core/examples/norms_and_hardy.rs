//! Luxemburg norms, decreasing rearrangements and the Hardy operators.

use orlicz_core::grid::{CartesianGrid, MaskedGrid};
use orlicz_core::hardy::{hardy, HardyKind};
use orlicz_core::norms::{holder_pairing_check, luxemburg, luxemburg_norm, rearrange};
use orlicz_core::young::parse_young;

fn main() -> orlicz_core::Result<()> {
    let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 1.0, 1.0], 32)?, |_| true)?;
    let u = grid.scalar_field(grid.sample(|p| (6.0 * p[0]).sin() + p[1] * p[1]))?;
    let v = grid.scalar_field(grid.sample(|p| p[0] - p[1]))?;
    let star = rearrange(&u)?;
    for lit in ["power:2", "power:4", "zygmund:1:1", "exp:1"] {
        let a = parse_young(lit)?;
        let holder = holder_pairing_check(&u, &v, &a, &[])?;
        println!(
            "{:<14} |u| = {:.6}  |u*| = {:.6}  |int uv| = {:.4} <= {:.4}",
            a.label(),
            luxemburg_norm(&u, &a),
            luxemburg(&star.pairs(), &a),
            holder.pairing.abs(),
            holder.bound
        );
    }
    let l2 = parse_young("power:2")?;
    let base = luxemburg(&star.pairs(), &l2);
    for kind in [HardyKind::Average, HardyKind::Dual] {
        println!("{kind:?}: L2 ratio {:.4} (bound 2)", hardy(kind, &star).luxemburg_norm(&l2) / base);
    }
    Ok(())
}
