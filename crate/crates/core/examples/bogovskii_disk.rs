use std::time::Instant;

use orlicz_core::bogovskii::{bogovskii_field, boundary_decay, disk_density, disk_exact, divergence_residual, Quadrature, StarDomain};

fn main() -> orlicz_core::Result<()> {
    let disk = StarDomain::unit_disk();
    let q = Quadrature::default();
    for n in [32, 64, 128] {
        let t = Instant::now();
        let grid = disk.grid(n)?;
        let f = grid.scalar_field(grid.sample(disk_density))?;
        let field = bogovskii_field(&f, &disk, &grid, &q)?;
        let res = divergence_residual(&field, &f)?;
        let decay = boundary_decay(&field, &grid, disk_exact)?;
        println!(
            "n={n:4} cells={:6} residual={res:.4e} projected_mean={:.2e} boundary_max={:.3e} interior_err={:.3e} decay_ok={} time={:.1}s",
            grid.len(),
            field.projected_mean,
            decay.boundary_max,
            decay.interior_error,
            decay.holds,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
