use orlicz_core::bogovskii::{
    bogovskii_fields, check_modular_bound, check_rearrangement_estimate, gradient_constant, indicator_density, random_densities,
    rearrangement_ratio, Quadrature, StarDomain,
};
use orlicz_core::YoungFunction;

fn main() -> orlicz_core::Result<()> {
    let disk = StarDomain::unit_disk();
    let grid = disk.grid(64)?;
    let q = Quadrature::default();
    let mut fs = random_densities(&grid, 7, 7)?;
    fs.push(indicator_density(&grid, |p| p[0] > 0.2 && p[1] > -0.1)?);
    let fields = bogovskii_fields(&fs, &disk, &grid, &q)?;
    let pairs = [
        (YoungFunction::power(2.0)?, YoungFunction::power(2.0)?),
        (YoungFunction::zygmund(1.0, 1.0)?, YoungFunction::power(1.0)?),
    ];
    for (a, b) in &pairs {
        let cs: Vec<f64> = fs[..5].iter().zip(&fields).map(|(f, u)| gradient_constant(u, f, a, b)).collect();
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        let dev = cs.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0, f64::max);
        let modular: Vec<f64> = fs[..5].iter().zip(&fields).map(|(f, u)| check_modular_bound(f, u, a, b)).collect();
        println!("{} -> {}: grad C {cs:.4?} max deviation {dev:.3}; modular C {modular:.4?}", a.label(), b.label());
    }
    let train: Vec<f64> = fs[..5].iter().zip(&fields).map(|(f, u)| rearrangement_ratio(f, u, 100)).collect::<Result<_, _>>()?;
    let c = 1.5 * train.iter().cloned().fold(0.0, f64::max);
    println!("rearrangement ratios on training set {train:.4?}; calibrated C = {c:.4}");
    for (f, u) in fs[5..].iter().zip(&fields[5..]) {
        let r = check_rearrangement_estimate(f, u, c, 100)?;
        println!("held-out: max ratio {:.4} holds {}", r.max_ratio, r.holds);
    }
    Ok(())
}
