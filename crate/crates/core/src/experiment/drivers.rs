use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use super::config::*;
use super::{ExperimentReport, Table};
use crate::bogovskii::{
    bogovskii_field, bogovskii_fields, boundary_decay, check_rearrangement_estimate, disk_density, disk_exact, divergence_residual,
    gradient_constant, indicator_density, random_densities, rearrangement_ratio, Boundary, DomainDecomposition, StarDomain,
};
use crate::error::{Error, Result};
use crate::fem::{
    band_deviation, exact_recovery, infsup_study, l2_infsup, pressure_error_study, projection_study, BubbleTrigField, FESpacePair,
    Triangulation,
};
use crate::grid::{CartesianGrid, MaskedGrid};
use crate::hardy::{hardy, HardyKind};
use crate::negnorm::{corpus, neg_norm_lower, sup_approx_convergence, two_sided_check, TestFamily, DIVERGENCE_CONSTANT};
use crate::norms::{luxemburg, luxemburg_norm, rearrange, StepFunction};
use crate::young::{check_balance, log_space, parse_young, parse_young_pair, YoungFunction};

fn num(v: f64) -> String {
    format!("{v}")
}

fn fraction(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("'{s}' is not a number or fraction"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn numbers(s: &str, sep: char, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(sep).map(fraction).collect::<Result<_>>()?;
    if v.len() != n {
        return Err(Error::Parse(format!("{what} '{s}' needs {n} numbers")));
    }
    Ok(v)
}

/// `disk`, `disk:cx:cy:r` or `rect:x0:y0:x1:y1`.
pub fn parse_domain(s: &str) -> Result<StarDomain> {
    match s.split_once(':') {
        None if s == "disk" => Ok(StarDomain::unit_disk()),
        Some(("disk", rest)) => {
            let v = numbers(rest, ':', 3, "disk")?;
            StarDomain::disk([v[0], v[1]], v[2], 0.5 * v[2])
        }
        Some(("rect", rest)) => {
            let v = numbers(rest, ':', 4, "rectangle")?;
            StarDomain::rectangle(v[0], v[1], v[2], v[3])
        }
        _ => Err(Error::Parse(format!("domain '{s}' is not disk, disk:cx:cy:r or rect:x0:y0:x1:y1"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

/// `square:1/8`, `polygon:x0,y0;x1,y1;...@1/8`, or a JSON file holding
/// `vertices` and `triangles`.
pub fn parse_mesh(s: &str) -> Result<Triangulation> {
    if let Some(h) = s.strip_prefix("square:") {
        return Triangulation::unit_square(fraction(h)?);
    }
    if let Some(rest) = s.strip_prefix("polygon:") {
        let (pts, h) = rest.split_once('@').ok_or_else(|| Error::Parse(format!("polygon mesh '{s}' lacks '@h'")))?;
        let vertices: Vec<[f64; 2]> = pts
            .split(';')
            .map(|p| numbers(p, ',', 2, "vertex").map(|v| [v[0], v[1]]))
            .collect::<Result<_>>()?;
        return Triangulation::polygon(&vertices, fraction(h)?);
    }
    let text = std::fs::read_to_string(s).map_err(|e| Error::Parse(format!("mesh '{s}': {e}")))?;
    let m: MeshFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("mesh '{s}': {e}")))?;
    Triangulation::new(m.vertices, m.triangles)
}

fn youngs(literals: &[String]) -> Result<Vec<YoungFunction>> {
    literals.iter().map(|s| parse_young(s)).collect()
}

fn pairs(literals: &[String]) -> Result<Vec<(YoungFunction, YoungFunction)>> {
    literals.iter().map(|s| parse_young_pair(s)).collect()
}

fn unit_square(n: usize) -> Result<MaskedGrid> {
    MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 1.0, 1.0], n)?, |_| true)
}

fn relative_gap(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else if x.is_infinite() || y.is_infinite() {
        f64::INFINITY
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

pub(super) fn young(p: &YoungParams, report: &mut ExperimentReport) -> Result<()> {
    let fams = youngs(&p.families)?;
    let pts = log_space(p.range[0], p.range[1], p.points);
    let rs = log_space(p.sandwich_range[0], p.sandwich_range[1], p.sandwich_points);
    let mut inv = Table::new("involution", &["family", "s", "value", "double_conjugate", "relative_error"]);
    let mut sand = Table::new("sandwich", &["family", "r", "inverse", "conjugate_inverse", "ratio"]);
    for a in &fams {
        let cc = a.conjugate_numeric().conjugate_numeric();
        let mut worst: f64 = 0.0;
        for &s in &pts {
            let (x, y) = (a.value(s), cc.value(s));
            let e = relative_gap(x, y);
            worst = worst.max(e);
            inv.push([a.label(), num(s), num(x), num(y), num(e)]);
        }
        report.at_most(&format!("involution {}", a.label()), worst, p.tolerance, format!("{} points in [{}, {}]", p.points, p.range[0], p.range[1]));
        let ac = a.conjugate();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &r in &rs {
            let (x, y) = (a.inverse(r)?, ac.inverse(r)?);
            let q = x * y / r;
            lo = lo.min(q);
            hi = hi.max(q);
            sand.push([a.label(), num(r), num(x), num(y), num(q)]);
        }
        let ok = lo >= 1.0 - 1e-9 && hi <= 2.0 + 1e-9;
        report.check(&format!("sandwich {}", a.label()), ok, format!("A^-1(r) A~^-1(r) / r in [{lo:.6}, {hi:.6}]"));
    }
    report.tables.push(inv);
    report.tables.push(sand);
    Ok(())
}

pub(super) fn balance(p: &BalanceParams, report: &mut ExperimentReport) -> Result<()> {
    let range = p.range.map(|r| (r[0], r[1]));
    let mut t = Table::new("balance", &["pair", "c_11", "c_12", "t0", "admissible"]);
    for case in &p.cases {
        let (a, b) = parse_young_pair(&case.pair)?;
        let r = check_balance(&a, &b, range)?;
        t.push([case.pair.clone(), num(r.c_11), num(r.c_12), num(r.t0), r.admissible.to_string()]);
        let detail = format!("c_11={} c_12={} t0={}", r.c_11, r.c_12, r.t0);
        match case.expect {
            Some(e) => {
                let ok = r.admissible == e && (!case.threshold || r.t0.is_finite());
                let word = if e { "admissible" } else { "inadmissible" };
                report.check(&format!("{} {word}", case.pair), ok, detail);
            }
            None => report.check(&format!("{} finite constants", case.pair), r.c_11.is_finite() && r.c_12.is_finite(), detail),
        }
    }
    report.tables.push(t);
    Ok(())
}

pub(super) fn norms(p: &NormParams, seed: u64, report: &mut ExperimentReport) -> Result<()> {
    let fams = youngs(&p.youngs)?;
    let grid = unit_square(p.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = vec![0.0f64; fams.len()];
    for _ in 0..p.fields {
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let f = grid.scalar_field(vals)?;
        let star = rearrange(&f)?;
        for (w, a) in worst.iter_mut().zip(&fams) {
            *w = w.max(relative_gap(luxemburg_norm(&f, a), luxemburg(&star.pairs(), a)));
        }
    }
    let mut t = Table::new("norms", &["young", "rearrangement_error", "indicator_norm", "indicator_closed_form"]);
    let [c, width] = p.indicator;
    let ind = grid.scalar_field(grid.sample(|q| if q[0] < width { c } else { 0.0 }))?;
    let measure: f64 = ind.cells().iter().zip(ind.scalar_values()?).filter(|(_, v)| **v != 0.0).map(|(cell, _)| cell.measure).sum();
    for (a, w) in fams.iter().zip(&worst) {
        report.at_most(&format!("rearrangement {}", a.label()), *w, p.tolerance, format!("{} random fields", p.fields));
        let got = luxemburg_norm(&ind, a);
        let expect = c / a.inverse(1.0 / measure)?;
        report.at_most(&format!("indicator {}", a.label()), relative_gap(got, expect), p.indicator_tolerance, format!("|E| = {measure}"));
        t.push([a.label(), num(*w), num(got), num(expect)]);
    }
    report.tables.push(t);

    let a = YoungFunction::power(p.hardy_p)?;
    let bound = p.hardy_p / (p.hardy_p - 1.0);
    let mut h = Table::new("hardy", &["input", "pieces", "length", "average_ratio", "dual_ratio"]);
    let (mut avg_max, mut dual_max) = (0.0f64, 0.0f64);
    for k in 0..p.hardy_inputs {
        let n = rng.gen_range(1..=40);
        let len = rng.gen_range(0.5..2.0);
        let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        values.sort_by(|x, y| y.total_cmp(x));
        let phi = StepFunction { breaks: (0..=n).map(|i| len * i as f64 / n as f64).collect(), values };
        let base = luxemburg(&phi.pairs(), &a);
        if base == 0.0 {
            continue;
        }
        let ra = hardy(HardyKind::Average, &phi).luxemburg_norm(&a) / base;
        let rd = hardy(HardyKind::Dual, &phi).luxemburg_norm(&a) / base;
        avg_max = avg_max.max(ra);
        dual_max = dual_max.max(rd);
        h.push([k.to_string(), n.to_string(), num(len), num(ra), num(rd)]);
    }
    report.at_most("hardy average", avg_max, bound + p.hardy_slack, format!("{} step inputs, {}", p.hardy_inputs, a.label()));
    report.note("hardy_dual_max", dual_max)?;
    report.tables.push(h);
    Ok(())
}

fn is_unit_disk(d: &StarDomain) -> bool {
    matches!(d.boundary, Boundary::Disk { center, radius } if center == [0.0, 0.0] && radius == 1.0)
}

pub(super) fn bogovskii(p: &BogovskiiParams, seed: u64, report: &mut ExperimentReport) -> Result<()> {
    let domain = parse_domain(&p.domain)?;
    let radial = is_unit_disk(&domain);
    let mut res = Table::new("residual", &["grid", "cells", "residual", "projected_mean", "boundary_max", "interior_error"]);
    for (&n, &limit) in p.residual_grids.iter().zip(&p.residual_limits) {
        let grid = domain.grid(n)?;
        let f = if radial { grid.scalar_field(grid.sample(disk_density))? } else { random_densities(&grid, 1, seed)?.remove(0) };
        let u = bogovskii_field(&f, &domain, &grid, &p.quadrature)?;
        let r = divergence_residual(&u, &f)?;
        report.at_most(&format!("divergence residual {n}"), r, limit, format!("{} cells", grid.len()));
        let (bmax, ierr) = if radial {
            let d = boundary_decay(&u, &grid, disk_exact)?;
            (d.boundary_max, d.interior_error)
        } else {
            (f64::NAN, f64::NAN)
        };
        res.push([n.to_string(), grid.len().to_string(), num(r), num(u.projected_mean), num(bmax), num(ierr)]);
    }
    report.tables.push(res);

    let grid = domain.grid(p.grid)?;
    let mut fs = random_densities(&grid, p.training + p.held_out, seed)?;
    let [cx, cy] = domain.ball_center;
    fs.push(indicator_density(&grid, |q| q[0] > cx + 0.2 * domain.ball_radius && q[1] > cy - 0.1 * domain.ball_radius)?);
    let fields = bogovskii_fields(&fs, &domain, &grid, &p.quadrature)?;
    let mut ct = Table::new("constants", &["pair", "input", "constant"]);
    for (lit, (a, b)) in p.pairs.iter().zip(pairs(&p.pairs)?) {
        let cs: Vec<f64> = fs[..p.training].iter().zip(&fields).map(|(f, u)| gradient_constant(u, f, &a, &b)).collect();
        for (i, c) in cs.iter().enumerate() {
            ct.push([lit.clone(), i.to_string(), num(*c)]);
        }
        report.at_most(&format!("gradient constant band {lit}"), band_deviation(&cs), p.band, format!("constants {cs:.4?}"));
    }
    report.tables.push(ct);

    let mut rt = Table::new("rearrangement", &["input", "role", "max_ratio"]);
    let mut train = Vec::with_capacity(p.training);
    for (i, (f, u)) in fs[..p.training].iter().zip(&fields).enumerate() {
        let r = rearrangement_ratio(f, u, p.samples)?;
        rt.push([i.to_string(), "training".into(), num(r)]);
        train.push(r);
    }
    let c = p.constant.unwrap_or_else(|| p.calibration * train.iter().cloned().fold(0.0, f64::max));
    report.note("rearrangement_constant", c)?;
    for (i, (f, u)) in fs.iter().zip(&fields).enumerate().skip(p.training) {
        let r = check_rearrangement_estimate(f, u, c, p.samples)?;
        let name = if i == fs.len() - 1 { "indicator".to_string() } else { format!("random {i}") };
        rt.push([i.to_string(), "held_out".into(), num(r.max_ratio)]);
        report.at_most(&format!("rearrangement estimate {name}"), r.max_ratio, c, format!("{} samples", p.samples));
    }
    report.tables.push(rt);
    Ok(())
}

/// The L-shaped domain `[0,2]^2 minus [1,2]^2` as two overlapping rectangles.
pub(super) fn l_shape(n: usize) -> Result<(MaskedGrid, DomainDecomposition)> {
    let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 2.0, 2.0], n)?, |q| q[0] < 1.0 || q[1] < 1.0)?;
    let dec = DomainDecomposition::new(vec![StarDomain::rectangle(0.0, 0.0, 2.0, 1.0)?, StarDomain::rectangle(0.0, 0.0, 1.0, 2.0)?], &grid)?;
    Ok((grid, dec))
}

pub(super) fn decomposition(p: &DecompositionParams, seed: u64, report: &mut ExperimentReport) -> Result<()> {
    let (grid, dec) = l_shape(p.grid)?;
    let fams = youngs(&p.youngs)?;
    let mut fs = random_densities(&grid, p.fields, seed)?;
    fs.push(grid.scalar_field(grid.sample(|q| q[0]))?.mean_free()?);
    let (mut identity, mut mean, mut outside, mut bound) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut t = Table::new("split", &["input", "young", "piece", "norm_ratio", "bound"]);
    for (k, f) in fs.iter().enumerate() {
        let parts = dec.split(f)?;
        let fv = f.scalar_values()?;
        for (c, x) in fv.iter().enumerate() {
            let s: f64 = parts.iter().map(|q| q.scalar_values().map(|v| v[c])).sum::<Result<f64>>()?;
            identity = identity.max((s - x).abs());
        }
        for (i, part) in parts.iter().enumerate() {
            mean = mean.max(part.integral()?.abs());
            let own = dec.cells_of(i);
            let pv = part.scalar_values()?;
            outside = outside.max((0..pv.len()).filter(|c| own.binary_search(c).is_err()).map(|c| pv[c].abs()).fold(0.0, f64::max));
        }
        for a in &fams {
            let nf = luxemburg_norm(f, a);
            for (i, (part, b)) in parts.iter().zip(&dec.report.bounds).enumerate() {
                let r = luxemburg_norm(part, a) / nf;
                bound = bound.max(r / b);
                t.push([k.to_string(), a.label(), i.to_string(), num(r), num(*b)]);
            }
        }
    }
    report.at_most("partition identity", identity, p.tolerance, format!("{} inputs", fs.len()));
    report.at_most("pieces mean-free", mean, p.tolerance, String::new());
    report.at_most("pieces supported in their subdomains", outside, 0.0, String::new());
    report.at_most("norm bound", bound, 1.0, "largest ratio of measured constant to the set-size bound".into());
    report.note("measures", &dec.report)?;
    report.tables.push(t);
    Ok(())
}

pub(super) fn negnorm(p: &NegnormParams, report: &mut ExperimentReport) -> Result<()> {
    let grid = unit_square(p.grid)?;
    let mut inputs = corpus(&grid)?;
    if !p.corpus.is_empty() {
        for name in &p.corpus {
            if !inputs.iter().any(|(n, _)| n == name) {
                return Err(Error::Config(format!("experiment.corpus: unknown input '{name}'")));
            }
        }
        inputs.retain(|(n, _)| p.corpus.iter().any(|c| c == n));
    }
    let ps = pairs(&p.pairs)?;
    let families: Vec<TestFamily> = p.depths.iter().map(|&d| TestFamily::bubbles(&grid, d)).collect::<Result<_>>()?;
    let constant = grid.scalar_field(vec![1.0; grid.len()])?;
    let mut zero = true;
    for (a, _) in &ps {
        for fam in &families {
            zero &= neg_norm_lower(&constant, a, fam)?.value == 0.0;
        }
    }
    report.check("constants have zero lower bound", zero, String::new());

    let mut t = Table::new("two_sided", &["pair", "input", "depth", "lower", "upper", "r_low", "r_high"]);
    for (lit, (a, b)) in p.pairs.iter().zip(&ps) {
        let mut monotone = true;
        let mut spread: f64 = 1.0;
        for (name, u) in &inputs {
            let rs: Vec<_> = families.iter().map(|f| two_sided_check(u, a, b, f, DIVERGENCE_CONSTANT)).collect::<Result<_>>()?;
            for (d, r) in p.depths.iter().zip(&rs) {
                t.push([lit.clone(), name.to_string(), d.to_string(), num(r.lower), num(r.upper), num(r.r_low), num(r.r_high)]);
            }
            monotone &= rs.windows(2).all(|w| w[1].lower >= w[0].lower);
            let lows: Vec<f64> = rs.iter().map(|r| r.r_low).collect();
            let (lo, hi) = (lows.iter().cloned().fold(f64::INFINITY, f64::min), lows.iter().cloned().fold(0.0, f64::max));
            spread = spread.max(if lo > 0.0 { hi / lo } else { f64::INFINITY });
        }
        report.check(&format!("lower bound monotone {lit}"), monotone, format!("depths {:?}", p.depths));
        report.at_most(&format!("ratio band spread {lit}"), spread, p.spread, format!("{} inputs", inputs.len()));
    }
    report.tables.push(t);

    let v = grid.scalar_field(grid.sample(|q| 3.0 * (std::f64::consts::PI * q[0]).sin().powi(2) * (std::f64::consts::PI * q[1]).sin().powi(2)))?;
    let a = &ps.first().ok_or_else(|| Error::Config("experiment.pairs is empty".into()))?.0;
    let r = sup_approx_convergence(&v, a, &grid, &p.sup_ks, Some(&v))?;
    let mut st = Table::new("sup_approx", &["k", "truncated_norm", "mollified_norm", "centred_mean"]);
    for s in &r.steps {
        st.push([s.k.to_string(), num(s.truncated_norm), num(s.mollified_norm), num(s.centred_mean)]);
    }
    report.at_most("mollified truncations converge", r.final_relative_error, p.sup_tolerance, format!("k up to {:?}, {}", p.sup_ks.last(), a.label()));
    report.tables.push(st);
    Ok(())
}

pub(super) fn fem(p: &FemParams, seed: u64, report: &mut ExperimentReport) -> Result<()> {
    if p.m != 0 {
        return Err(Error::Config(format!("experiment.m = {}: only piecewise-constant pressures are available", p.m)));
    }
    let meshes: Vec<Triangulation> = p.meshes.iter().map(|s| parse_mesh(s)).collect::<Result<_>>()?;
    let first = meshes.first().ok_or_else(|| Error::Config("experiment.meshes is empty".into()))?;
    let (a, b) = parse_young_pair(&p.pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for task in &p.tasks {
        match task {
            FemTask::Recovery => {
                let coarse = Triangulation::unit_square(p.recovery[0])?;
                let mut v: Vec<f64> = (0..coarse.triangles.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter_mut().for_each(|x| *x -= mean);
                let err = exact_recovery(p.recovery[0], p.recovery[1], &v)?;
                report.at_most("exact pressure recovery", err, p.recovery_tolerance, format!("sides {:?}", p.recovery));
            }
            FemTask::Infsup => {
                let study = infsup_study(&meshes, p.k, &a, &b, false)?;
                let mut t = Table::new("infsup", &["h", "elements", "velocity_dofs", "value", "method", "converged"]);
                for r in &study.rows {
                    t.push([
                        num(r.h),
                        r.elements.to_string(),
                        r.velocity_dofs.to_string(),
                        num(r.report.value),
                        format!("{:?}", r.report.method),
                        r.report.converged.to_string(),
                    ]);
                }
                report.tables.push(t);
                report.at_most(&format!("inf-sup band {}", study.pair), study.deviation, p.band, format!("{} levels", study.rows.len()));
                report.at_least("inf-sup bounded below", study.min_value, 0.1, String::new());
                let space = FESpacePair::new(first.clone(), p.k)?;
                let (eig, svd) = (l2_infsup(&space)?, crate::fem::l2_infsup_oracle(&space)?);
                report.at_most("eigen and singular-value routes agree", relative_gap(eig, svd), p.oracle_tolerance, format!("h = {}", first.h));
                report.note("infsup", &study)?;
            }
            FemTask::Control => {
                let space = FESpacePair::new(first.clone(), 1)?;
                let r = l2_infsup(&space);
                let detail = match &r {
                    Err(e) => e.to_string(),
                    Ok(v) => format!("value {v}"),
                };
                report.check("P1/P0 flagged rank deficient", matches!(r, Err(Error::RankDeficient { .. })), detail);
            }
            FemTask::Projection => {
                let fields: Vec<BubbleTrigField> = (0..p.projection_fields).map(|_| BubbleTrigField::random(&mut rng, 3)).collect();
                let study = projection_study(&meshes, &youngs(&p.projection_youngs)?, &fields)?;
                let mut t = Table::new("projection", &["h", "young", "ratio"]);
                for r in &study.rows {
                    t.push([num(r.h), r.young.clone(), num(r.ratio)]);
                }
                report.tables.push(t);
                report.at_most("projection preserves divergence", study.divergence_defect, p.divergence_tolerance, String::new());
                report.at_most("projection stability", study.max_ratio, p.projection_constant, format!("local ratios {:.4?}", study.local));
            }
            FemTask::Pressure => {
                use std::f64::consts::PI;
                let pi = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
                let study = pressure_error_study(pi, &meshes, &a, &b)?;
                let mut t = Table::new("pressure", &["h", "error", "best", "ratio", "stability", "residual"]);
                for r in &study.rows {
                    t.push([num(r.h), num(r.error), num(r.best), num(r.ratio), num(r.stability), num(r.residual)]);
                }
                report.tables.push(t);
                report.at_most("pressure error ratio band", study.ratio_deviation, p.pressure_band, String::new());
                report.note("pressure_stability_deviation", study.stability_deviation)?;
            }
        }
    }
    Ok(())
}

fn files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d)? {
            let path = e?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).map_err(|e| Error::Inconsistent(e.to_string()))?.to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub(super) fn determinism(p: &DeterminismParams, scratch: &Path, report: &mut ExperimentReport) -> Result<()> {
    if p.repeats < 2 {
        return Err(Error::Config("experiment.repeats must be at least 2".into()));
    }
    for (i, path) in p.configs.iter().enumerate() {
        let cfg = ExperimentConfig::load(path)?;
        if matches!(cfg.experiment, Experiment::Determinism(_)) {
            return Err(Error::Config(format!("{}: determinism checks cannot nest", path.display())));
        }
        let mut outputs = Vec::with_capacity(p.repeats);
        for r in 0..p.repeats {
            let root = scratch.join(format!("{i}")).join(format!("{r}"));
            if root.exists() {
                std::fs::remove_dir_all(&root)?;
            }
            super::run_and_write(&cfg, &root)?;
            outputs.push(files(&root)?);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        report.check(&format!("byte-identical {}", cfg.id), same, format!("{} files, {} runs", outputs[0].len(), p.repeats));
    }
    report.note("configs", json!(p.configs.iter().map(|c| c.display().to_string()).collect::<Vec<_>>()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_and_meshes() {
        assert!(is_unit_disk(&parse_domain("disk").unwrap()));
        assert!(!is_unit_disk(&parse_domain("disk:0:0:2").unwrap()));
        assert!(parse_domain("rect:0:0:2:1").is_ok());
        assert!(parse_domain("ellipse").is_err());
        assert_eq!(parse_mesh("square:1/4").unwrap().triangles.len(), 32);
        let l = parse_mesh("polygon:0,0;2,0;2,1;1,1;1,2;0,2@1/2").unwrap();
        assert!((l.measure() - 3.0).abs() < 1e-12);
        assert!(parse_mesh("square:x").is_err());
    }

    #[test]
    fn gaps() {
        assert_eq!(relative_gap(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(relative_gap(1.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
    }
}
