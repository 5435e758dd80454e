use serde::{Deserialize, Serialize};

use super::domain::StarDomain;
use super::operator::{assemble_field, evaluate_points, mean_free, BogovskiiField, Quadrature, Sources};
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::grid::MaskedGrid;

/// Ordered cover of a domain by star-shaped pieces, discretised on a grid.
#[derive(Debug, Clone)]
pub struct DomainDecomposition {
    pub subdomains: Vec<StarDomain>,
    /// `membership[i][k]`: cell `k` lies in subdomain `i`.
    membership: Vec<Vec<bool>>,
    cell_measure: Vec<f64>,
    pub report: DecompositionMeasures,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionMeasures {
    /// `|Omega_i|`
    pub pieces: Vec<f64>,
    /// `|G_i|` with `G_i` the union of the later pieces.
    pub tails: Vec<f64>,
    /// `|Omega_i cap G_i|`
    pub overlaps: Vec<f64>,
    /// Bound on `||f_i|| / ||f||` for every Young function.
    pub bounds: Vec<f64>,
}

impl DomainDecomposition {
    pub fn new(subdomains: Vec<StarDomain>, grid: &MaskedGrid) -> Result<Self> {
        if subdomains.is_empty() {
            return Err(Error::Decomposition("no subdomains".into()));
        }
        let cents = grid.centroids();
        let cell_measure: Vec<f64> = grid.cells().iter().map(|c| c.measure).collect();
        let membership: Vec<Vec<bool>> = subdomains.iter().map(|d| cents.iter().map(|&p| d.contains(p)).collect()).collect();
        for (k, p) in cents.iter().enumerate() {
            if !membership.iter().any(|m| m[k]) {
                return Err(Error::Decomposition(format!("cell at {p:?} is not covered by any subdomain")));
            }
        }
        let n = subdomains.len();
        let meas = |pred: &dyn Fn(usize) -> bool| -> f64 { (0..cents.len()).filter(|&k| pred(k)).map(|k| cell_measure[k]).fold(0.0, |a, b| a + b) };
        let mut pieces = Vec::with_capacity(n);
        let mut tails = Vec::with_capacity(n);
        let mut overlaps = Vec::with_capacity(n);
        for i in 0..n {
            let in_tail = |k: usize| membership[i + 1..].iter().any(|m| m[k]);
            pieces.push(meas(&|k| membership[i][k]));
            tails.push(meas(&|k| in_tail(k)));
            overlaps.push(meas(&|k| membership[i][k] && in_tail(k)));
            if i + 1 < n && overlaps[i] <= 0.0 {
                return Err(Error::Decomposition(format!(
                    "subdomain {i} does not overlap the union of the later ones; relabel the subdomains"
                )));
            }
        }
        let growth: Vec<f64> = (0..n.saturating_sub(1)).map(|j| 1.0 + 4.0 * (tails[j] / overlaps[j]).max(1.0)).collect();
        let bounds = (0..n)
            .map(|i| {
                let prod: f64 = growth[..i.min(n - 1)].iter().product();
                if i + 1 < n {
                    (1.0 + 4.0 * pieces[i] / overlaps[i]) * prod
                } else {
                    prod
                }
            })
            .collect();
        Ok(DomainDecomposition {
            subdomains,
            membership,
            cell_measure,
            report: DecompositionMeasures { pieces, tails, overlaps, bounds },
        })
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn cells_of(&self, i: usize) -> Vec<usize> {
        (0..self.cell_measure.len()).filter(|&k| self.membership[i][k]).collect()
    }

    /// Splits a mean-free `f` into `f_0 + ... + f_{N-1}`, each mean-free and
    /// supported in its subdomain.
    pub fn split(&self, f: &SampledField) -> Result<Vec<SampledField>> {
        let fv = f.scalar_values()?;
        if fv.len() != self.cell_measure.len() {
            return Err(Error::Geometry("density does not live on the decomposition grid".into()));
        }
        let n = self.len();
        let m = &self.cell_measure;
        let integral = |v: &[f64], pred: &dyn Fn(usize) -> bool| -> f64 { (0..v.len()).filter(|&k| pred(k)).map(|k| m[k] * v[k]).sum() };
        let mut out = Vec::with_capacity(n);
        let mut g = fv.to_vec();
        for i in 0..n - 1 {
            let own = &self.membership[i];
            let in_tail: Vec<bool> = (0..g.len()).map(|k| self.membership[i + 1..].iter().any(|mm| mm[k])).collect();
            let overlap: Vec<bool> = (0..g.len()).map(|k| own[k] && in_tail[k]).collect();
            let ov = self.report.overlaps[i];
            let on_piece = integral(&g, &|k| own[k]);
            let tail_minus_piece = integral(&g, &|k| in_tail[k] && !own[k]);
            let fi: Vec<f64> = (0..g.len())
                .map(|k| {
                    if !own[k] {
                        0.0
                    } else if overlap[k] {
                        g[k] - on_piece / ov
                    } else {
                        g[k]
                    }
                })
                .collect();
            let gi: Vec<f64> = (0..g.len())
                .map(|k| {
                    if !in_tail[k] {
                        0.0
                    } else if overlap[k] {
                        -tail_minus_piece / ov
                    } else {
                        g[k]
                    }
                })
                .collect();
            out.push(f.with_values(crate::field::Values::Scalar(fi))?);
            g = gi;
        }
        out.push(f.with_values(crate::field::Values::Scalar(g))?);
        Ok(out)
    }

    /// Sum of the single-piece Bogovskii fields of the split, evaluated on the
    /// stencil of the whole grid.
    pub fn bogovskii(&self, f: &SampledField, grid: &MaskedGrid, q: &Quadrature) -> Result<BogovskiiField> {
        grid.check_field(f)?;
        let (vals, mean) = mean_free(f.scalar_values()?);
        let f0 = f.with_values(crate::field::Values::Scalar(vals))?;
        let parts = self.split(&f0)?;
        let stencil = grid.stencil();
        let mut total = vec![[0.0, 0.0]; stencil.points.len()];
        for (i, part) in parts.iter().enumerate() {
            let cells = self.cells_of(i);
            let pv = part.scalar_values()?;
            let local: Vec<f64> = cells.iter().map(|&k| pv[k]).collect();
            let sources = Sources { grid, cells };
            let u = evaluate_points(&self.subdomains[i].bump(), &sources, &[&local], &stencil.points, q);
            for (t, x) in total.iter_mut().zip(&u[0]) {
                t[0] += x[0];
                t[1] += x[1];
            }
        }
        assemble_field(grid, &stencil, total, mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CartesianGrid;
    use crate::norms::luxemburg_norm;
    use crate::young::YoungFunction;

    fn l_shape(n: usize) -> (MaskedGrid, DomainDecomposition) {
        let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 2.0, 2.0], n).unwrap(), |p| p[0] < 1.0 || p[1] < 1.0).unwrap();
        let dec = DomainDecomposition::new(
            vec![StarDomain::rectangle(0.0, 0.0, 2.0, 1.0).unwrap(), StarDomain::rectangle(0.0, 0.0, 1.0, 2.0).unwrap()],
            &grid,
        )
        .unwrap();
        (grid, dec)
    }

    #[test]
    fn single_piece_is_identity() {
        let d = StarDomain::unit_disk();
        let g = d.grid(16).unwrap();
        let dec = DomainDecomposition::new(vec![d], &g).unwrap();
        let f = g.scalar_field(g.sample(|p| p[0])).unwrap();
        let parts = dec.split(&f).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], f);
    }

    #[test]
    fn partition_identity_on_l_shape() {
        let (g, dec) = l_shape(32);
        let f = g.scalar_field(g.sample(|p| p[0])).unwrap().mean_free().unwrap();
        let parts = dec.split(&f).unwrap();
        let fv = f.scalar_values().unwrap();
        for k in 0..fv.len() {
            let s: f64 = parts.iter().map(|p| p.scalar_values().unwrap()[k]).sum();
            assert!((s - fv[k]).abs() <= 1e-12);
        }
        for (i, p) in parts.iter().enumerate() {
            assert!(p.integral().unwrap().abs() <= 1e-12);
            let pv = p.scalar_values().unwrap();
            let own = dec.cells_of(i);
            for k in 0..pv.len() {
                if !own.contains(&k) {
                    assert_eq!(pv[k], 0.0);
                }
            }
        }
        for a in [YoungFunction::power(2.0).unwrap(), YoungFunction::zygmund(1.0, 1.0).unwrap()] {
            let nf = luxemburg_norm(&f, &a);
            for (p, b) in parts.iter().zip(&dec.report.bounds) {
                assert!(luxemburg_norm(p, &a) <= b * nf);
            }
        }
    }

    #[test]
    fn disjoint_pieces_are_rejected() {
        let grid = MaskedGrid::new(CartesianGrid::covering([0.0, 0.0, 2.0, 1.0], 8).unwrap(), |_| true).unwrap();
        let r = DomainDecomposition::new(
            vec![StarDomain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap(), StarDomain::rectangle(1.0, 0.0, 2.0, 1.0).unwrap()],
            &grid,
        );
        assert!(matches!(r, Err(Error::Decomposition(_))));
    }
}
