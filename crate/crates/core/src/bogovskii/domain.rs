use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CartesianGrid, MaskedGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Normalised bump `K (1 - |x - c|^2 / r^2)^4` supported in the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Bump {
    pub fn normalization(&self) -> f64 {
        5.0 / (PI * self.radius * self.radius)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let d2 = (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2);
        let t = 1.0 - d2 / (self.radius * self.radius);
        if t <= 0.0 {
            0.0
        } else {
            self.normalization() * t.powi(4)
        }
    }
}

/// A planar domain star-shaped with respect to the ball `B(ball_center, ball_radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    pub boundary: Boundary,
    pub ball_center: [f64; 2],
    pub ball_radius: f64,
}

impl StarDomain {
    pub fn disk(center: [f64; 2], radius: f64, ball_radius: f64) -> Result<Self> {
        Self::new(Boundary::Disk { center, radius }, center, ball_radius)
    }

    pub fn unit_disk() -> Self {
        Self::disk([0.0, 0.0], 1.0, 0.5).expect("unit disk is valid")
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let c = [0.5 * (x0 + x1), 0.5 * (y0 + y1)];
        let r = 0.5 * (x1 - x0).min(y1 - y0);
        Self::new(Boundary::Polygon { vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]] }, c, r)
    }

    pub fn new(boundary: Boundary, ball_center: [f64; 2], ball_radius: f64) -> Result<Self> {
        let boundary = match boundary {
            Boundary::Polygon { vertices } => Boundary::Polygon { vertices: orient(vertices)? },
            d => d,
        };
        let dom = StarDomain { boundary, ball_center, ball_radius };
        dom.validate()?;
        Ok(dom)
    }

    pub fn bump(&self) -> Bump {
        Bump { center: self.ball_center, radius: self.ball_radius }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ball_radius > 0.0 && self.ball_radius.is_finite()) {
            return Err(Error::Geometry(format!("ball radius {} must be positive", self.ball_radius)));
        }
        match &self.boundary {
            Boundary::Disk { center, radius } => {
                let d = (self.ball_center[0] - center[0]).hypot(self.ball_center[1] - center[1]);
                if !(*radius > 0.0) || d + self.ball_radius > *radius * (1.0 + 1e-12) {
                    return Err(Error::Geometry("ball does not lie inside the disk".into()));
                }
            }
            Boundary::Polygon { vertices } => {
                if !self.contains(self.ball_center) || boundary_distance(vertices, self.ball_center) < self.ball_radius * (1.0 - 1e-12) {
                    return Err(Error::Geometry("ball does not lie inside the polygon".into()));
                }
                let targets: Vec<[f64; 2]> = std::iter::once(self.ball_center)
                    .chain((0..32).map(|k| {
                        let t = 2.0 * PI * k as f64 / 32.0;
                        let r = self.ball_radius * (1.0 - 1e-9);
                        [self.ball_center[0] + r * t.cos(), self.ball_center[1] + r * t.sin()]
                    }))
                    .collect();
                let scale = self.diameter();
                for (vi, v) in vertices.iter().enumerate() {
                    for z in &targets {
                        for s in 1..=40 {
                            let t = s as f64 / 40.0;
                            let p = [v[0] + t * (z[0] - v[0]), v[1] + t * (z[1] - v[1])];
                            if !self.contains(p) && boundary_distance(vertices, p) > 1e-10 * scale {
                                return Err(Error::Geometry(format!(
                                    "vertex {vi} does not see the whole ball: domain is not star-shaped with respect to it"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match &self.boundary {
            Boundary::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) < *radius,
            Boundary::Polygon { vertices } => polygon_contains(vertices, p),
        }
    }

    pub fn bbox(&self) -> [f64; 4] {
        match &self.boundary {
            Boundary::Disk { center, radius } => [center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius],
            Boundary::Polygon { vertices } => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    b[0] = b[0].min(v[0]);
                    b[1] = b[1].min(v[1]);
                    b[2] = b[2].max(v[0]);
                    b[3] = b[3].max(v[1]);
                }
                b
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let b = self.bbox();
        (b[2] - b[0]).hypot(b[3] - b[1])
    }

    pub fn measure(&self) -> f64 {
        match &self.boundary {
            Boundary::Disk { radius, .. } => PI * radius * radius,
            Boundary::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    /// Staircase grid with `n` cells across the bounding box.
    pub fn grid(&self, n: usize) -> Result<MaskedGrid> {
        let g = CartesianGrid::covering(self.bbox(), n)?;
        MaskedGrid::new(g, |p| self.contains(p))
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>() / 2.0
}

fn orient(mut v: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    if v.len() < 3 {
        return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {}", v.len())));
    }
    let a = signed_area(&v);
    let scale: f64 = v.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max).max(1.0);
    if a.abs() <= 1e-14 * scale * scale {
        return Err(Error::Geometry("degenerate polygon with zero area".into()));
    }
    if a < 0.0 {
        v.reverse();
    }
    Ok(v)
}

pub(crate) fn polygon_contains(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub(crate) fn boundary_distance(v: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn bump_has_unit_mass() {
        let b = Bump { center: [0.3, -0.2], radius: 0.5 };
        let mass = integrate(
            |x| integrate(|y| b.eval([x, y]), -0.7, 0.3, 12, 8),
            -0.2,
            0.8,
            12,
            8,
        );
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn polygon_checks() {
        assert!(StarDomain::rectangle(0.0, 0.0, 2.0, 1.0).is_ok());
        let flat = Boundary::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]] };
        assert!(matches!(StarDomain::new(flat, [0.5, 0.0], 0.1), Err(Error::Geometry(_))));
        // L-shape is not star-shaped with respect to a ball in one arm
        let l = Boundary::Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
        };
        assert!(StarDomain::new(l.clone(), [1.5, 0.5], 0.4).is_err());
        assert!(StarDomain::new(l, [0.5, 0.5], 0.3).is_ok());
    }

    #[test]
    fn disk_measure_and_grid() {
        let d = StarDomain::unit_disk();
        let g = d.grid(64).unwrap();
        let m: f64 = g.cells().iter().map(|c| c.measure).sum();
        assert!((m - PI).abs() < 0.05);
    }
}
