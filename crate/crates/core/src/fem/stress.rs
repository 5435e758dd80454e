use super::space::Mat2;
use crate::error::{Error, Result};
use crate::young::YoungFunction;

#[derive(Debug, Clone)]
pub enum StressKind {
    /// `nu0 (kappa0 + |xi|)^(p-2) xi`
    Power { nu0: f64, kappa0: f64, p: f64 },
    /// `nu0 arsinh(lambda0 |xi|) / (lambda0 |xi|) xi`
    Eyring { nu0: f64, lambda0: f64 },
    /// `Phi'(|xi|) / |xi| xi`
    Potential(YoungFunction),
}

#[derive(Debug, Clone)]
pub struct StressLaw {
    pub kind: StressKind,
    /// Fluid density.
    pub rho: f64,
}

impl StressLaw {
    pub fn power(nu0: f64, kappa0: f64, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && nu0 > 0.0 && kappa0 >= 0.0) {
            return Err(Error::Precondition(format!("power law needs p > 1, nu0 > 0, kappa0 >= 0; got p={p} nu0={nu0} kappa0={kappa0}")));
        }
        Ok(StressLaw { kind: StressKind::Power { nu0, kappa0, p }, rho: 1.0 })
    }

    pub fn eyring(nu0: f64, lambda0: f64) -> Result<Self> {
        if !(nu0 > 0.0 && lambda0 > 0.0) {
            return Err(Error::Precondition(format!("eyring law needs nu0, lambda0 > 0; got {nu0}, {lambda0}")));
        }
        Ok(StressLaw { kind: StressKind::Eyring { nu0, lambda0 }, rho: 1.0 })
    }

    pub fn potential(phi: YoungFunction) -> Self {
        StressLaw { kind: StressKind::Potential(phi), rho: 1.0 }
    }

    pub fn with_density(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// `power:nu:kappa:p` or `eyring:nu:lambda`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}' in law '{s}'")));
        match parts.as_slice() {
            ["power", nu, k, p] => Self::power(num(nu)?, num(k)?, num(p)?),
            ["eyring", nu, l] => Self::eyring(num(nu)?, num(l)?),
            _ => Err(Error::Parse(format!("law '{s}' is not power:nu:kappa:p or eyring:nu:lambda"))),
        }
    }

    /// Scalar factor `S(xi) = factor(|xi|) xi`.
    pub fn factor(&self, t: f64) -> f64 {
        match &self.kind {
            StressKind::Power { nu0, kappa0, p } => {
                let base = kappa0 + t;
                if base == 0.0 {
                    return if *p >= 2.0 { 0.0 } else { f64::INFINITY };
                }
                nu0 * base.powf(p - 2.0)
            }
            StressKind::Eyring { nu0, lambda0 } => {
                let x = lambda0 * t;
                if x < 1e-4 {
                    // arsinh(x)/x = 1 - x^2/6 + 3x^4/40
                    let x2 = x * x;
                    nu0 * (1.0 - x2 / 6.0 + 3.0 * x2 * x2 / 40.0)
                } else {
                    nu0 * x.asinh() / x
                }
            }
            StressKind::Potential(phi) => {
                if t == 0.0 {
                    return 0.0;
                }
                phi.density(t) / t
            }
        }
    }
}

fn norm(xi: &Mat2) -> f64 {
    (xi[0][0].powi(2) + xi[0][1].powi(2) + xi[1][0].powi(2) + xi[1][1].powi(2)).sqrt()
}

pub fn stress_eval(law: &StressLaw, xi: &Mat2) -> Result<Mat2> {
    if (xi[0][1] - xi[1][0]).abs() > 1e-12 * norm(xi).max(1.0) {
        return Err(Error::Precondition("strain rate must be symmetric".into()));
    }
    let t = norm(xi);
    if t == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    let f = law.factor(t);
    Ok([[f * xi[0][0], f * xi[0][1]], [f * xi[1][0], f * xi[1][1]]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn quadratic_power_law_is_newtonian() {
        let law = StressLaw::power(0.7, 0.0, 2.0).unwrap();
        let xi = [[1.0, -2.0], [-2.0, 0.5]];
        let s = stress_eval(&law, &xi).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(s[i][j], 0.7 * xi[i][j], max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn eyring_slope_at_rest() {
        let law = StressLaw::eyring(1.3, 2.0).unwrap();
        let xi = [[1e-8, 0.0], [0.0, 0.0]];
        let s = stress_eval(&law, &xi).unwrap();
        assert_relative_eq!(s[0][0] / 1e-8, 1.3, max_relative = 1e-12);
        let direct = 1.3 * (2.0f64 * 0.5).asinh() / (2.0 * 0.5);
        assert_relative_eq!(law.factor(0.5), direct, max_relative = 1e-14);
        // series branch joins the closed form
        let x = 1e-4 / 2.0;
        assert_relative_eq!(law.factor(x * 0.999), law.factor(x * 1.001), max_relative = 1e-8);
    }

    #[test]
    fn potential_matches_power_law() {
        let law = StressLaw::potential(YoungFunction::power(3.0).unwrap());
        let p = StressLaw::power(3.0, 0.0, 3.0).unwrap();
        assert_relative_eq!(law.factor(0.8), p.factor(0.8), max_relative = 1e-14);
        assert!(stress_eval(&law, &[[0.0; 2]; 2]).unwrap() == [[0.0; 2]; 2]);
    }

    #[test]
    fn parse_and_reject() {
        assert!(StressLaw::parse("power:1:0.1:1.5").is_ok());
        assert!(StressLaw::parse("eyring:1:2").is_ok());
        assert!(StressLaw::parse("power:1:0.1:1").is_err());
        assert!(StressLaw::parse("newton:1").is_err());
        assert!(stress_eval(&StressLaw::eyring(1.0, 1.0).unwrap(), &[[0.0, 1.0], [0.0, 0.0]]).is_err());
    }

    proptest! {
        #[test]
        fn stress_is_parallel_and_monotone(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, p in 1.1f64..4.0, k in 0.0f64..1.0) {
            let xi = [[a, b], [b, c]];
            for law in [StressLaw::power(1.0, k, p).unwrap(), StressLaw::eyring(0.5, 3.0).unwrap(), StressLaw::potential(YoungFunction::zygmund(1.0, 1.0).unwrap())] {
                let s = stress_eval(&law, &xi).unwrap();
                let t = norm(&xi);
                prop_assume!(t > 1e-9);
                let f = s[0][0] * xi[0][0] + s[0][1] * xi[0][1] + s[1][0] * xi[1][0] + s[1][1] * xi[1][1];
                prop_assert!(f >= 0.0);
                let lambda = f / (t * t);
                for i in 0..2 {
                    for j in 0..2 {
                        prop_assert!((s[i][j] - lambda * xi[i][j]).abs() <= 1e-10 * (1.0 + s[i][j].abs()));
                    }
                }
            }
        }
    }
}
