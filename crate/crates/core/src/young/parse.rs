use serde::{Deserialize, Serialize};

use super::{Family, Grid, YoungFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = Grid::default();
        GridSpec { min: g.min, max: g.max, points: g.points }
    }
}

/// JSON form of a Young function.
///
/// ```json
/// {"kind": "zygmund", "params": [1.0, 2.0], "grid": {"min": 1e-6, "max": 1e6, "points": 241}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungDocument {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<Box<YoungDocument>>,
}

impl YoungDocument {
    pub fn build(&self) -> Result<YoungFunction> {
        let grid = Grid::new(self.grid.min, self.grid.max, self.grid.points)?;
        let p = &self.params;
        let need = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("kind '{}' takes {n} parameter(s), got {}", self.kind, p.len())))
            }
        };
        let f = match self.kind.as_str() {
            "power" => match p.len() {
                1 => YoungFunction::power(p[0])?,
                2 => YoungFunction::scaled_power(p[0], p[1])?,
                n => return Err(Error::Parse(format!("power takes 1 or 2 parameters, got {n}"))),
            },
            "zygmund" => {
                need(2)?;
                YoungFunction::zygmund(p[0], p[1])?
            }
            "exp" | "exponential" => {
                need(1)?;
                YoungFunction::exponential(p[0])?
            }
            "eyring" => {
                need(0)?;
                YoungFunction::eyring()
            }
            "linf" => match p.len() {
                0 => YoungFunction::linf(1.0)?,
                1 => YoungFunction::linf(p[0])?,
                n => return Err(Error::Parse(format!("linf takes at most 1 parameter, got {n}"))),
            },
            "tabulated" => return YoungFunction::tabulated(grid, p.clone()),
            "conjugate" => {
                let inner = self.of.as_ref().ok_or_else(|| Error::Parse("conjugate needs an 'of' field".into()))?;
                return Ok(inner.build()?.conjugate().with_grid(grid));
            }
            other => return Err(Error::Parse(format!("unknown Young kind '{other}'"))),
        };
        Ok(f.with_grid(grid))
    }

    pub fn from_function(a: &YoungFunction) -> Self {
        let g = a.grid();
        let grid = GridSpec { min: g.min, max: g.max, points: g.points };
        let (kind, params, of) = match a.family() {
            Family::Power { p, coef } => ("power", if *coef == 1.0 { vec![*p] } else { vec![*p, *coef] }, None),
            Family::Zygmund { p, alpha } => ("zygmund", vec![*p, *alpha], None),
            Family::Exponential { beta } => ("exp", vec![*beta], None),
            Family::Eyring => ("eyring", vec![], None),
            Family::LinfCap { cap } => ("linf", vec![*cap], None),
            Family::Tabulated { density, .. } => ("tabulated", density.to_vec(), None),
            Family::Conjugate(inner) => ("conjugate", vec![], Some(Box::new(Self::from_function(inner)))),
        };
        YoungDocument { kind: kind.into(), params, grid, of }
    }
}

fn arity(kind: &str) -> Option<(usize, usize)> {
    match kind {
        "power" => Some((1, 2)),
        "zygmund" => Some((2, 2)),
        "exp" | "exponential" => Some((1, 1)),
        "eyring" => Some((0, 0)),
        "linf" => Some((0, 1)),
        "conj" => Some((0, 0)),
        _ => None,
    }
}

fn take_one<'a>(tokens: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>) -> Result<YoungFunction> {
    let kind = tokens.next().ok_or_else(|| Error::Parse("expected a Young function".into()))?;
    let (lo, hi) = arity(kind).ok_or_else(|| Error::Parse(format!("unknown Young kind '{kind}'")))?;
    if kind == "conj" {
        return Ok(take_one(tokens)?.conjugate());
    }
    let mut params = Vec::new();
    while params.len() < hi {
        match tokens.peek().map(|t| t.parse::<f64>()) {
            Some(Ok(v)) => {
                params.push(v);
                tokens.next();
            }
            _ => break,
        }
    }
    if params.len() < lo {
        return Err(Error::Parse(format!("'{kind}' needs at least {lo} parameter(s)")));
    }
    let doc = YoungDocument { kind: kind.into(), params, grid: GridSpec::default(), of: None };
    doc.build()
}

/// Parses a literal such as `power:3`, `zygmund:1:2`, `exp:0.5`, `eyring`,
/// `linf` or `conj:power:3`.
pub fn parse_young(literal: &str) -> Result<YoungFunction> {
    let mut tokens = literal.split(':').map(str::trim).peekable();
    let f = take_one(&mut tokens)?;
    if let Some(rest) = tokens.next() {
        return Err(Error::Parse(format!("trailing token '{rest}' in '{literal}'")));
    }
    Ok(f)
}

/// Parses two literals written back to back, e.g. `zygmund:1:2:zygmund:1:1`.
pub fn parse_young_pair(literal: &str) -> Result<(YoungFunction, YoungFunction)> {
    let mut tokens = literal.split(':').map(str::trim).peekable();
    let a = take_one(&mut tokens)?;
    let b = take_one(&mut tokens)?;
    if let Some(rest) = tokens.next() {
        return Err(Error::Parse(format!("trailing token '{rest}' in '{literal}'")));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_young("power:2").unwrap().value(3.0), 9.0);
        let (a, b) = parse_young_pair("zygmund:1:2:zygmund:1:1").unwrap();
        assert_eq!(a.label(), "zygmund(1,2)");
        assert_eq!(b.label(), "zygmund(1,1)");
        let (a, b) = parse_young_pair("power:2:power:2").unwrap();
        assert_eq!(a.label(), b.label());
        assert!(parse_young("power").is_err());
        assert!(parse_young("cosh:1").is_err());
        assert!(parse_young("power:0.5").is_err());
        assert_eq!(parse_young("conj:power:1").unwrap().label(), "linf(1)");
    }

    #[test]
    fn json_round_trip() {
        for lit in ["power:3", "zygmund:1:2", "exp:0.5", "eyring", "linf", "conj:eyring"] {
            let a = parse_young(lit).unwrap();
            let doc = YoungDocument::from_function(&a);
            let text = serde_json::to_string(&doc).unwrap();
            let back: YoungDocument = serde_json::from_str(&text).unwrap();
            let b = back.build().unwrap();
            for s in [0.1, 1.0, 5.0] {
                assert_eq!(a.value(s), b.value(s), "{lit}");
            }
        }
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let text = r#"{"kind": "power", "params": [2], "colour": 1}"#;
        assert!(serde_json::from_str::<YoungDocument>(text).is_err());
    }
}
