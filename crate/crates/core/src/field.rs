//! Sampled fields: values on weighted cells, with CSV and JSON I/O.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub centroid: [f64; 2],
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rank", content = "data", rename_all = "snake_case")]
pub enum Values {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 2]>),
    Matrix(Vec<[[f64; 2]; 2]>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Scalar(v) => v.len(),
            Values::Vector(v) => v.len(),
            Values::Matrix(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rank(&self) -> usize {
        match self {
            Values::Scalar(_) => 0,
            Values::Vector(_) => 1,
            Values::Matrix(_) => 2,
        }
    }
}

/// A function sampled on a finite partition of a planar domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    cells: Vec<Cell>,
    values: Values,
}

impl SampledField {
    pub fn new(cells: Vec<Cell>, values: Values) -> Result<Self> {
        if cells.len() != values.len() {
            return Err(Error::Geometry(format!("{} cells but {} values", cells.len(), values.len())));
        }
        if let Some((i, c)) = cells.iter().enumerate().find(|(_, c)| !(c.measure > 0.0 && c.measure.is_finite())) {
            return Err(Error::Geometry(format!("cell {i} has measure {}", c.measure)));
        }
        Ok(SampledField { cells, values })
    }

    pub fn scalar(cells: Vec<Cell>, values: Vec<f64>) -> Result<Self> {
        Self::new(cells, Values::Scalar(values))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.values.rank()
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    pub fn scalar_values(&self) -> Result<&[f64]> {
        match &self.values {
            Values::Scalar(v) => Ok(v),
            _ => Err(Error::Inconsistent(format!("expected a scalar field, got rank {}", self.rank()))),
        }
    }

    /// Pointwise Euclidean (or Frobenius) modulus.
    pub fn modulus(&self) -> Vec<f64> {
        match &self.values {
            Values::Scalar(v) => v.iter().map(|x| x.abs()).collect(),
            Values::Vector(v) => v.iter().map(|x| x[0].hypot(x[1])).collect(),
            Values::Matrix(v) => v
                .iter()
                .map(|m| (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt())
                .collect(),
        }
    }

    /// `(measure, |value|)` pairs.
    pub fn weighted_modulus(&self) -> Vec<(f64, f64)> {
        self.cells.iter().zip(self.modulus()).map(|(c, v)| (c.measure, v)).collect()
    }

    pub fn integral(&self) -> Result<f64> {
        let v = self.scalar_values()?;
        Ok(self.cells.iter().zip(v).map(|(c, x)| c.measure * x).sum())
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.integral()? / self.measure())
    }

    /// Scalar field with its mean subtracted.
    pub fn mean_free(&self) -> Result<Self> {
        let m = self.mean()?;
        let v = self.scalar_values()?;
        Self::scalar(self.cells.clone(), v.iter().map(|x| x - m).collect())
    }

    pub fn with_values(&self, values: Values) -> Result<Self> {
        Self::new(self.cells.clone(), values)
    }

    pub fn map_scalar<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let v = self.scalar_values()?;
        Self::scalar(self.cells.clone(), v.iter().map(|&x| f(x)).collect())
    }

    pub fn same_cells(&self, other: &SampledField) -> bool {
        self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                (a.measure - b.measure).abs() <= 1e-12 * a.measure.max(b.measure)
                    && (a.centroid[0] - b.centroid[0]).abs() <= 1e-12
                    && (a.centroid[1] - b.centroid[1]).abs() <= 1e-12
            })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let header: &[&str] = match self.values {
            Values::Scalar(_) => &["x", "y", "measure", "value"],
            Values::Vector(_) => &["x", "y", "measure", "v0", "v1"],
            Values::Matrix(_) => &["x", "y", "measure", "m00", "m01", "m10", "m11"],
        };
        wr.write_record(header)?;
        for (i, c) in self.cells.iter().enumerate() {
            let mut rec = vec![c.centroid[0], c.centroid[1], c.measure];
            match &self.values {
                Values::Scalar(v) => rec.push(v[i]),
                Values::Vector(v) => rec.extend_from_slice(&v[i]),
                Values::Matrix(v) => rec.extend_from_slice(&[v[i][0][0], v[i][0][1], v[i][1][0], v[i][1][1]]),
            }
            wr.write_record(rec.iter().map(|x| format!("{x:e}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let width = rd.headers()?.len();
        let mut cells = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
            if nums.len() != width {
                return Err(Error::Parse(format!("row {} has {} columns, expected {width}", line + 2, nums.len())));
            }
            cells.push(Cell { centroid: [nums[0], nums[1]], measure: nums[2] });
            rows.push(nums[3..].to_vec());
        }
        let values = match width {
            4 => Values::Scalar(rows.iter().map(|r| r[0]).collect()),
            5 => Values::Vector(rows.iter().map(|r| [r[0], r[1]]).collect()),
            7 => Values::Matrix(rows.iter().map(|r| [[r[0], r[1]], [r[2], r[3]]]).collect()),
            w => return Err(Error::Parse(format!("field CSV must have 4, 5 or 7 columns, got {w}"))),
        };
        Self::new(cells, values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SampledField = serde_json::from_str(text)?;
        Self::new(raw.cells, raw.values)
    }

    pub fn read_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::read_csv(text.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampledField {
        let cells = vec![
            Cell { centroid: [0.25, 0.5], measure: 0.5 },
            Cell { centroid: [0.75, 0.5], measure: 0.5 },
        ];
        SampledField::scalar(cells, vec![1.0, -3.0]).unwrap()
    }

    #[test]
    fn mean_and_modulus() {
        let f = sample();
        assert_eq!(f.mean().unwrap(), -1.0);
        assert_eq!(f.modulus(), vec![1.0, 3.0]);
        assert_eq!(f.mean_free().unwrap().mean().unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(SampledField::read_csv(buf.as_slice()).unwrap(), f);
        let m = f.with_values(Values::Matrix(vec![[[1.0, 2.0], [3.0, 4.0]]; 2])).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(SampledField::read_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn json_round_trip() {
        let f = sample();
        assert_eq!(SampledField::from_json(&f.to_json().unwrap()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_geometry() {
        let c = vec![Cell { centroid: [0.0, 0.0], measure: 0.0 }];
        assert!(matches!(SampledField::scalar(c, vec![1.0]), Err(Error::Geometry(_))));
    }
}
