//! Config-driven experiments with JSON and CSV reports.

mod config;
mod drivers;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    BalanceCase, BalanceParams, BogovskiiParams, DecompositionParams, DeterminismParams, Experiment, ExperimentConfig, FemParams,
    FemTask, NegnormParams, NormParams, YoungParams, SCHEMA,
};
pub use drivers::{parse_domain, parse_mesh};

use crate::error::{Error, Result};

pub const OUTPUT_ENV: &str = "ORLICZ_OUT";

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

/// A CSV table written next to the JSON summary.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub id: String,
    pub kind: String,
    pub seed: u64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            schema: SCHEMA,
            id: cfg.id.clone(),
            kind: cfg.experiment.kind().into(),
            seed: cfg.seed,
            passed: true,
            assertions: Vec::new(),
            summary: serde_json::Value::Object(Default::default()),
            tables: Vec::new(),
        }
    }

    /// `value <= threshold`
    pub(crate) fn at_most(&mut self, name: &str, value: f64, threshold: f64, detail: String) {
        self.record(name, value <= threshold, value, threshold, detail);
    }

    /// `value >= threshold`
    pub(crate) fn at_least(&mut self, name: &str, value: f64, threshold: f64, detail: String) {
        self.record(name, value >= threshold, value, threshold, detail);
    }

    pub(crate) fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.record(name, ok, if ok { 1.0 } else { 0.0 }, 1.0, detail);
    }

    fn record(&mut self, name: &str, passed: bool, value: f64, threshold: f64, detail: String) {
        self.passed &= passed;
        self.assertions.push(Assertion { name: name.into(), passed, value, threshold, detail });
    }

    pub(crate) fn note<T: Serialize>(&mut self, key: &str, value: T) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if let serde_json::Value::Object(map) = &mut self.summary {
            map.insert(key.into(), v);
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    /// Writes `report.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&json, text)?;
        written.push(json);
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs one experiment without touching the file system (except for
/// determinism checks, which write their runs below `scratch`).
pub fn run(cfg: &ExperimentConfig, scratch: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg);
    let context = |e: Error| Error::Inconsistent(format!("experiment '{}': {e}", cfg.id));
    match &cfg.experiment {
        Experiment::Young(p) => drivers::young(p, &mut report),
        Experiment::Balance(p) => drivers::balance(p, &mut report),
        Experiment::Norms(p) => drivers::norms(p, cfg.seed, &mut report),
        Experiment::Bogovskii(p) => drivers::bogovskii(p, cfg.seed, &mut report),
        Experiment::Decomposition(p) => drivers::decomposition(p, cfg.seed, &mut report),
        Experiment::Negnorm(p) => drivers::negnorm(p, &mut report),
        Experiment::Fem(p) => drivers::fem(p, cfg.seed, &mut report),
        Experiment::Determinism(p) => drivers::determinism(p, scratch, &mut report),
    }
    .map_err(|e| match e {
        Error::Config(_) | Error::Parse(_) => e,
        other => context(other),
    })?;
    Ok(report)
}

/// Output directory: explicit choice, then `ORLICZ_OUT`, then the config's
/// own `output`, then `results`.
pub fn output_root(explicit: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_ENV) {
        return PathBuf::from(p);
    }
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("results"))
}

/// Runs `cfg` and writes its report to `<root>/<id>/`.
pub fn run_and_write(cfg: &ExperimentConfig, root: &Path) -> Result<ExperimentReport> {
    let dir = root.join(&cfg.id);
    let report = run(cfg, &dir.join("runs"))?;
    report.write(&dir)?;
    Ok(report)
}
