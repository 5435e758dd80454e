use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bogovskii::Quadrature;
use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;

/// One experiment as read from a JSON file.
///
/// ```json
/// {"schema": 1, "id": "balance", "seed": 1,
///  "experiment": {"kind": "balance", "cases": [{"pair": "power:2:power:2", "expect": true}]}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the `ORLICZ_OUT` variable and `--out` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Young(YoungParams),
    Balance(BalanceParams),
    Norms(NormParams),
    Bogovskii(BogovskiiParams),
    Decomposition(DecompositionParams),
    Negnorm(NegnormParams),
    Fem(FemParams),
    Determinism(DeterminismParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Young(_) => "young",
            Experiment::Balance(_) => "balance",
            Experiment::Norms(_) => "norms",
            Experiment::Bogovskii(_) => "bogovskii",
            Experiment::Decomposition(_) => "decomposition",
            Experiment::Negnorm(_) => "negnorm",
            Experiment::Fem(_) => "fem",
            Experiment::Determinism(_) => "determinism",
        }
    }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YoungParams {
    pub families: Vec<String>,
    pub points: usize,
    pub range: [f64; 2],
    pub tolerance: f64,
    pub sandwich_points: usize,
    pub sandwich_range: [f64; 2],
}

impl Default for YoungParams {
    fn default() -> Self {
        YoungParams {
            families: strings(&["power:3", "zygmund:1:1", "exp:1", "eyring", "linf:1"]),
            points: 100,
            range: [1e-3, 1e2],
            tolerance: 1e-6,
            sandwich_points: 50,
            sandwich_range: [1e-4, 1e4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceCase {
    pub pair: String,
    /// Expected admissibility; `None` only records the constants.
    #[serde(default)]
    pub expect: Option<bool>,
    /// Require a finite threshold (near-infinity admissibility is enough).
    #[serde(default)]
    pub threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceParams {
    pub cases: Vec<BalanceCase>,
    pub range: Option<[f64; 2]>,
}

impl Default for BalanceParams {
    fn default() -> Self {
        let case = |pair: &str, expect: bool, threshold: bool| BalanceCase { pair: pair.into(), expect: Some(expect), threshold };
        BalanceParams {
            cases: vec![
                case("power:1.5:power:1.5", true, false),
                case("power:2:power:2", true, false),
                case("power:4:power:4", true, false),
                case("zygmund:1:1:zygmund:1:0", true, true),
                case("zygmund:1:2:zygmund:1:1", true, true),
                case("exp:0.5:exp:0.3333333333333333", true, false),
                case("exp:1:exp:0.5", true, false),
                case("power:1:power:1", false, false),
                case("linf:linf", false, false),
            ],
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormParams {
    pub youngs: Vec<String>,
    pub fields: usize,
    pub grid: usize,
    pub tolerance: f64,
    /// Height and width fraction of the indicator test.
    pub indicator: [f64; 2],
    pub indicator_tolerance: f64,
    pub hardy_inputs: usize,
    pub hardy_p: f64,
    pub hardy_slack: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            youngs: strings(&["power:2", "power:3", "zygmund:1:1", "exp:1"]),
            fields: 100,
            grid: 16,
            tolerance: 1e-10,
            indicator: [2.5, 0.3],
            indicator_tolerance: 1e-8,
            hardy_inputs: 200,
            hardy_p: 2.0,
            hardy_slack: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BogovskiiParams {
    /// `disk`, `disk:cx:cy:r` or `rect:x0:y0:x1:y1`.
    pub domain: String,
    pub quadrature: Quadrature,
    /// Resolutions of the radial divergence test with their residual limits.
    pub residual_grids: Vec<usize>,
    pub residual_limits: Vec<f64>,
    pub grid: usize,
    pub pairs: Vec<String>,
    pub training: usize,
    pub held_out: usize,
    pub band: f64,
    pub samples: usize,
    pub calibration: f64,
    /// Fixed rearrangement constant instead of calibrating one.
    pub constant: Option<f64>,
}

impl Default for BogovskiiParams {
    fn default() -> Self {
        BogovskiiParams {
            domain: "disk".into(),
            quadrature: Quadrature::default(),
            residual_grids: vec![64, 128],
            residual_limits: vec![0.05, 0.025],
            grid: 64,
            pairs: strings(&["power:2:power:2", "zygmund:1:1:power:1"]),
            training: 5,
            held_out: 2,
            band: 0.25,
            samples: 100,
            calibration: 1.5,
            constant: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecompositionParams {
    pub grid: usize,
    pub fields: usize,
    pub youngs: Vec<String>,
    pub tolerance: f64,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams { grid: 64, fields: 3, youngs: strings(&["power:2", "zygmund:1:1"]), tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegnormParams {
    pub grid: usize,
    pub pairs: Vec<String>,
    pub depths: Vec<usize>,
    /// Subset of the corpus by name; empty selects all of it.
    pub corpus: Vec<String>,
    pub spread: f64,
    pub sup_ks: Vec<usize>,
    pub sup_tolerance: f64,
}

impl Default for NegnormParams {
    fn default() -> Self {
        NegnormParams {
            grid: 64,
            pairs: strings(&["power:2:power:2", "zygmund:1:1:zygmund:1:0", "exp:1:exp:0.5"]),
            depths: vec![2, 3, 4],
            corpus: Vec::new(),
            spread: 4.0,
            sup_ks: vec![1, 2, 4, 8, 16, 32],
            sup_tolerance: 0.02,
        }
    }
}

/// Which FE checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FemTask {
    Recovery,
    Infsup,
    Control,
    Projection,
    Pressure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FemParams {
    pub tasks: Vec<FemTask>,
    /// `square:1/8`, `polygon:x0,y0;x1,y1;...@1/8` or a path to a JSON mesh.
    pub meshes: Vec<String>,
    pub pair: String,
    pub k: usize,
    pub m: usize,
    pub band: f64,
    pub oracle_tolerance: f64,
    pub recovery: [f64; 2],
    pub recovery_tolerance: f64,
    pub projection_youngs: Vec<String>,
    pub projection_fields: usize,
    pub divergence_tolerance: f64,
    pub projection_constant: f64,
    pub pressure_band: f64,
}

impl Default for FemParams {
    fn default() -> Self {
        FemParams {
            tasks: vec![FemTask::Recovery, FemTask::Infsup, FemTask::Control, FemTask::Projection, FemTask::Pressure],
            meshes: strings(&["square:1/4", "square:1/8", "square:1/16"]),
            pair: "power:2:power:2".into(),
            k: 2,
            m: 0,
            band: 0.2,
            oracle_tolerance: 1e-8,
            recovery: [0.25, 0.0625],
            recovery_tolerance: 1e-10,
            projection_youngs: strings(&["power:1.5", "power:3", "zygmund:1:1", "exp:1"]),
            projection_fields: 5,
            divergence_tolerance: 1e-12,
            projection_constant: 2.0,
            pressure_band: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeterminismParams {
    /// Config files, relative to the file that lists them.
    pub configs: Vec<PathBuf>,
    pub repeats: usize,
}

impl Default for DeterminismParams {
    fn default() -> Self {
        DeterminismParams { configs: Vec::new(), repeats: 2 }
    }
}

impl ExperimentConfig {
    pub fn new(id: &str, seed: u64, experiment: Experiment) -> Self {
        ExperimentConfig { schema: SCHEMA, id: id.into(), seed, output: None, experiment }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves the relative paths it contains against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(&e))))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Experiment::Determinism(p) = &mut cfg.experiment {
            for c in p.configs.iter_mut() {
                if c.is_relative() {
                    *c = base.join(&*c);
                }
            }
        }
        if let Experiment::Fem(p) = &mut cfg.experiment {
            for m in p.meshes.iter_mut() {
                if !m.contains(':') && Path::new(m.as_str()).is_relative() {
                    *m = base.join(m.as_str()).to_string_lossy().into_owned();
                }
            }
        }
        if let Some(out) = &mut cfg.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {} (expected {SCHEMA})", self.schema)));
        }
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!("id '{}' must be non-empty and use [A-Za-z0-9_-]", self.id)));
        }
        match &self.experiment {
            Experiment::Bogovskii(p) if p.residual_grids.len() != p.residual_limits.len() => {
                Err(Error::Config("experiment.residual_grids and experiment.residual_limits differ in length".into()))
            }
            Experiment::Negnorm(p) if p.depths.windows(2).any(|w| w[1] <= w[0]) => {
                Err(Error::Config("experiment.depths must increase".into()))
            }
            _ => Ok(()),
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"schema": 1, "id": "b", "experiment": {"kind": "balance"}}"#;
        assert!(ExperimentConfig::parse(ok).is_ok());
        let top = r#"{"schema": 1, "id": "b", "colour": 3, "experiment": {"kind": "balance"}}"#;
        assert!(matches!(ExperimentConfig::parse(top), Err(Error::Config(m)) if m.contains("colour")));
        let inner = r#"{"schema": 1, "id": "b", "experiment": {"kind": "balance", "pairz": []}}"#;
        assert!(matches!(ExperimentConfig::parse(inner), Err(Error::Config(m)) if m.contains("pairz")));
        let kind = r#"{"schema": 1, "id": "b", "experiment": {"kind": "stokes"}}"#;
        assert!(ExperimentConfig::parse(kind).is_err());
        let schema = r#"{"schema": 2, "id": "b", "experiment": {"kind": "balance"}}"#;
        assert!(ExperimentConfig::parse(schema).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let bad = "{\"schema\": 1,\n \"id\": \"b\",\n \"experiment\": {\"kind\": \"fem\", \"band\": \"wide\"}}";
        let Err(Error::Config(m)) = ExperimentConfig::parse(bad) else { panic!() };
        assert!(m.contains("line 3"), "{m}");
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::new("fem", 3, Experiment::Fem(FemParams::default()));
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }
}
