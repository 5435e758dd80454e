use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orlicz_core::bogovskii::Quadrature;
use orlicz_core::experiment::{
    output_root, run_and_write, BalanceCase, BalanceParams, BogovskiiParams, DecompositionParams, Experiment, ExperimentConfig,
    ExperimentReport, FemParams, FemTask, NegnormParams, NormParams, YoungParams,
};
use orlicz_core::young::{parse_young, parse_young_pair};
use orlicz_core::Error;

#[derive(Parser)]
#[command(name = "orlicz", version, about = "Orlicz-space experiments: Young calculus, Bogovskii operator, negative norms, FE pressures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiment configs, or one experiment described by flags.
    Run(RunArgs),
    /// Print the default config of an experiment kind.
    Defaults {
        #[arg(value_enum)]
        kind: Kind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Young,
    Balance,
    Norm,
    Bogovskii,
    Decomposition,
    Negnorm,
    Fem,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct RunArgs {
    #[command(subcommand)]
    direct: Option<Direct>,
    /// JSON experiment configs.
    configs: Vec<PathBuf>,
    /// Experiments run at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory (overrides ORLICZ_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct Common {
    /// Base config; the other flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
}

fn young_literal(s: &str) -> Result<String, String> {
    parse_young(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn pair_literal(s: &str) -> Result<String, String> {
    parse_young_pair(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Admissible,
    Inadmissible,
}

#[derive(Clone, Copy, ValueEnum)]
enum FemCheck {
    Infsup,
    Pressure,
    Projection,
    Recovery,
    Control,
    All,
}

#[derive(Subcommand)]
enum Direct {
    /// Conjugate involution and inverse sandwich.
    Young {
        #[command(flatten)]
        common: Common,
        #[arg(long = "family", value_parser = young_literal)]
        families: Vec<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Balance constants of Young pairs.
    Balance {
        #[command(flatten)]
        common: Common,
        #[arg(long = "pair", value_parser = pair_literal)]
        pairs: Vec<String>,
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Rearrangement invariance, indicator norms and the Hardy bound.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long = "young", value_parser = young_literal)]
        youngs: Vec<String>,
        #[arg(long)]
        fields: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Divergence residuals and constants of the Bogovskii operator.
    Bogovskii {
        #[command(flatten)]
        common: Common,
        /// `disk`, `disk:cx:cy:r` or `rect:x0:y0:x1:y1`.
        #[arg(long)]
        domain: Option<String>,
        /// Resolution for the constants.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "residual-grid")]
        residual_grids: Vec<usize>,
        #[arg(long = "residual-limit")]
        residual_limits: Vec<f64>,
        /// Quadrature as JSON text or a JSON file.
        #[arg(long)]
        quad: Option<String>,
        #[arg(long = "pair", value_parser = pair_literal)]
        pairs: Vec<String>,
        /// Fixed rearrangement constant.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Splitting on the L-shaped domain.
    Decomposition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        fields: Option<usize>,
    },
    /// Two-sided negative-norm bounds on the test corpus.
    Negnorm {
        #[command(flatten)]
        common: Common,
        /// Corpus inputs by name.
        #[arg(long = "u")]
        inputs: Vec<String>,
        #[arg(long = "pair", value_parser = pair_literal)]
        pairs: Vec<String>,
        #[arg(long = "family-depth")]
        depths: Vec<usize>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Finite-element checks.
    Fem {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum, default_value = "all")]
        check: FemCheck,
        /// `square:1/8`, `polygon:x,y;...@h` or a JSON mesh file; repeat for levels.
        #[arg(long = "mesh")]
        meshes: Vec<String>,
        #[arg(long, value_parser = pair_literal)]
        pair: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn base(common: &Common, default: Experiment) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment.kind() != default.kind() {
                return Err(Failure::Usage(format!(
                    "--config {}: holds a '{}' experiment, not '{}'",
                    path.display(),
                    cfg.experiment.kind(),
                    default.kind()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(default.kind(), 0, default),
    };
    if let Some(id) = &common.id {
        cfg.id = id.clone();
    }
    Ok(cfg)
}

macro_rules! params {
    ($cfg:expr, $variant:ident) => {
        match &mut $cfg.experiment {
            Experiment::$variant(p) => p,
            _ => unreachable!("base() checked the kind"),
        }
    };
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_list<T>(slot: &mut Vec<T>, v: Vec<T>) {
    if !v.is_empty() {
        *slot = v;
    }
}

fn quadrature(s: &str) -> Result<Quadrature, Failure> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).map_err(|e| Failure::Usage(format!("--quad {s}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("--quad: {e}")))
}

fn direct_config(d: Direct) -> Result<ExperimentConfig, Failure> {
    Ok(match d {
        Direct::Young { common, families, points } => {
            let mut cfg = base(&common, Experiment::Young(YoungParams::default()))?;
            let p = params!(cfg, Young);
            set_list(&mut p.families, families);
            set(&mut p.points, points);
            cfg
        }
        Direct::Balance { common, pairs, expect } => {
            let mut cfg = base(&common, Experiment::Balance(BalanceParams::default()))?;
            let p = params!(cfg, Balance);
            let expect = expect.map(|e| matches!(e, Expect::Admissible));
            if !pairs.is_empty() {
                p.cases = pairs.into_iter().map(|pair| BalanceCase { pair, expect, threshold: false }).collect();
            } else if expect.is_some() {
                return Err(Failure::Usage("--expect needs at least one --pair".into()));
            }
            cfg
        }
        Direct::Norm { common, youngs, fields, grid } => {
            let mut cfg = base(&common, Experiment::Norms(NormParams::default()))?;
            let p = params!(cfg, Norms);
            set_list(&mut p.youngs, youngs);
            set(&mut p.fields, fields);
            set(&mut p.grid, grid);
            cfg
        }
        Direct::Bogovskii { common, domain, grid, residual_grids, mut residual_limits, quad, pairs, c } => {
            let mut cfg = base(&common, Experiment::Bogovskii(BogovskiiParams::default()))?;
            let p = params!(cfg, Bogovskii);
            set(&mut p.domain, domain);
            set(&mut p.grid, grid);
            if !residual_grids.is_empty() {
                if residual_limits.is_empty() {
                    residual_limits = vec![0.05; residual_grids.len()];
                }
                if residual_limits.len() != residual_grids.len() {
                    return Err(Failure::Usage("--residual-limit must be given once per --residual-grid".into()));
                }
                p.residual_grids = residual_grids;
                p.residual_limits = residual_limits;
            }
            if let Some(q) = quad {
                p.quadrature = quadrature(&q)?;
            }
            set_list(&mut p.pairs, pairs);
            if c.is_some() {
                p.constant = c;
            }
            cfg
        }
        Direct::Decomposition { common, grid, fields } => {
            let mut cfg = base(&common, Experiment::Decomposition(DecompositionParams::default()))?;
            let p = params!(cfg, Decomposition);
            set(&mut p.grid, grid);
            set(&mut p.fields, fields);
            cfg
        }
        Direct::Negnorm { common, inputs, pairs, depths, grid } => {
            let mut cfg = base(&common, Experiment::Negnorm(NegnormParams::default()))?;
            let p = params!(cfg, Negnorm);
            set_list(&mut p.corpus, inputs);
            set_list(&mut p.pairs, pairs);
            set_list(&mut p.depths, depths);
            set(&mut p.grid, grid);
            cfg
        }
        Direct::Fem { common, check, meshes, pair, k, m } => {
            let mut cfg = base(&common, Experiment::Fem(FemParams::default()))?;
            let p = params!(cfg, Fem);
            p.tasks = match check {
                FemCheck::Infsup => vec![FemTask::Infsup],
                FemCheck::Pressure => vec![FemTask::Pressure],
                FemCheck::Projection => vec![FemTask::Projection],
                FemCheck::Recovery => vec![FemTask::Recovery],
                FemCheck::Control => vec![FemTask::Control],
                FemCheck::All => std::mem::take(&mut p.tasks),
            };
            set_list(&mut p.meshes, meshes);
            set(&mut p.pair, pair);
            set(&mut p.k, k);
            set(&mut p.m, m);
            cfg
        }
    })
}

fn defaults(kind: Kind) -> ExperimentConfig {
    let (id, e) = match kind {
        Kind::Young => ("young", Experiment::Young(Default::default())),
        Kind::Balance => ("balance", Experiment::Balance(Default::default())),
        Kind::Norm => ("norms", Experiment::Norms(Default::default())),
        Kind::Bogovskii => ("bogovskii", Experiment::Bogovskii(Default::default())),
        Kind::Decomposition => ("decomposition", Experiment::Decomposition(Default::default())),
        Kind::Negnorm => ("negnorm", Experiment::Negnorm(Default::default())),
        Kind::Fem => ("fem", Experiment::Fem(Default::default())),
    };
    ExperimentConfig::new(id, 1, e)
}

fn print_report(r: &ExperimentReport, dir: &Path) {
    let passed = r.assertions.iter().filter(|a| a.passed).count();
    let word = if r.passed { "PASS" } else { "FAIL" };
    println!("{word} {} ({}) {passed}/{} assertions -> {}", r.id, r.kind, r.assertions.len(), dir.display());
    for a in r.failures() {
        println!("  failed: {} value={} threshold={} {}", a.name, a.value, a.threshold, a.detail);
    }
}

fn execute(cfgs: Vec<ExperimentConfig>, out: Option<&Path>, jobs: usize) -> Result<bool, Failure> {
    let jobs = jobs.max(1);
    let mut all = true;
    for chunk in cfgs.chunks(jobs) {
        let results: Vec<(PathBuf, orlicz_core::Result<ExperimentReport>)> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|cfg| {
                    s.spawn(move || {
                        let root = output_root(out, cfg);
                        (root.join(&cfg.id), run_and_write(cfg, &root))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
        });
        for (dir, r) in results {
            let r = r?;
            print_report(&r, &dir);
            all &= r.passed;
        }
    }
    Ok(all)
}

fn main_inner(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Defaults { kind } => {
            let text = serde_json::to_string_pretty(&defaults(kind)).expect("configs serialize");
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(true)
        }
        Command::Run(args) => {
            let mut cfgs = match args.direct {
                Some(d) => vec![direct_config(d)?],
                None => {
                    if args.configs.is_empty() {
                        return Err(Failure::Usage("give config files or an experiment subcommand (see --help)".into()));
                    }
                    args.configs.iter().map(|p| ExperimentConfig::load(p)).collect::<Result<Vec<_>, _>>()?
                }
            };
            for c in cfgs.iter_mut() {
                if let Some(s) = args.seed {
                    c.seed = s;
                }
            }
            let mut ids: Vec<&str> = cfgs.iter().map(|c| c.id.as_str()).collect();
            ids.sort_unstable();
            if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                return Err(Failure::Usage(format!("experiment id '{}' appears twice", w[0])));
            }
            execute(cfgs, args.out.as_deref(), args.jobs)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
