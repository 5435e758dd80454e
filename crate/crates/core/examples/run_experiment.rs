//! Building an experiment config in code and reading its report.

use orlicz_core::experiment::{run, BalanceCase, BalanceParams, Experiment, ExperimentConfig};

fn main() -> orlicz_core::Result<()> {
    let cases = ["power:3:power:2.5", "zygmund:1:2:zygmund:1:1", "exp:2:exp:0.6666666666666666"]
        .iter()
        .map(|p| BalanceCase { pair: p.to_string(), expect: None, threshold: false })
        .collect();
    let cfg = ExperimentConfig::new("balance_demo", 0, Experiment::Balance(BalanceParams { cases, range: None }));
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    let report = run(&cfg, &std::env::temp_dir())?;
    for a in &report.assertions {
        println!("{} {}: {}", if a.passed { "ok  " } else { "FAIL" }, a.name, a.detail);
    }
    Ok(())
}
