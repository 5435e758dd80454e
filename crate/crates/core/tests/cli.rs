use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn orlicz(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz")).args(args).env("ORLICZ_OUT", out).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("orlicz-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn malformed_pair_is_a_usage_error() {
    let d = scratch("malformed");
    let o = orlicz(&["run", "balance", "--pair", "zygmund:1"], &d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--pair"));
}

#[test]
fn balance_pair_reports_finite_constants() {
    let d = scratch("balance");
    let o = orlicz(&["run", "balance", "--pair", "zygmund:1:1:zygmund:1:0"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&d.join("balance"));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["passed"], true);
    let csv = std::fs::read_to_string(d.join("balance/balance.csv")).unwrap();
    assert!(csv.starts_with("pair,c_11,c_12,t0,admissible"));
}

#[test]
fn failed_assertion_exits_one() {
    let d = scratch("fail");
    let o = orlicz(&["run", "balance", "--pair", "power:1:power:1", "--expect", "admissible"], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn infsup_matches_the_oracle() {
    let d = scratch("infsup");
    let o = orlicz(&["run", "fem", "infsup", "--mesh", "square:1/8", "--pair", "power:2:power:2"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&d.join("fem"));
    let oracle = r["assertions"].as_array().unwrap().iter().find(|a| a["name"] == "eigen and singular-value routes agree").unwrap();
    assert!(oracle["value"].as_f64().unwrap() < 1e-8);
}

#[test]
fn strict_configs() {
    let d = scratch("strict");
    let bad = d.join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1, \"id\": \"x\",\n \"experiment\": {\"kind\": \"young\", \"famlies\": []}}").unwrap();
    let o = orlicz(&["run", bad.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("famlies") && err.contains("line 2"), "{err}");
}

#[test]
fn flags_override_config_values() {
    let d = scratch("override");
    let base = d.join("young.json");
    std::fs::write(&base, r#"{"schema": 1, "id": "mine", "experiment": {"kind": "young", "families": ["power:3"], "points": 10}}"#).unwrap();
    let o = orlicz(&["run", "young", "--config", base.to_str().unwrap(), "--points", "7"], &d);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("mine/involution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn parallel_runs_match_sequential_runs() {
    let cfgs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let files: Vec<String> = ["c1_young_calculus", "c2_balance_matrix", "c5_decomposition"]
        .iter()
        .map(|c| cfgs.join(format!("{c}.json")).to_string_lossy().into_owned())
        .collect();
    let (a, b) = (scratch("seq"), scratch("par"));
    let mut args: Vec<&str> = vec!["run"];
    args.extend(files.iter().map(String::as_str));
    assert_eq!(orlicz(&args, &a).status.code(), Some(0));
    args.extend(["--jobs", "3"]);
    assert_eq!(orlicz(&args, &b).status.code(), Some(0));
    for c in ["c1_young_calculus", "c2_balance_matrix", "c5_decomposition"] {
        for f in std::fs::read_dir(a.join(c)).unwrap() {
            let name = f.unwrap().file_name();
            assert_eq!(std::fs::read(a.join(c).join(&name)).unwrap(), std::fs::read(b.join(c).join(&name)).unwrap());
        }
    }
}
