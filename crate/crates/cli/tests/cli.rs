use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_transferlab"));
    c.env("RUST_LOG", "off");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn transferlab")
}

fn ok_json(args: &[&str]) -> Value {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files.
#[test]
fn help_matches_golden_files() {
    let cases: [(&str, &[&str]); 8] = [
        ("help.txt", &["--help"]),
        ("help_scenario.txt", &["scenario", "--help"]),
        ("help_exponent.txt", &["exponent", "--help"]),
        ("help_verify_family.txt", &["verify-family", "--help"]),
        ("help_rates.txt", &["rates", "--help"]),
        ("help_adaptive.txt", &["adaptive", "--help"]),
        ("help_select.txt", &["select", "--help"]),
        ("help_reweight.txt", &["reweight", "--help"]),
    ];
    for (file, args) in cases {
        let o = run(args);
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        for flag in ["--config", "--seed", "--out", "--jobs", "--set", "--help"] {
            assert!(text.contains(flag), "{file} lacks {flag}");
        }
        let path = golden_dir().join(file);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &text).unwrap();
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(text, want, "{file} differs; rerun with UPDATE_GOLDEN=1 if intended");
    }
}

#[test]
fn exponent_on_example2_reports_gamma_one_constant_two() {
    let v = ok_json(&["exponent", "--config", "example2"]);
    assert_eq!(v["gamma"], 1.0);
    assert_eq!(v["constant"], 2.0);
    assert_eq!(v["d_a"], 0.25);
    assert_eq!(v["d_y"], 0.25);
}

#[test]
fn verify_family_holds_for_every_member() {
    for cfg in ["theorem3", "theorem4"] {
        let v = ok_json(&["verify-family", "--config", cfg]);
        let verdicts = v["report"]["verdicts"].as_array().unwrap();
        assert_eq!(verdicts.len() as u64, v["report"]["members"].as_u64().unwrap());
        assert!(verdicts.iter().all(|d| d["membership"]["holds"] == true), "{cfg}");
    }
}

#[test]
fn rates_are_byte_identical_across_runs_and_pools() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for (i, jobs) in ["1", "1", "4"].into_iter().enumerate() {
        let path = dir.path().join(format!("r{i}.csv"));
        let o = run(&["rates", "--config", "rates", "--set", "trials=1", "--seed", "11", "--jobs", jobs, "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    let text = String::from_utf8(outs.remove(0)).unwrap();
    assert!(text.starts_with("n_p,n_q,estimator,trials,mean,median,q10,q90,seed\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 6);
}

#[test]
fn seed_flag_changes_draws() {
    let a = run(&["rates", "--config", "rates", "--set", "trials=3", "--seed", "1"]);
    let b = run(&["rates", "--config", "rates", "--set", "trials=3", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn adaptive_writes_transcript_lines() {
    let dir = tempfile::tempdir().unwrap();
    let tr = dir.path().join("t.jsonl");
    let set = format!("transcript={}", tr.display());
    let v = ok_json(&["adaptive", "--config", "adaptive", "--set", &set]);
    let lines = std::fs::read_to_string(&tr).unwrap();
    assert_eq!(lines.lines().count() as u64, v["run"]["rounds"].as_u64().unwrap());
    for l in lines.lines() {
        let r: Value = serde_json::from_str(l).unwrap();
        for k in ["t", "n_tP", "n_tQ", "cost_P", "cost_Q", "step6_lhs", "step7_stat", "decision"] {
            assert!(r.get(k).is_some(), "{k}");
        }
    }
    assert!(v["run"]["excess_q"].as_f64().unwrap() <= 0.1);
    assert!(v["run"]["total_cost"].as_f64() <= v["target_only"]["total_cost"].as_f64());
    assert_eq!(ok_json(&["adaptive", "--config", "adaptive", "--set", &set]), v);
}

#[test]
fn emitted_scenario_reloads_as_a_file_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = run(&["scenario", "emit", "--config", "example2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let spec = format!("scenario={{\"kind\":\"file\",\"path\":{:?}}}", path.to_str().unwrap());
    let v = ok_json(&["exponent", "--set", &spec]);
    assert_eq!(v["gamma"], 1.0);
    assert_eq!(v["constant"], 2.0);
}

#[test]
fn scenario_list_names_every_bundled_config() {
    let o = run(&["scenario", "list"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["example2", "theorem3", "theorem4", "rates", "adaptive", "select", "reweight"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn select_and_reweight_run() {
    let v = ok_json(&["select", "--config", "select"]);
    assert_eq!(v["chosen"], 0);
    assert_eq!(v["statistics"].as_array().unwrap().len(), 2);
    let v = ok_json(&["reweight", "--config", "reweight"]);
    assert!(v["chosen"].as_u64().unwrap() < 2);
    assert!(v["excess_q"].as_f64().is_some());
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["exponent", "--config", "example2"]), Some(0));
    assert_eq!(code(&["exponent", "--config", "example2", "--set", "bogus=1"]), Some(2));
    assert_eq!(code(&["exponent", "--config", "no/such/file.json"]), Some(2));
    assert_eq!(code(&["exponent"]), Some(2));
    assert_eq!(code(&["rates", "--config", "rates", "--set", "confidence.delta=2"]), Some(2));
    assert_eq!(code(&["verify-family", "--config", "example2"]), Some(2));
    assert_eq!(code(&["nonsense"]), Some(2));
    assert_eq!(code(&["rates", "--config", "rates", "--jobs", "0"]), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/dir/out.csv");
    assert_eq!(code(&["rates", "--config", "rates", "--set", "trials=1", "--out", missing.to_str().unwrap()]), Some(3));
    let cap = ["adaptive", "--config", "adaptive", "--set", "adaptive.max_rounds=1"];
    assert_eq!(code(&cap), Some(3));
}
