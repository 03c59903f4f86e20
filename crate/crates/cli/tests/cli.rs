use std::fs;

use assert_cmd::Command;

fn infosubs(args: &[&str]) -> assert_cmd::assert::Assert {
    Command::cargo_bin("infosubs").unwrap().args(args).assert()
}

fn stdout_of(args: &[&str], code: i32) -> String {
    let out = infosubs(args).code(code).get_output().stdout.clone();
    String::from_utf8(out).unwrap()
}

#[test]
fn values_of_the_standard_fixtures() {
    let s = stdout_of(&["value", "--fixture", "xor2?q=0.5", "--rule", "log", "--subset", "1,2"], 0);
    assert_eq!(s.trim(), "V({1,2}) = 0");
    let s = stdout_of(&["value", "--fixture", "dup2", "--subset", ""], 0);
    assert_eq!(s.trim(), "V({}) = -1");
    let s = stdout_of(&["value", "--fixture", "or2", "--rule", "custom1d:kink075", "--subset", "1"], 0);
    assert_eq!(s.trim(), "V({1}) = 0.125");
}

#[test]
fn sampled_value_reports_sample_count() {
    let s = stdout_of(&["value", "--fixture", "ci3", "--subset", "1,2", "--sample", "--seed", "3"], 0);
    assert!(s.contains("samples)"), "{s}");
}

#[test]
fn classify_levels() {
    let s = stdout_of(&["classify", "--fixture", "ci?r=0.9,s=0.8", "--rule", "quadratic", "--level", "weak"], 0);
    assert!(s.contains("not substitutes"), "{s}");
    let s = stdout_of(&["classify", "--fixture", "xor2?q=0.5", "--level", "moderate"], 0);
    assert!(s.contains("verdict: complements (strict)"), "{s}");
    let s = stdout_of(&["classify", "--fixture", "dup2", "--level", "strong", "--budget", "50", "--seed", "7"], 0);
    assert!(s.contains("no violation found"), "{s}");
}

#[test]
fn separating_refusal_exits_one() {
    let s = stdout_of(&["classify", "--fixture", "dup2", "--level", "separating"], 1);
    assert!(s.starts_with("refused:"), "{s}");
}

#[test]
fn greedy_meets_its_ratio() {
    let s = stdout_of(&["select", "--fixture", "ci3", "--cardinality", "2", "--check-ratio"], 0);
    let ratio: f64 = s
        .split("ratio ")
        .nth(1)
        .and_then(|t| t.split_whitespace().next())
        .and_then(|t| t.parse().ok())
        .expect("ratio in output");
    assert!(ratio >= 0.75, "{s}");
}

#[test]
fn reduction_verifies() {
    let s = stdout_of(&["reduce", "--setfn", "modular:1,2,3", "--verify"], 0);
    assert!(s.contains("V(S)=f(S) for all 8 subsets"), "{s}");
}

#[test]
fn market_verification_exit_codes() {
    let base = ["market", "--fixture", "xor2?q=0.6", "--order", "1,2,1", "--verify", "--profile"];
    let s = stdout_of(&[&base[..], &["all-delay"]].concat(), 0);
    assert!(s.contains("deviation-proof within class"), "{s}");
    let s = stdout_of(&[&base[..], &["all-rush"]].concat(), 1);
    assert!(s.contains("profitable deviation found"), "{s}");
}

#[test]
fn market_replay_of_one_realization() {
    let s = stdout_of(&["market", "--fixture", "dup2", "--order", "1,2", "--realization", "1,1", "--event", "1"], 0);
    assert!(s.contains("p1 = (0, 1)") && s.contains("payoffs (1, 0)"), "{s}");
}

#[test]
fn bad_input_exits_two() {
    infosubs(&["value", "--fixture", "nope"]).code(2);
    let s = stdout_of(&["--json", "value", "--fixture", "nope"], 2);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!(v["error"].as_str().unwrap().contains("nope"));
}

#[test]
fn structure_file_round_trips() {
    let dir = std::env::temp_dir().join(format!("infosubs-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("xor2.json");
    fs::write(&path, stdout_of(&["fixtures", "--show", "xor2?q=0.5"], 0)).unwrap();
    let p = path.to_str().unwrap();
    let from_file = stdout_of(&["--json", "value", "--structure", p], 0);
    let from_fixture = stdout_of(&["--json", "value", "--fixture", "xor2?q=0.5"], 0);
    let a: serde_json::Value = serde_json::from_str(&from_file).unwrap();
    let b: serde_json::Value = serde_json::from_str(&from_fixture).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["values"][3]["value"], 0.0);
    fs::remove_dir_all(&dir).ok();
}
