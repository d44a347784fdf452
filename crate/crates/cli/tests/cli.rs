use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn qpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpc")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_honest_with_equal_inputs() {
    let v = json(&qpc(&["run", "--scenario", "honest", "--x", "abc", "--y", "abc", "--trials", "10", "--seed", "1"]));
    assert_eq!(v["verdict_counts"], serde_json::json!({ "EQUAL": 10 }));
    assert_eq!(v["trials"], 10);
}

#[test]
fn run_attack_original_is_undetected() {
    let v = json(&qpc(&["run", "--scenario", "attack-original", "--trials", "1000", "--seed", "7"]));
    assert_eq!(v["detection_count"], 0);
    assert_eq!(v["wrong_verdicts"], 1000);
}

#[test]
fn predict_values() {
    let v = json(&qpc(&["predict", "--attack-sampling", "1"]));
    assert_eq!(v["attack_detection"], 0.75);
    let v = json(&qpc(&["predict", "--eve-decoys", "4"]));
    assert_eq!(v["eve_detection"], 0.683594);
    assert!(v.get("attack_detection").is_none());
}

#[test]
fn bad_usage_exits_2() {
    for args in [
        &["run", "--trials", "3"][..],
        &["run", "--seed", "1", "--bogus"],
        &["run", "--seed", "1", "--hash-len", "0"],
        &["run", "--seed", "1", "--scenario", "nope"],
        &["run", "--seed", "1", "--eve", "tp-b,x-y"],
        &["run", "--seed", "1", "--reveal-fraction", "0"],
        &["run", "--seed", "1", "--trials", "0"],
        &["predict"],
        &["frobnicate"],
    ] {
        let out = qpc(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn flags_override_the_scenario() {
    let v = json(&qpc(&[
        "run", "--tp", "same-state", "--variant", "improved", "--n-pairs", "17", "--trials", "200", "--seed", "3",
    ]));
    assert_eq!(v["detection_count"], 200 - v["verdict_counts"]["EQUAL"].as_u64().unwrap_or(0) - v["verdict_counts"]["UNEQUAL"].as_u64().unwrap_or(0));
    let detected = v["detection_count"].as_u64().unwrap();
    // one checked pair: about three quarters caught
    assert!((120..=180).contains(&detected), "{detected}");

    let v = json(&qpc(&["run", "--eve", "tp-b,c-tp", "--decoys", "0", "--trials", "50", "--seed", "3"]));
    assert_eq!(v["eavesdropper_detections"], 0);
    assert_eq!(v["detection_count"], 50);
}

#[test]
fn config_file_and_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let mut f = std::fs::File::create(&cfg).unwrap();
    write!(f, r#"{{"variant": "IMPROVED", "n_pairs": 20, "hash_len": 8, "x": "same", "y": "same"}}"#).unwrap();
    let jsonl = dir.path().join("t.jsonl");
    let v = json(&qpc(&[
        "run", "--config", cfg.to_str().unwrap(), "--trials", "5", "--seed", "9", "--transcripts", jsonl.to_str().unwrap(),
    ]));
    assert_eq!(v["verdict_counts"]["EQUAL"], 5);
    let text = std::fs::read_to_string(&jsonl).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["trial"], i as u64);
        assert_eq!(l["transcript"]["config"]["n_pairs"], 20);
        assert_eq!(l["transcript"]["participant_verdict"], "EQUAL");
    }

    std::fs::write(&cfg, r#"{"n_pairs": "many"}"#).unwrap();
    assert_eq!(qpc(&["run", "--config", cfg.to_str().unwrap(), "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn vectors_detects_a_corrupted_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("h.txt");
    std::fs::write(&bad, "0000000000000000 78 16 5f39\n").unwrap();
    let out = qpc(&["vectors", "--hash-vectors", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&bad, "0000000000000000 78 16 5f38\n").unwrap();
    let v = json(&qpc(&["vectors", "--hash-vectors", bad.to_str().unwrap()]));
    assert_eq!(v["ok"], true);
    assert_eq!(v["hash_vectors"], 1);
}

#[test]
fn demo_prints_four_transcripts() {
    let v = json(&qpc(&["demo", "--seed", "2"]));
    let runs = v.as_array().unwrap();
    assert_eq!(runs.len(), 4);
    assert_eq!(runs[1]["scenario"], "attack-original");
    assert_eq!(runs[1]["transcript"]["participant_verdict"], "EQUAL");
    assert_eq!(runs[1]["transcript"]["ground_truth_equal"], false);
}
