// Copyright 2026 The stagevote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

mod common;

use common::fixture;
use stagevote::cli::{run, EXIT_ERROR, EXIT_NULL_WINNER, EXIT_OK};
use stagevote::sim::{run_simulation, RunOptions, SimConfig};
use std::collections::BTreeMap;
use std::process::Command;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("stagevote").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    fixture(name).to_str().unwrap().to_owned()
}

/// `key: value` lines of a decision block.
fn decision_block(text: &str) -> BTreeMap<String, String> {
    let start = text.find("algorithm: ").expect("decision block");
    text[start..]
        .lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

#[test]
fn concrete_example_report() {
    let (code, out, err) = call(&["tally", &path("concrete_example.csv"), "--alpha", "0.5"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out, std::fs::read_to_string(fixture("concrete_example.txt")).unwrap());
    assert!(out.contains("Stage2   25%   25%   25%   25%  100%    0%"));
    assert_eq!(decision_block(&out)["winner"], "X");

    let (code, out, _) = call(&["tally", &path("concrete_example.csv"), "--rule", "basic"]);
    assert_eq!(code, EXIT_OK);
    let d = decision_block(&out);
    assert_eq!(
        (d["winner"].as_str(), d["stage"].as_str(), d["score"].as_str()),
        ("X", "2", "100")
    );
}

#[test]
fn beta_example_report() {
    let args = [
        "tally",
        &path("beta_example.csv"),
        "--alpha",
        "0.5",
        "--beta",
        "0.3333",
        "--gamma",
        "any:0.6666",
        "--selector",
        "last",
    ];
    let (code, out, err) = call(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.is_empty(), "{err}");
    assert_eq!(out, std::fs::read_to_string(fixture("beta_example.txt")).unwrap());
    let d = decision_block(&out);
    assert_eq!(
        (d["winner"].as_str(), d["stage"].as_str(), d["score"].as_str()),
        ("A", "2", "65")
    );
}

#[test]
fn text_and_json_agree() {
    let cases: [&[&str]; 4] = [
        &["--alpha", "0.5"],
        &["--beta", "0.3333", "--gamma", "any:0.6666", "--selector", "last"],
        &["--beta", "0.3", "--beta-mode", "include", "--selector", "max-entropy"],
        &["--rule", "basic", "--alpha", "0.6"],
    ];
    for file in [
        "concrete_example.csv",
        "beta_example.csv",
        "null_wins.csv",
        "incomplete.csv",
    ] {
        for flags in cases {
            let p = path(file);
            let mut args = vec!["tally", p.as_str()];
            args.extend_from_slice(flags);
            let (code_text, text, _) = call(&args);
            args.extend_from_slice(&["--format", "json"]);
            let (code_json, json, _) = call(&args);
            assert_eq!(code_text, code_json);
            let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
            let d = &doc["decision"];
            let block = decision_block(&text);
            let field = |k: &str| -> String {
                match &d[k] {
                    serde_json::Value::Null => "-".to_owned(),
                    serde_json::Value::String(s) => s.clone(),
                    v => v.to_string(),
                }
            };
            for key in [
                "winner",
                "stage",
                "score",
                "bestScoreStage",
                "lastStageByBeta",
                "lastStageByGamma",
            ] {
                if let Some(v) = block.get(key) {
                    let f = field(key);
                    match (f.parse::<f64>(), v.parse::<f64>()) {
                        (Ok(a), Ok(b)) => assert!((a - b).abs() < 1e-6, "{file} {flags:?} {key}"),
                        _ => assert_eq!(&f, v, "{file} {flags:?} {key}"),
                    }
                }
            }
            assert_eq!(
                field("alpha").parse::<f64>().unwrap(),
                block["alpha"].parse::<f64>().unwrap()
            );

            let scores = &doc["tables"]["scores"]["stages"];
            let text_scores = text.split("Score of Candidates\n").nth(1).unwrap();
            for (row, line) in scores.as_array().unwrap().iter().zip(text_scores.lines().skip(1)) {
                let cells: Vec<f64> = line
                    .split_whitespace()
                    .skip(1)
                    .map(|c| c.trim_end_matches('%').parse().unwrap())
                    .collect();
                let values: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
                assert_eq!(cells.len(), values.len());
                for (c, v) in cells.iter().zip(&values) {
                    assert!((c - v).abs() < 0.01, "{file}: {c} vs {v}");
                }
            }
        }
    }
}

#[test]
fn exit_status_contract() {
    let cases = [
        ("concrete_example.csv", EXIT_OK),
        ("beta_example.csv", EXIT_OK),
        ("null_wins.csv", EXIT_NULL_WINNER),
        ("incomplete.csv", EXIT_OK),
        ("invalid.csv", EXIT_ERROR),
        ("empty.csv", EXIT_ERROR),
        ("no_such_file.csv", EXIT_ERROR),
    ];
    for (file, expected) in cases {
        let (code, _, err) = call(&["tally", &path(file)]);
        assert_eq!(code, expected, "{file}: {err}");
        if expected == EXIT_ERROR {
            assert!(err.starts_with("error: ") || err.starts_with("invalid ballot"), "{err}");
        }
    }
}

#[test]
fn invalid_ballots_are_listed_with_lines() {
    let (code, out, err) = call(&["tally", &path("invalid.csv"), "--candidates", "A,B,NULL"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.is_empty());
    assert!(err.contains("line 2") && err.contains("ranked twice"), "{err}");
    assert!(err.contains("line 3") && err.contains("unknown candidate `Q`"), "{err}");
}

#[test]
fn inline_roster_wins_with_a_warning() {
    let (code, out, err) = call(&["tally", &path("null_wins.csv"), "--candidates", "A,B,C,NULL"]);
    assert_eq!(code, EXIT_NULL_WINNER);
    assert!(err.contains("warning: --candidates differs"), "{err}");
    let header: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(header, ["A", "B", "C", "NULL"]);
}

#[test]
fn num_prefs_flag() {
    let (code, out, _) = call(&[
        "tally",
        &path("concrete_example.csv"),
        "--num-prefs",
        "1",
        "--rule",
        "basic",
        "--alpha",
        "0",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(!out.contains("Stage2"));
    assert_eq!(decision_block(&out)["winner"], "A");
    let (code, _, err) = call(&["tally", &path("concrete_example.csv"), "--num-prefs", "7"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("--num-prefs"));
}

#[test]
fn simulate_missing_key() {
    let (code, out, err) = call(&["simulate", &path("sim_missing_voters.json")]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.is_empty());
    assert!(err.contains("numVoters"), "{err}");
}

#[test]
fn simulate_is_deterministic() {
    let p = path("sim_small.json");
    let (code, a, _) = call(&["simulate", &p]);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = call(&["simulate", &p]);
    let (_, c, _) = call(&["simulate", &p, "--serial"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let (_, d, _) = call(&["simulate", &p, "--seed", "43"]);
    assert_ne!(a, d);
    assert!(d.contains("seed : 43"));
}

#[test]
fn simulate_json_matches_text() {
    let p = path("sim_small.json");
    let (_, text, _) = call(&["simulate", &p]);
    let (_, json, _) = call(&["simulate", &p, "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = doc["metrics"].as_array().unwrap();
    let table = text.split("Algorithms\n").nth(1).unwrap();
    for (row, line) in rows.iter().zip(table.lines()) {
        let label = row["label"].as_str().unwrap();
        assert!(line.starts_with(label), "{line}");
        let nums: Vec<f64> = line[label.len()..]
            .split_whitespace()
            .map(|x| x.parse().unwrap())
            .collect();
        let expect = [
            row["meanWinnerRank"].as_f64().unwrap(),
            row["rateTrueWinners"].as_f64().unwrap(),
            row["rateWinnerBelowNull"].as_f64().unwrap(),
        ];
        for (n, e) in nums.iter().zip(expect) {
            assert!((n - e).abs() <= 0.0005 + 1e-12, "{label}: {n} vs {e}");
        }
    }
    let ranks: Vec<f64> = rows.iter().map(|r| r["meanWinnerRank"].as_f64().unwrap()).collect();
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn full_size_config_header() {
    let text = std::fs::read_to_string(fixture("sim_full.json")).unwrap();
    let (mut cfg, warnings) = SimConfig::from_json(&text).unwrap();
    assert_eq!(warnings.len(), 2);
    assert_eq!((cfg.num_candidates, cfg.num_voters, cfg.num_elections), (20, 500, 500));
    // A shortened run keeps the test fast.
    cfg.num_voters = 60;
    cfg.num_elections = 20;
    let run = run_simulation(&cfg, RunOptions::default());
    let ranks: Vec<f64> = run.metrics.rows.iter().map(|r| r.mean_winner_rank).collect();
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(run.metrics.rows.len(), 84 + 1 + 5);
    assert!(run.to_text().contains("columnBlindness : 9\n"));
}

#[test]
fn binary_reads_seed_from_environment() {
    let bin = env!("CARGO_BIN_EXE_stagevote");
    let p = path("sim_small.json");
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(bin);
        cmd.arg("simulate").arg(&p).args(extra);
        match env {
            Some(v) => cmd.env("STAGEVOTE_SEED", v),
            None => cmd.env_remove("STAGEVOTE_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let from_env = run(Some("7"), &[]);
    assert!(from_env.contains("seed : 7\n"));
    assert_eq!(from_env, run(None, &["--seed", "7"]));
    assert!(run(None, &[]).contains("seed : 42\n"));

    let out = Command::new(bin)
        .args(["tally", &path("null_wins.csv")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NULL_WINNER));
    let out = Command::new(bin)
        .args(["min-stages", "100", "5", "0.5"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "3\n");
}
