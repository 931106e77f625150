#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_duplex");
pub const EPOCH: &str = "1700000000";

/// Runs the binary in `cwd` with a fixed clock and no ambient endpoint.
pub fn duplex(cwd: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .env_remove("DUPLEX_ENDPOINT")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn ok(cwd: &Path, args: &[&str]) -> Output {
    let out = duplex(cwd, args);
    assert!(
        out.status.success(),
        "duplex {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// synth, annotate, attributes, predict and eval with mock services.
pub fn run_pipeline(cwd: &Path, seed: u64, count: usize) -> Vec<String> {
    let seed = seed.to_string();
    let count = count.to_string();
    let steps: Vec<Vec<&str>> = vec![
        vec!["--seed", &seed, "synth", "--count", &count],
        vec!["--seed", &seed, "annotate", "--mock", "out/transcripts"],
        vec!["--seed", &seed, "attributes", "out/datasets"],
        vec!["--seed", &seed, "predict", "--mock", "--attributes", "out", "out/datasets"],
        vec!["--seed", &seed, "eval", "--predictions", "out/predictions.jsonl", "--human", "out/human_labels.jsonl", "--attributes", "out"],
    ];
    let mut stdout = Vec::new();
    for s in &steps {
        stdout.push(String::from_utf8(ok(cwd, s).stdout).unwrap());
    }
    stdout
}

/// Every regular file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn read_jsonl(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
