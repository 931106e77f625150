mod common;

use std::time::Instant;

use common::{duplex, ok, read_jsonl, run_pipeline, tree};

#[test]
fn pipeline_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let t0 = Instant::now();
    let out_a = run_pipeline(a.path(), 42, 10);
    let out_b = run_pipeline(b.path(), 42, 10);
    assert!(t0.elapsed().as_secs_f64() < 120.0, "two runs took {:?}", t0.elapsed());
    assert_eq!(out_a, out_b);
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(tb[k] == *v, "{} differs between runs", k.display());
    }
    for m in ["synth", "annotate", "attributes", "predict", "eval"] {
        assert!(ta.keys().any(|k| k.ends_with(format!("manifest.{m}.json"))), "manifest for {m}");
    }
    assert_eq!(ta.keys().filter(|k| k.starts_with("out/prompts")).count(), 20);
}

#[test]
fn different_seed_changes_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(a.path(), &["--seed", "1", "synth", "--count", "2"]);
    ok(b.path(), &["--seed", "2", "synth", "--count", "2"]);
    assert_ne!(tree(a.path()), tree(b.path()));
}

#[test]
fn missing_endpoint_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--count", "1"]);
    let out = duplex(d.path(), &["annotate", "out/transcripts"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("endpoint"), "{err}");
    assert!(!d.path().join("out/datasets").exists(), "nothing is written before services are ready");
}

#[test]
fn predictions_carry_five_queries_and_prompts_follow_features() {
    let d = tempfile::tempdir().unwrap();
    run_pipeline(d.path(), 3, 4);
    for p in read_jsonl(&d.path().join("out/predictions.jsonl")) {
        assert_eq!(p["query_count"], 5);
        assert_eq!(p["raw_labels"].as_array().unwrap().len(), 5);
    }
    let full = std::fs::read_to_string(d.path().join("out/prompts/synth_3_0000_A.txt")).unwrap();
    assert!(full.contains("Basic Statistics:") && full.contains("Sample Responses:"));

    ok(d.path(), &["--out-dir", "samples_only", "predict", "--mock", "--features", "samples", "--attributes", "out", "out/datasets"]);
    let p = std::fs::read_to_string(d.path().join("samples_only/prompts/synth_3_0000_A.txt")).unwrap();
    assert!(p.contains("Sample Responses:"));
    for h in ["Basic Statistics:", "Emotions:", "Sentiment:", "(average:"] {
        assert!(!p.contains(h), "{h} present with --features samples");
    }
}

#[test]
fn self_evaluation_is_perfect() {
    let d = tempfile::tempdir().unwrap();
    run_pipeline(d.path(), 5, 4);
    ok(d.path(), &["--out-dir", "self", "eval", "--predictions", "out/predictions.jsonl", "--human", "out/predictions.jsonl"]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("self/metrics.json")).unwrap()).unwrap();
    let sim = &m["similarity"];
    assert!((sim["cosine"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{sim}");
    for (t, r) in sim["correlation"]["scores"].as_object().unwrap() {
        let r = r.as_f64().unwrap();
        // a trait every speaker scored identically correlates as 0 with a warning
        assert!((r - 1.0).abs() < 1e-12 || r == 0.0, "{t}: {r}");
    }
}

#[test]
fn mismatched_speaker_sets_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    run_pipeline(d.path(), 6, 3);
    let labels = std::fs::read_to_string(d.path().join("out/human_labels.jsonl")).unwrap();
    let fewer: String = labels.lines().skip(1).map(|l| format!("{l}\n")).collect();
    std::fs::write(d.path().join("fewer.jsonl"), fewer).unwrap();
    let out = duplex(d.path(), &["--out-dir", "e", "eval", "--predictions", "out/predictions.jsonl", "--human", "fewer.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("without labels: synth_6_0000/A"), "{err}");
}

#[test]
fn trend_table_missing_row_is_named() {
    let d = tempfile::tempdir().unwrap();
    run_pipeline(d.path(), 8, 4);
    let table = duplex_core::evaluate::DEFAULT_TREND_TABLE;
    let cut: String = table.lines().filter(|l| !l.starts_with("laughs_per_min")).map(|l| format!("{l}\n")).collect();
    assert_ne!(cut.len(), table.len());
    std::fs::write(d.path().join("table.csv"), cut).unwrap();
    let out = duplex(
        d.path(),
        &["--out-dir", "t", "eval", "--predictions", "out/predictions.jsonl", "--attributes", "out", "--trend-table", "table.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("laughs_per_min"), "{err}");
}

#[test]
fn zero_overlap_synth_yields_only_turns() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--seed", "9", "synth", "--count", "3", "--no-overlap"]);
    ok(d.path(), &["--seed", "9", "annotate", "--mock", "out/transcripts"]);
    let mut n = 0;
    for e in std::fs::read_dir(d.path().join("out/datasets")).unwrap() {
        for line in read_jsonl(&e.unwrap().path()).iter().skip(1) {
            assert_eq!(line["label"], "turn", "{line}");
            assert!(line["overlap"].is_null());
            n += 1;
        }
    }
    assert!(n > 30);
}

#[test]
fn identical_speakers_bucket_normal() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--count", "1"]);
    ok(d.path(), &["annotate", "--mock", "out/transcripts"]);
    // the same conversation four times under different ids
    let src = std::fs::read_to_string(d.path().join("out/datasets/synth_0_0000.jsonl")).unwrap();
    std::fs::create_dir(d.path().join("copies")).unwrap();
    for i in 0..4 {
        let text = src.replace("synth_0_0000", &format!("copy_{i}"));
        std::fs::write(d.path().join(format!("copies/copy_{i}.jsonl")), text).unwrap();
    }
    ok(d.path(), &["--out-dir", "attrs", "attributes", "copies"]);
    // two distinct values four times each: |d| is half the IQR
    let rows = read_jsonl(&d.path().join("attrs/buckets.jsonl"));
    assert_eq!(rows.len(), 8);
    for row in rows {
        for pair in row["buckets"].as_array().unwrap() {
            assert_eq!(pair[1], "normal", "{} of {}/{}", pair[0], row["conversation_id"], row["speaker"]);
        }
    }
}

#[test]
fn inputs_are_not_modified() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--count", "2"]);
    let before = tree(&d.path().join("out/transcripts"));
    // outputs land in the same directory tree as the inputs
    ok(d.path(), &["annotate", "--mock", "out/transcripts"]);
    ok(d.path(), &["attributes", "out/datasets"]);
    assert_eq!(before, tree(&d.path().join("out/transcripts")));
}

#[test]
fn per_item_failures_exit_one() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--count", "2"]);
    std::fs::write(d.path().join("out/transcripts/broken.json"), "{ not json").unwrap();
    let out = duplex(d.path(), &["annotate", "--mock", "out/transcripts"]);
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("out/manifest.annotate.json")).unwrap()).unwrap();
    assert_eq!(manifest["items_ok"], 2);
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 1);
    assert!(manifest["failures"][0]["item"].as_str().unwrap().ends_with("broken.json"));
}

#[test]
fn invalid_config_exits_two() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.toml"), "bucket_k1 = 2.0\nbucket_k2 = 1.0\n").unwrap();
    let out = duplex(d.path(), &["--config", "bad.toml", "synth"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(d.path().join("typo.toml"), "bucket_kk = 1.0\n").unwrap();
    assert_eq!(duplex(d.path(), &["--config", "typo.toml", "synth"]).status.code(), Some(2));
}
