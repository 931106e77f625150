//! Exact-threshold geometries, read from transcript JSON so that the
//! seconds-to-microseconds conversion is part of what is checked.

use duplex_core::annotate::annotate_document;
use duplex_core::ingest::parse_transcript;
use duplex_core::synth::brute_force_labels;
use duplex_core::{Conversation, OverlapKind, PipelineConfig, ResponseLabel, SpeakerId};
use serde_json::json;

/// Each span is one word `(speaker, start, end)`.
fn annotate(spans: &[(&str, f64, f64)]) -> Conversation {
    let words = |sp: &str| {
        spans
            .iter()
            .enumerate()
            .filter(|(_, s)| s.0 == sp)
            .map(|(i, s)| json!({"text": format!("w{i}"), "start": s.1, "end": s.2}))
            .collect::<Vec<_>>()
    };
    let doc = json!({
        "conversation_id": "edge",
        "duration_s": 30.0,
        "channels": [{"speaker": "A", "words": words("A")}, {"speaker": "B", "words": words("B")}],
    });
    let doc = parse_transcript(doc.to_string().as_bytes()).unwrap();
    let cfg = PipelineConfig::default();
    let conv = annotate_document(&doc, &cfg);
    assert_eq!(conv.responses.iter().map(|r| r.label).collect::<Vec<_>>(), brute_force_labels(&conv.responses, cfg.min_overlap()));
    conv
}

fn labels(conv: &Conversation) -> Vec<(SpeakerId, ResponseLabel)> {
    conv.responses.iter().map(|r| (r.speaker, r.label)).collect()
}

#[test]
fn gap_of_exactly_threshold_splits() {
    let conv = annotate(&[("A", 0.0, 1.0), ("A", 1.7, 2.5)]);
    assert_eq!(conv.responses.len(), 2);
    let conv = annotate(&[("A", 0.0, 1.0), ("A", 1.699, 2.5)]);
    assert_eq!(conv.responses.len(), 1);
    let conv = annotate(&[("A", 0.1, 0.3), ("A", 1.0, 1.2), ("A", 1.899, 2.0)]);
    assert_eq!(conv.responses.iter().map(|r| r.tokens.len()).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn overlap_of_exactly_minimum_counts() {
    use ResponseLabel::*;
    let conv = annotate(&[("A", 0.0, 5.0), ("B", 4.3, 6.0)]);
    assert_eq!(labels(&conv), vec![(SpeakerId::A, Turn), (SpeakerId::B, SuccessfulInterjection)]);
    assert_eq!(conv.overlaps.len(), 1);
    assert_eq!(conv.overlaps[0].duration().micros(), 700_000);
    let conv = annotate(&[("A", 0.0, 5.0), ("B", 4.301, 6.0)]);
    assert_eq!(labels(&conv), vec![(SpeakerId::A, Turn), (SpeakerId::B, Turn)]);
    assert!(conv.overlaps.is_empty());
    // fully contained, exactly the minimum long
    let conv = annotate(&[("A", 0.0, 5.0), ("B", 2.0, 2.7)]);
    assert_eq!(labels(&conv)[1], (SpeakerId::B, PendingBackchannel));
    let conv = annotate(&[("A", 0.0, 5.0), ("B", 2.0, 2.699)]);
    assert_eq!(labels(&conv)[1], (SpeakerId::B, Turn));
}

#[test]
fn end_time_tie_is_partial() {
    let conv = annotate(&[("A", 0.0, 5.0), ("B", 3.0, 5.0)]);
    assert_eq!(conv.overlaps[0].kind, OverlapKind::Partial);
    assert_eq!(labels(&conv)[1], (SpeakerId::B, ResponseLabel::SuccessfulInterjection));
    let conv = annotate(&[("A", 0.0, 5.001), ("B", 3.0, 5.0)]);
    assert_eq!(conv.overlaps[0].kind, OverlapKind::Fully);
    assert_eq!(labels(&conv)[1], (SpeakerId::B, ResponseLabel::PendingBackchannel));
}

#[test]
fn equal_starts_never_overlap() {
    let conv = annotate(&[("A", 1.0, 3.0), ("B", 1.0, 4.0)]);
    assert!(conv.overlaps.is_empty());
    assert!(conv.responses.iter().all(|r| r.label == ResponseLabel::Turn));
}

#[test]
fn chained_interjections() {
    use ResponseLabel::*;
    // B cuts into A, then A cuts back into B
    let conv = annotate(&[("A", 0.0, 3.0), ("B", 1.0, 2.0), ("B", 2.1, 6.0), ("A", 5.0, 7.0)]);
    assert_eq!(labels(&conv), vec![(SpeakerId::A, Turn), (SpeakerId::B, SuccessfulInterjection), (SpeakerId::A, SuccessfulInterjection)]);
    assert_eq!(conv.responses[1].tokens.len(), 2);
    assert_eq!(conv.overlaps.len(), 2);
}
