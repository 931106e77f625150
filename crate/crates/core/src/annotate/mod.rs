//! Laugh-token integration, response segmentation and overlap labeling.

mod laughs;
mod overlap;
mod segment;

pub use laughs::integrate_laughs;
pub use overlap::{assign_candidate_labels, classify_pair, detect_overlaps, sort_annotations};
pub use segment::build_responses;

use crate::config::PipelineConfig;
use crate::ingest::TranscriptDocument;
use crate::model::{Conversation, Duration, Response, ResponseId, SpeakerId};

/// Segments one speaker's channel: silence trimming, laugh tokens, gap merging.
pub fn speaker_responses(doc: &TranscriptDocument, speaker: SpeakerId, cfg: &PipelineConfig) -> Vec<Response> {
    let words = doc.trimmed_words(speaker);
    let tokens = integrate_laughs(&words, &doc.laughs_of(speaker));
    build_responses(&tokens, cfg.gap_threshold())
}

/// Runs segmentation and overlap labeling for both speakers.
///
/// Responses are ordered by `(start, speaker)` and renumbered `0..n`. Labels
/// are candidates: fully-overlapped responses are left `PendingBackchannel`.
pub fn annotate_document(doc: &TranscriptDocument, cfg: &PipelineConfig) -> Conversation {
    let mut responses: Vec<Response> = SpeakerId::BOTH
        .iter()
        .flat_map(|s| speaker_responses(doc, *s, cfg))
        .collect();
    responses.sort_by_key(|r| (r.start, r.speaker));
    for (i, r) in responses.iter_mut().enumerate() {
        r.id = ResponseId(i as u32);
    }

    let side = |s: SpeakerId| responses.iter().filter(|r| r.speaker == s).cloned().collect::<Vec<_>>();
    let overlaps = detect_overlaps(&side(SpeakerId::A), &side(SpeakerId::B), cfg.min_overlap());
    assign_candidate_labels(&mut responses, &overlaps);

    let last_end = responses.iter().map(|r| r.end).max().unwrap_or_default();
    let duration = doc.duration.max(Duration::from_micros(last_end.micros()));
    Conversation { id: doc.conversation_id.clone(), duration, responses, overlaps, source: None }
}
