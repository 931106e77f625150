//! Inputs shared by the benchmarks.

use duplex_core::annotate::annotate_document;
use duplex_core::attributes::SpeakerAttributes;
use duplex_core::ingest::TranscriptDocument;
use duplex_core::pipeline::batch_attributes;
use duplex_core::synth::{generate_conversation, SynthProfile};
use duplex_core::PipelineConfig;

/// `n` generated transcripts with the default event rates.
pub fn transcripts(n: u64) -> Vec<TranscriptDocument> {
    let cfg = PipelineConfig::default();
    (0..n).map(|seed| generate_conversation(seed, &SynthProfile::default(), &cfg).expect("default profile generates").transcript).collect()
}

/// Attribute rows for a cohort of `n` conversations, labeled without any
/// chat backend: pending backchannels stay pending.
pub fn cohort(n: u64) -> Vec<SpeakerAttributes> {
    let cfg = PipelineConfig::default();
    let convs: Vec<_> = transcripts(n).iter().map(|d| annotate_document(d, &cfg)).collect();
    batch_attributes(&convs).0
}

/// A chat reply with a long reasoning prefix full of braces and a trailing object.
pub fn noisy_reply(prefix_lines: usize) -> String {
    let mut s = String::new();
    for i in 0..prefix_lines {
        s.push_str(&format!("Step {i}: the speaker says {{so}} and {{\"draft\": {i}}} then }} {{\n"));
    }
    s.push_str("Final answer:\n```json\n{\"interjection text\": \"yeah\", \"interjection type\": \"cognitive\", \"emotion\": \"neutral\", \"sentiment\": \"neutral\"}\n```\n");
    s
}
