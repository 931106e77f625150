//! End-to-end wiring of the stages for one conversation or a batch.

use crate::annotate::annotate_document;
use crate::attributes::{compute_attributes, CohortMeans, SpeakerAttributes, SpeakerBuckets};
use crate::classify::{assign_affect, resolve_backchannels, ResolveError, TextClassifier};
use crate::config::PipelineConfig;
use crate::gateway::ChatClient;
use crate::ingest::TranscriptDocument;
use crate::model::{Conversation, SpeakerId, Warning};
use crate::personality::{build_personality_prompt, predict_personality, select_samples, PersonalityError, PromptFeatures, TraitPrediction};
use crate::rng::substream;

/// External services a run talks to.
#[derive(Clone, Copy)]
pub struct Services<'a> {
    pub chat: &'a dyn ChatClient,
    pub emotion: &'a dyn TextClassifier,
    pub sentiment: &'a dyn TextClassifier,
}

#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct AnnotateFailure {
    /// Conversation with every verdict obtained before the failure applied.
    pub partial: Box<Conversation>,
    pub error: ResolveError,
}

/// Segmentation, overlap labeling, backchannel resolution and affect labels.
pub fn annotate_transcript(
    doc: &TranscriptDocument,
    cfg: &PipelineConfig,
    services: Services<'_>,
) -> Result<(Conversation, Vec<Warning>), AnnotateFailure> {
    let mut conv = annotate_document(doc, cfg);
    let mut warnings = match resolve_backchannels(&mut conv, services.chat, cfg) {
        Ok(w) => w,
        Err(error) => return Err(AnnotateFailure { partial: Box::new(conv), error }),
    };
    warnings.extend(assign_affect(&mut conv, services.emotion, services.sentiment));
    Ok((conv, warnings))
}

/// Attributes of both speakers of every conversation, in input order.
pub fn batch_attributes(convs: &[Conversation]) -> (Vec<SpeakerAttributes>, Vec<Warning>) {
    let mut rows = Vec::with_capacity(convs.len() * 2);
    let mut warnings = Vec::new();
    for c in convs {
        for s in SpeakerId::BOTH {
            let (a, w) = compute_attributes(c, s);
            rows.push(a);
            warnings.extend(w);
        }
    }
    (rows, warnings)
}

/// Seed of the sample draw for one speaker, derived from the run seed.
pub fn sample_seed(run_seed: u64, conversation_id: &str, speaker: SpeakerId) -> u64 {
    substream(run_seed, &format!("samples/{conversation_id}/{speaker}"))
}

/// Builds the speaker's prompt and runs the repeated personality queries.
/// Every query reuses the same sampled responses.
#[allow(clippy::too_many_arguments)]
pub fn predict_speaker(
    conv: &Conversation,
    attrs: &SpeakerAttributes,
    buckets: &SpeakerBuckets,
    means: Option<&CohortMeans>,
    features: PromptFeatures,
    cfg: &PipelineConfig,
    client: &dyn ChatClient,
) -> Result<(TraitPrediction, String), PersonalityError> {
    let samples = if features.include_samples {
        select_samples(conv, attrs.speaker, cfg.sample_count, cfg.sample_min_dur(), sample_seed(cfg.rng_seed, &conv.id, attrs.speaker))
    } else {
        Vec::new()
    };
    let prompt = build_personality_prompt(attrs, buckets, &samples, means, features)?;
    let (scores, raw) = predict_personality(
        client,
        &prompt,
        cfg.personality_query_count,
        &cfg.llm.model,
        cfg.llm.personality_temperature,
        cfg.llm.max_tokens,
        &format!("personality:{}:{}", conv.id, attrs.speaker),
    )?;
    let prediction = TraitPrediction {
        conversation_id: conv.id.clone(),
        speaker: attrs.speaker,
        scores,
        query_count: raw.len(),
        raw_labels: raw,
    };
    Ok((prediction, prompt))
}
