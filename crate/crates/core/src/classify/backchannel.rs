use rayon::prelude::*;
use serde_json::{Map, Value};

use super::MALFORMED_RETRIES;
use crate::config::PipelineConfig;
use crate::gateway::{extract_trailing_json, ChatClient, ChatRequest, GatewayError};
use crate::model::{
    normalize_label, Conversation, Emotion5, LaughMarker, Response, ResponseId, ResponseLabel, Sentiment5, Token,
    Warning,
};
use crate::template::render;

pub const BACKCHANNEL_TEMPLATE: &str = include_str!("../../assets/backchannel_prompt.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterjectionType {
    Emotive,
    Cognitive,
    NotBackchannel,
}

impl InterjectionType {
    pub fn parse(s: &str) -> Option<InterjectionType> {
        match normalize_label(s).as_str() {
            "emotive" | "emotive backchannel" => Some(InterjectionType::Emotive),
            "cognitive" | "cognitive backchannel" => Some(InterjectionType::Cognitive),
            "not backchannel" | "not a backchannel" | "no backchannel" | "notbackchannel" | "none" => {
                Some(InterjectionType::NotBackchannel)
            }
            _ => None,
        }
    }

    pub fn label(self) -> ResponseLabel {
        match self {
            InterjectionType::Emotive => ResponseLabel::EmotiveBackchannel,
            InterjectionType::Cognitive => ResponseLabel::CognitiveBackchannel,
            InterjectionType::NotBackchannel => ResponseLabel::UnsuccessfulInterjection,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackchannelVerdict {
    pub interjection_type: InterjectionType,
    pub emotion5: Emotion5,
    pub sentiment5: Sentiment5,
}

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("response {0} is not pending backchannel classification")]
    NotPending(ResponseId),
    #[error("response {0} has no overlappee partner")]
    MissingPartner(ResponseId),
}

fn speaker_line(r: &Response) -> String {
    format!("Speaker {}: {}", r.speaker, r.text())
}

/// Token index before which the target marker goes.
///
/// Boundary `k` sits between tokens `k-1` and `k`; inner boundaries are timed
/// at the midpoint of the gap. The boundary nearest `at` wins, earlier on
/// ties. A boundary that would separate a laugh marker from its word is skipped.
pub fn insertion_index(tokens: &[Token], at: crate::model::Timestamp) -> usize {
    let n = tokens.len();
    let mut best: Option<(i64, usize)> = None;
    for k in 0..=n {
        if k > 0 && tokens[k - 1].laugh_marker() == Some(LaughMarker::StartLaugh) {
            continue;
        }
        if k < n && tokens[k].laugh_marker() == Some(LaughMarker::EndLaugh) {
            continue;
        }
        let t = match k {
            0 => tokens.first().map(|t| t.start.micros()).unwrap_or(0),
            k if k == n => tokens[n - 1].end.micros(),
            k => (tokens[k - 1].end.micros() + tokens[k].start.micros()) / 2,
        };
        let dist = (t - at.micros()).abs();
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, k));
        }
    }
    best.map_or(0, |(_, k)| k)
}

/// Renders the classification prompt for one pending response.
pub fn build_backchannel_prompt(conv: &Conversation, target: &Response, cfg: &PipelineConfig) -> Result<String, PromptError> {
    if target.label != ResponseLabel::PendingBackchannel {
        return Err(PromptError::NotPending(target.id));
    }
    let partner = target.overlap.map(|o| o.partner).ok_or(PromptError::MissingPartner(target.id))?;
    let host = conv
        .response(partner)
        .filter(|h| h.speaker != target.speaker)
        .ok_or(PromptError::MissingPartner(target.id))?;

    let history: Vec<&Response> = conv.responses.iter().filter(|r| r.id != target.id).collect();
    let pos = history.iter().position(|r| r.id == host.id).expect("host is in history");
    let lo = pos.saturating_sub(cfg.context_before);
    let hi = (pos + cfg.context_after).min(history.len() - 1);

    let marker = format!("{{{{{{(TARGET) {}}}}}}}", speaker_line(target));
    let mut lines = Vec::with_capacity(hi - lo + 1);
    for r in &history[lo..=hi] {
        if r.id != host.id {
            lines.push(speaker_line(r));
            continue;
        }
        let k = insertion_index(&r.tokens, target.start);
        let mut parts: Vec<&str> = r.tokens.iter().map(Token::text).collect();
        parts.insert(k, &marker);
        lines.push(format!("Speaker {}: {}", r.speaker, parts.join(" ")));
    }

    let text = target.text();
    let speaker = target.speaker.as_str();
    let dialog = lines.join("\n");
    Ok(render(BACKCHANNEL_TEMPLATE, &[("target_text", &text), ("target_speaker", speaker), ("dialog", &dialog)])
        .expect("bundled template is well-formed"))
}

fn field<'a>(obj: &'a Map<String, Value>, names: &[&str]) -> Option<&'a str> {
    obj.iter().find_map(|(k, v)| {
        let key: String = k.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        names.contains(&key.as_str()).then(|| v.as_str()).flatten()
    })
}

/// Reads the verdict from the trailing JSON object of a model reply.
pub fn parse_verdict(reply: &str) -> Option<BackchannelVerdict> {
    let obj = extract_trailing_json(reply).ok()?;
    let kind = field(&obj, &["interjectiontype", "type", "backchanneltype", "classification"])?;
    Some(BackchannelVerdict {
        interjection_type: InterjectionType::parse(kind)?,
        emotion5: Emotion5::parse(field(&obj, &["emotion"])?)?,
        sentiment5: Sentiment5::parse(field(&obj, &["sentiment"])?)?,
    })
}

#[derive(Debug, thiserror::Error)]
#[error("backchannel resolution stopped at response {response}: {source} ({resolved} resolved before the failure)")]
pub struct ResolveError {
    pub response: ResponseId,
    pub resolved: usize,
    #[source]
    pub source: GatewayError,
}

enum Outcome {
    Verdict(BackchannelVerdict),
    Malformed,
    Failed(GatewayError),
}

fn query(client: &dyn ChatClient, prompt: &str, cfg: &PipelineConfig, tag: &str) -> Outcome {
    let req = ChatRequest::single(&cfg.llm.model, prompt, cfg.llm.classification_temperature, cfg.llm.max_tokens, tag);
    for _ in 0..=MALFORMED_RETRIES {
        match client.complete(&req) {
            Ok(reply) => {
                if let Some(v) = parse_verdict(&reply) {
                    return Outcome::Verdict(v);
                }
            }
            Err(e) => return Outcome::Failed(e),
        }
    }
    Outcome::Malformed
}

/// Resolves every pending response through the chat client.
///
/// Verdicts are gathered concurrently and committed in response order.
/// Unparseable replies become unsuccessful interjections with a warning. On a
/// client error every verdict obtained is still committed, the failed
/// responses stay pending, and the first failure is returned.
pub fn resolve_backchannels(
    conv: &mut Conversation,
    client: &dyn ChatClient,
    cfg: &PipelineConfig,
) -> Result<Vec<Warning>, ResolveError> {
    let targets: Vec<usize> = conv
        .responses
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == ResponseLabel::PendingBackchannel)
        .map(|(i, _)| i)
        .collect();
    let snapshot: &Conversation = conv;
    let outcomes: Vec<(usize, Outcome)> = targets
        .par_iter()
        .map(|&i| {
            let r = &snapshot.responses[i];
            let outcome = match build_backchannel_prompt(snapshot, r, cfg) {
                Ok(p) => query(client, &p, cfg, &format!("backchannel:{}:{}", snapshot.id, r.id)),
                Err(_) => Outcome::Malformed,
            };
            (i, outcome)
        })
        .collect();

    let mut warnings = Vec::new();
    let mut first_error = None;
    let mut resolved = 0;
    for (i, outcome) in outcomes {
        let id = conv.responses[i].id;
        let r = &mut conv.responses[i];
        match outcome {
            Outcome::Verdict(v) => {
                r.label = v.interjection_type.label();
                r.bc_emotion5 = Some(v.emotion5);
                r.bc_sentiment5 = Some(v.sentiment5);
                resolved += 1;
            }
            Outcome::Malformed => {
                r.label = ResponseLabel::UnsuccessfulInterjection;
                resolved += 1;
                warnings.push(
                    Warning::new("no parseable backchannel verdict; labeled unsuccessful interjection")
                        .in_conversation(&conv.id)
                        .at_response(id),
                );
            }
            Outcome::Failed(e) => {
                if first_error.is_none() {
                    first_error = Some((id, e));
                }
            }
        }
    }
    match first_error {
        None => Ok(warnings),
        Some((response, source)) => Err(ResolveError { response, resolved, source }),
    }
}
