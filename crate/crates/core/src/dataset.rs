//! Line-delimited dialog dataset: one header object, then one object per response.

use serde::{Deserialize, Serialize};

use crate::model::{
    Conversation, Duration, Emotion, Emotion5, LaughMarker, OverlapAnnotation, OverlapRef, Response, ResponseId,
    ResponseLabel, Sentiment, Sentiment5, SpeakerId, Timestamp, Token, TokenKind,
};

pub const DATASET_SCHEMA: &str = "duplex-dialog";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub schema: String,
    pub version: u32,
    pub conversation_id: String,
    pub duration_s: Duration,
    pub source: Option<String>,
    pub response_count: usize,
    pub overlaps: Vec<OverlapAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenRecord {
    pub text: String,
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseRecord {
    pub conversation_id: String,
    pub response_id: ResponseId,
    pub speaker: SpeakerId,
    pub start: Timestamp,
    pub end: Timestamp,
    pub label: ResponseLabel,
    pub text: String,
    pub overlap: Option<OverlapRef>,
    pub emotion: Emotion,
    pub sentiment: Sentiment,
    pub bc_emotion5: Option<Emotion5>,
    pub bc_sentiment5: Option<Sentiment5>,
    /// Token timings, so that a dataset reloads without loss.
    pub tokens: Vec<TokenRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("dataset is empty")]
    Empty,
}

fn record(conv: &Conversation, r: &Response) -> ResponseRecord {
    ResponseRecord {
        conversation_id: conv.id.clone(),
        response_id: r.id,
        speaker: r.speaker,
        start: r.start,
        end: r.end,
        label: r.label,
        text: r.text(),
        overlap: r.overlap,
        emotion: r.emotion,
        sentiment: r.sentiment,
        bc_emotion5: r.bc_emotion5,
        bc_sentiment5: r.bc_sentiment5,
        tokens: r.tokens.iter().map(|t| TokenRecord { text: t.text().to_string(), start: t.start, end: t.end }).collect(),
    }
}

pub fn write_dataset(conv: &Conversation) -> String {
    let header = DatasetHeader {
        schema: DATASET_SCHEMA.into(),
        version: DATASET_VERSION,
        conversation_id: conv.id.clone(),
        duration_s: conv.duration,
        source: conv.source.clone(),
        response_count: conv.responses.len(),
        overlaps: conv.overlaps.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("serializable");
    out.push('\n');
    for r in &conv.responses {
        out.push_str(&serde_json::to_string(&record(conv, r)).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn read_dataset(text: &str) -> Result<Conversation, DatasetError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(DatasetError::Empty)?;
    let err = |line: usize, message: String| DatasetError::Line { line: line + 1, message };
    let header: DatasetHeader = serde_json::from_str(first).map_err(|e| err(0, e.to_string()))?;
    if header.schema != DATASET_SCHEMA || header.version != DATASET_VERSION {
        return Err(err(0, format!("unsupported schema {} v{}", header.schema, header.version)));
    }
    let mut responses = Vec::with_capacity(header.response_count);
    for (i, line) in lines {
        let rec: ResponseRecord = serde_json::from_str(line).map_err(|e| err(i, e.to_string()))?;
        if rec.conversation_id != header.conversation_id {
            return Err(err(i, format!("conversation id {:?} does not match header", rec.conversation_id)));
        }
        if rec.response_id != ResponseId(responses.len() as u32) {
            return Err(err(i, format!("expected response id {}, found {}", responses.len(), rec.response_id)));
        }
        if rec.tokens.is_empty() {
            return Err(err(i, "response has no tokens".into()));
        }
        let tokens = rec
            .tokens
            .iter()
            .map(|t| Token {
                kind: match LaughMarker::parse(&t.text) {
                    Some(m) => TokenKind::Laugh(m),
                    None => TokenKind::Word(t.text.clone()),
                },
                start: t.start,
                end: t.end,
                speaker: rec.speaker,
            })
            .collect();
        let mut r = Response::from_tokens(rec.response_id, rec.speaker, tokens);
        if r.start != rec.start || r.end != rec.end || r.text() != rec.text {
            return Err(err(i, "span or text disagrees with tokens".into()));
        }
        r.label = rec.label;
        r.overlap = rec.overlap;
        r.emotion = rec.emotion;
        r.sentiment = rec.sentiment;
        r.bc_emotion5 = rec.bc_emotion5;
        r.bc_sentiment5 = rec.bc_sentiment5;
        responses.push(r);
    }
    if responses.len() != header.response_count {
        return Err(err(0, format!("header announces {} responses, found {}", header.response_count, responses.len())));
    }
    let n = responses.len() as u32;
    let dangling = |id: ResponseId| id.0 >= n;
    if header.overlaps.iter().any(|o| dangling(o.overlapper) || dangling(o.overlappee))
        || responses.iter().any(|r| r.overlap.is_some_and(|o| dangling(o.partner)))
    {
        return Err(err(0, "overlap refers to a response that does not exist".into()));
    }
    Ok(Conversation {
        id: header.conversation_id,
        duration: header.duration_s,
        responses,
        overlaps: header.overlaps,
        source: header.source,
    })
}

/// Short labels of a dataset, in response order.
pub fn labels(conv: &Conversation) -> Vec<ResponseLabel> {
    conv.responses.iter().map(|r| r.label).collect()
}
