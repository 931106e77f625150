//! Transcript input: parsing, validation and silence trimming.
//!
//! A transcript file is a JSON object holding two word channels (one per
//! speaker), detected laughter and optional silence intervals:
//!
//! ```json
//! {
//!   "conversation_id": "fe_03_00001",
//!   "duration_s": 600.0,
//!   "channels": [
//!     {"speaker": "A", "words": [{"text": "hello", "start": 0.5, "end": 0.9}]},
//!     {"speaker": "B", "words": []}
//!   ],
//!   "laughs": [{"speaker": "B", "start": 3.0, "end": 3.8}],
//!   "silences": [{"speaker": "A", "start": 0.9, "end": 1.1}]
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::model::{Duration, LaughEvent, SpeakerId, Timestamp, WordToken};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed transcript at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid transcript at {location}: {message}")]
    Invalid { location: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::Invalid { location: location.into(), message: message.into() }
}

/// Half-open time interval `[start, end)` on one speaker's channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Interval {
    pub fn new(start: Timestamp, end: Timestamp) -> Self {
        Interval { start, end }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub speaker: SpeakerId,
    pub words: Vec<WordToken>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptDocument {
    pub conversation_id: String,
    pub duration: Duration,
    pub channels: [Channel; 2],
    pub laughs: Vec<LaughEvent>,
    /// `None` when the file carries no `silences` field.
    pub silences: Option<Vec<(SpeakerId, Interval)>>,
}

impl TranscriptDocument {
    pub fn channel(&self, speaker: SpeakerId) -> &Channel {
        self.channels.iter().find(|c| c.speaker == speaker).expect("both speakers present")
    }

    pub fn laughs_of(&self, speaker: SpeakerId) -> Vec<LaughEvent> {
        self.laughs.iter().filter(|l| l.speaker == speaker).copied().collect()
    }

    pub fn silences_of(&self, speaker: SpeakerId) -> Vec<Interval> {
        self.silences
            .iter()
            .flatten()
            .filter(|(s, _)| *s == speaker)
            .map(|(_, i)| *i)
            .collect()
    }

    /// The speaker's words with silence trimming applied.
    pub fn trimmed_words(&self, speaker: SpeakerId) -> Vec<WordToken> {
        trim_silences(&self.channel(speaker).words, &self.silences_of(speaker))
    }
}

// Wire structs mirror the file schema one-to-one.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    conversation_id: String,
    duration_s: f64,
    channels: Vec<RawChannel>,
    #[serde(default)]
    laughs: Vec<RawSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    silences: Option<Vec<RawSpan>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    speaker: String,
    words: Vec<RawWord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWord {
    text: String,
    start: f64,
    end: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpan {
    speaker: String,
    start: f64,
    end: f64,
}

/// Lowercases and strips punctuation other than in-word apostrophes and hyphens.
pub fn normalize_word(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let kept: String = lowered.chars().filter(|c| c.is_alphanumeric() || *c == '\'' || *c == '-').collect();
    kept.trim_matches(|c| c == '\'' || c == '-').to_string()
}

fn time(v: f64, location: &str) -> Result<Timestamp, IngestError> {
    if !v.is_finite() || v < 0.0 {
        return Err(invalid(location, format!("time {v} must be a finite number >= 0")));
    }
    Ok(Timestamp::from_secs_f64(v))
}

fn speaker(s: &str, location: &str) -> Result<SpeakerId, IngestError> {
    SpeakerId::parse(s).ok_or_else(|| invalid(location, format!("speaker must be \"A\" or \"B\", got {s:?}")))
}

pub fn parse_transcript(bytes: &[u8]) -> Result<TranscriptDocument, IngestError> {
    let raw: RawDocument = serde_json::from_slice(bytes).map_err(|e| IngestError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn validate(raw: RawDocument) -> Result<TranscriptDocument, IngestError> {
    if raw.conversation_id.trim().is_empty() {
        return Err(invalid("conversation_id", "must be non-empty"));
    }
    if !raw.duration_s.is_finite() || raw.duration_s < 0.0 {
        return Err(invalid("duration_s", "must be a finite number >= 0"));
    }
    if raw.channels.len() != 2 {
        return Err(invalid("channels", format!("expected exactly 2 channels, found {}", raw.channels.len())));
    }

    let mut channels = Vec::with_capacity(2);
    for (ci, ch) in raw.channels.into_iter().enumerate() {
        let spk = speaker(&ch.speaker, &format!("channels[{ci}].speaker"))?;
        let mut words: Vec<WordToken> = Vec::with_capacity(ch.words.len());
        let mut prev: Option<(Timestamp, Timestamp)> = None;
        for (wi, w) in ch.words.into_iter().enumerate() {
            let loc = format!("channels[{ci}].words[{wi}]");
            let start = time(w.start, &loc)?;
            let end = time(w.end, &loc)?;
            if start > end {
                return Err(invalid(loc, format!("start {} is after end {}", w.start, w.end)));
            }
            if w.text.trim().is_empty() {
                return Err(invalid(loc, "word text is empty"));
            }
            if w.text.chars().any(char::is_whitespace) {
                return Err(invalid(loc, format!("word text {:?} contains whitespace", w.text)));
            }
            if let Some((ps, pe)) = prev {
                if start < ps {
                    return Err(invalid(loc, "words are not in time order"));
                }
                if start < pe {
                    return Err(invalid(loc, "word overlaps the previous word on the same channel"));
                }
            }
            prev = Some((start, end));
            let text = normalize_word(&w.text);
            // punctuation-only tokens carry no word
            if text.is_empty() {
                continue;
            }
            words.push(WordToken { text, start, end, speaker: spk });
        }
        channels.push(Channel { speaker: spk, words });
    }
    if channels[0].speaker == channels[1].speaker {
        return Err(invalid("channels[1].speaker", "both channels name the same speaker"));
    }
    channels.sort_by_key(|c| c.speaker);
    let b = channels.pop().expect("two channels");
    let a = channels.pop().expect("two channels");

    let mut laughs = Vec::with_capacity(raw.laughs.len());
    for (i, l) in raw.laughs.iter().enumerate() {
        let loc = format!("laughs[{i}]");
        let spk = speaker(&l.speaker, &loc)?;
        let (start, end) = (time(l.start, &loc)?, time(l.end, &loc)?);
        if start >= end {
            return Err(invalid(loc, "laugh start must be before its end"));
        }
        laughs.push(LaughEvent { start, end, speaker: spk });
    }
    laughs.sort_by_key(|l| (l.speaker, l.start, l.end));

    let silences = match raw.silences {
        None => None,
        Some(list) => {
            let mut out = Vec::with_capacity(list.len());
            for (i, s) in list.iter().enumerate() {
                let loc = format!("silences[{i}]");
                let spk = speaker(&s.speaker, &loc)?;
                let (start, end) = (time(s.start, &loc)?, time(s.end, &loc)?);
                if start >= end {
                    return Err(invalid(loc, "silence start must be before its end"));
                }
                out.push((spk, Interval::new(start, end)));
            }
            out.sort_by_key(|(s, i)| (*s, i.start, i.end));
            for w in out.windows(2) {
                if w[0].0 == w[1].0 && w[1].1.start < w[0].1.end {
                    return Err(invalid("silences", format!("silences of speaker {} overlap", w[0].0)));
                }
            }
            Some(out)
        }
    };

    Ok(TranscriptDocument {
        conversation_id: raw.conversation_id,
        duration: Duration::from_secs_f64(raw.duration_s),
        channels: [a, b],
        laughs,
        silences,
    })
}

pub fn serialize_transcript(doc: &TranscriptDocument) -> Vec<u8> {
    let span = |speaker: SpeakerId, start: Timestamp, end: Timestamp| RawSpan {
        speaker: speaker.as_str().to_string(),
        start: start.as_secs_f64(),
        end: end.as_secs_f64(),
    };
    let raw = RawDocument {
        conversation_id: doc.conversation_id.clone(),
        duration_s: doc.duration.as_secs_f64(),
        channels: doc
            .channels
            .iter()
            .map(|c| RawChannel {
                speaker: c.speaker.as_str().to_string(),
                words: c
                    .words
                    .iter()
                    .map(|w| RawWord { text: w.text.clone(), start: w.start.as_secs_f64(), end: w.end.as_secs_f64() })
                    .collect(),
            })
            .collect(),
        laughs: doc.laughs.iter().map(|l| span(l.speaker, l.start, l.end)).collect(),
        silences: doc.silences.as_ref().map(|v| v.iter().map(|(s, i)| span(*s, i.start, i.end)).collect()),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("transcript serializes");
    out.push(b'\n');
    out
}

/// Clips each word to its largest sub-span not covered by silence.
///
/// Ties between equally long sub-spans keep the earliest. Words entirely
/// inside silence are dropped. `silences` must be sorted and disjoint.
pub fn trim_silences(words: &[WordToken], silences: &[Interval]) -> Vec<WordToken> {
    if silences.is_empty() {
        return words.to_vec();
    }
    let mut out = Vec::with_capacity(words.len());
    // first silence that could still touch the current word
    let mut first = 0usize;
    for w in words {
        while first < silences.len() && silences[first].end <= w.start {
            first += 1;
        }
        if w.start == w.end {
            let covered = silences[first..]
                .iter()
                .take_while(|s| s.start <= w.start)
                .any(|s| s.start <= w.start && w.start < s.end);
            if !covered {
                out.push(w.clone());
            }
            continue;
        }
        let mut best: Option<(Timestamp, Timestamp)> = None;
        let mut cursor = w.start;
        let mut consider = |a: Timestamp, b: Timestamp| {
            if a < b && best.is_none_or(|(s, e)| b.micros() - a.micros() > e.micros() - s.micros()) {
                best = Some((a, b));
            }
        };
        for s in &silences[first..] {
            if s.start >= w.end {
                break;
            }
            consider(cursor, s.start.min(w.end));
            cursor = cursor.max(s.end);
            if cursor >= w.end {
                break;
            }
        }
        consider(cursor, w.end);
        if let Some((start, end)) = best {
            out.push(WordToken { text: w.text.clone(), start, end, speaker: w.speaker });
        }
    }
    out
}
