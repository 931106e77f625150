//! Domain types shared by every pipeline stage.
//!
//! Times are held as integer microseconds ([`Timestamp`]) so that threshold
//! comparisons (gap merging, minimum overlap) are exact. Files carry decimal
//! seconds; conversion rounds to the nearest microsecond.

mod affect;
mod traits;

pub use affect::{Emotion, Emotion5, Sentiment, Sentiment5};
pub(crate) use affect::normalize_label;
pub use traits::{average_scores, label_to_score, Trait, TraitLabel, TraitLabels, TraitScores};

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the two conversation-local speakers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpeakerId {
    A,
    B,
}

impl SpeakerId {
    pub const BOTH: [SpeakerId; 2] = [SpeakerId::A, SpeakerId::B];

    pub fn other(self) -> SpeakerId {
        match self {
            SpeakerId::A => SpeakerId::B,
            SpeakerId::B => SpeakerId::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeakerId::A => "A",
            SpeakerId::B => "B",
        }
    }

    pub fn parse(s: &str) -> Option<SpeakerId> {
        match s {
            "A" => Some(SpeakerId::A),
            "B" => Some(SpeakerId::B),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            SpeakerId::A => 0,
            SpeakerId::B => 1,
        }
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point in time, microseconds from the start of the recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub const fn from_micros(us: i64) -> Self {
        Timestamp(us)
    }

    pub const fn from_millis(ms: i64) -> Self {
        Timestamp(ms * 1000)
    }

    /// Rounds to the nearest microsecond. Non-finite input maps to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        if !s.is_finite() {
            return Timestamp(0);
        }
        Timestamp((s * 1e6).round() as i64)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, other: Timestamp) -> Duration {
        Duration(self.0.saturating_sub(other.0))
    }

    pub fn plus(self, d: Duration) -> Timestamp {
        Timestamp(self.0 + d.0)
    }

    pub fn minus(self, d: Duration) -> Timestamp {
        Timestamp(self.0 - d.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.as_secs_f64())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_secs_f64())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(d)?;
        if !secs.is_finite() {
            return Err(serde::de::Error::custom("timestamp must be finite"));
        }
        Ok(Timestamp::from_secs_f64(secs))
    }
}

/// A signed span of time in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Duration(i64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_micros(us: i64) -> Self {
        Duration(us)
    }

    pub const fn from_millis(ms: i64) -> Self {
        Duration(ms * 1000)
    }

    pub fn from_secs_f64(s: f64) -> Self {
        Duration(Timestamp::from_secs_f64(s).micros())
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

impl Serialize for Duration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_secs_f64())
    }
}

impl<'de> Deserialize<'de> for Duration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(d)?;
        if !secs.is_finite() {
            return Err(serde::de::Error::custom("duration must be finite"));
        }
        Ok(Duration::from_secs_f64(secs))
    }
}

/// A recognized word on one speaker's channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordToken {
    pub text: String,
    pub start: Timestamp,
    pub end: Timestamp,
    pub speaker: SpeakerId,
}

impl WordToken {
    pub fn new(text: impl Into<String>, start: Timestamp, end: Timestamp, speaker: SpeakerId) -> Self {
        WordToken { text: text.into(), start, end, speaker }
    }
}

/// A detected laughter burst on one speaker's channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaughEvent {
    pub start: Timestamp,
    pub end: Timestamp,
    pub speaker: SpeakerId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LaughMarker {
    /// Laughter with no co-occurring speech.
    Laughter,
    /// Opens a stretch of speech-laughter.
    StartLaugh,
    /// Closes a stretch of speech-laughter.
    EndLaugh,
}

impl LaughMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            LaughMarker::Laughter => "[Laughter]",
            LaughMarker::StartLaugh => "[StartLaugh]",
            LaughMarker::EndLaugh => "[EndLaugh]",
        }
    }

    pub fn parse(s: &str) -> Option<LaughMarker> {
        match s {
            "[Laughter]" => Some(LaughMarker::Laughter),
            "[StartLaugh]" => Some(LaughMarker::StartLaugh),
            "[EndLaugh]" => Some(LaughMarker::EndLaugh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Word(String),
    Laugh(LaughMarker),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Timestamp,
    pub end: Timestamp,
    pub speaker: SpeakerId,
}

impl Token {
    pub fn word(w: &WordToken) -> Token {
        Token { kind: TokenKind::Word(w.text.clone()), start: w.start, end: w.end, speaker: w.speaker }
    }

    pub fn marker(marker: LaughMarker, start: Timestamp, end: Timestamp, speaker: SpeakerId) -> Token {
        Token { kind: TokenKind::Laugh(marker), start, end, speaker }
    }

    pub fn text(&self) -> &str {
        match &self.kind {
            TokenKind::Word(w) => w,
            TokenKind::Laugh(m) => m.as_str(),
        }
    }

    pub fn is_word(&self) -> bool {
        matches!(self.kind, TokenKind::Word(_))
    }

    pub fn laugh_marker(&self) -> Option<LaughMarker> {
        match self.kind {
            TokenKind::Laugh(m) => Some(m),
            TokenKind::Word(_) => None,
        }
    }
}

/// Space-joined token text, laugh markers included.
pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.text());
    }
    out
}

/// Space-joined word text with every laugh marker removed.
pub fn render_words(tokens: &[Token]) -> String {
    tokens
        .iter()
        .filter(|t| t.is_word())
        .map(Token::text)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseLabel {
    Turn,
    EmotiveBackchannel,
    CognitiveBackchannel,
    SuccessfulInterjection,
    UnsuccessfulInterjection,
    /// Fully-overlapped response awaiting backchannel classification.
    PendingBackchannel,
}

impl ResponseLabel {
    pub const ALL: [ResponseLabel; 6] = [
        ResponseLabel::Turn,
        ResponseLabel::EmotiveBackchannel,
        ResponseLabel::CognitiveBackchannel,
        ResponseLabel::SuccessfulInterjection,
        ResponseLabel::UnsuccessfulInterjection,
        ResponseLabel::PendingBackchannel,
    ];

    /// Label as it stands before backchannel classification.
    pub fn candidate(self) -> ResponseLabel {
        match self {
            ResponseLabel::EmotiveBackchannel
            | ResponseLabel::CognitiveBackchannel
            | ResponseLabel::UnsuccessfulInterjection
            | ResponseLabel::PendingBackchannel => ResponseLabel::PendingBackchannel,
            other => other,
        }
    }

    /// Turns and successful interjections both hold the floor.
    pub fn is_turn(self) -> bool {
        matches!(self, ResponseLabel::Turn | ResponseLabel::SuccessfulInterjection)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResponseLabel::Turn => "turn",
            ResponseLabel::EmotiveBackchannel => "emotive_backchannel",
            ResponseLabel::CognitiveBackchannel => "cognitive_backchannel",
            ResponseLabel::SuccessfulInterjection => "successful_interjection",
            ResponseLabel::UnsuccessfulInterjection => "unsuccessful_interjection",
            ResponseLabel::PendingBackchannel => "pending_backchannel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKind {
    /// The overlappee stops before the overlapper does (end-time ties included).
    Partial,
    /// The overlappee keeps talking after the overlapper stops.
    Fully,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseId(pub u32);

impl fmt::Display for ResponseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Overlap that determined an overlapper's candidate label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapRef {
    pub kind: OverlapKind,
    pub partner: ResponseId,
}

/// One cross-speaker overlap between two responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapAnnotation {
    pub overlapper: ResponseId,
    pub overlappee: ResponseId,
    pub kind: OverlapKind,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl OverlapAnnotation {
    pub fn duration(&self) -> Duration {
        self.end.saturating_sub(self.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub id: ResponseId,
    pub speaker: SpeakerId,
    pub tokens: Vec<Token>,
    pub start: Timestamp,
    pub end: Timestamp,
    pub label: ResponseLabel,
    pub overlap: Option<OverlapRef>,
    pub emotion: Emotion,
    pub sentiment: Sentiment,
    pub bc_emotion5: Option<Emotion5>,
    pub bc_sentiment5: Option<Sentiment5>,
}

impl Response {
    /// Builds an unlabeled response spanning its tokens. `tokens` must be non-empty.
    pub fn from_tokens(id: ResponseId, speaker: SpeakerId, tokens: Vec<Token>) -> Response {
        let start = tokens.first().map(|t| t.start).unwrap_or_default();
        let end = tokens.iter().map(|t| t.end).max().unwrap_or(start);
        Response {
            id,
            speaker,
            tokens,
            start,
            end,
            label: ResponseLabel::Turn,
            overlap: None,
            emotion: Emotion::Neutral,
            sentiment: Sentiment::Neutral,
            bc_emotion5: None,
            bc_sentiment5: None,
        }
    }

    pub fn duration(&self) -> Duration {
        self.end.saturating_sub(self.start)
    }

    pub fn text(&self) -> String {
        render_tokens(&self.tokens)
    }

    pub fn word_text(&self) -> String {
        render_words(&self.tokens)
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word()).count()
    }

    /// Laughter occurrences: each standalone burst and each speech-laughter opening.
    pub fn laugh_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t.laugh_marker(), Some(LaughMarker::Laughter | LaughMarker::StartLaugh)))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conversation {
    pub id: String,
    pub duration: Duration,
    /// Time-ordered, both speakers interleaved. `responses[i].id == ResponseId(i)`.
    pub responses: Vec<Response>,
    pub overlaps: Vec<OverlapAnnotation>,
    pub source: Option<String>,
}

impl Conversation {
    pub fn response(&self, id: ResponseId) -> Option<&Response> {
        self.responses.get(id.0 as usize).filter(|r| r.id == id)
    }

    pub fn by_speaker(&self, speaker: SpeakerId) -> impl Iterator<Item = &Response> {
        self.responses.iter().filter(move |r| r.speaker == speaker)
    }

    /// Total response time of one speaker, backchannels included.
    pub fn speaking_time(&self, speaker: SpeakerId) -> Duration {
        Duration::from_micros(self.by_speaker(speaker).map(|r| r.duration().micros()).sum())
    }

    pub fn is_finalized(&self) -> bool {
        self.responses.iter().all(|r| r.label != ResponseLabel::PendingBackchannel)
    }
}

/// A non-fatal condition raised while processing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub conversation_id: Option<String>,
    pub response_id: Option<ResponseId>,
    pub message: String,
}

impl Warning {
    pub fn new(message: impl Into<String>) -> Self {
        Warning { conversation_id: None, response_id: None, message: message.into() }
    }

    pub fn in_conversation(mut self, id: &str) -> Self {
        self.conversation_id = Some(id.to_string());
        self
    }

    pub fn at_response(mut self, id: ResponseId) -> Self {
        self.response_id = Some(id);
        self
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.conversation_id {
            write!(f, "[{c}")?;
            if let Some(r) = self.response_id {
                write!(f, "#{r}")?;
            }
            write!(f, "] ")?;
        }
        f.write_str(&self.message)
    }
}
