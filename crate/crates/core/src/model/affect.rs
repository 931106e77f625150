use std::fmt;

use serde::{Deserialize, Serialize};

/// Seven-class text emotion used for dataset fields and aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Joy,
    Neutral,
    Sadness,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Neutral,
        Emotion::Sadness,
        Emotion::Surprise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Neutral => "neutral",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
        }
    }

    pub fn parse(s: &str) -> Option<Emotion> {
        Emotion::ALL.into_iter().find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Neutral => "neutral",
            Sentiment::Negative => "negative",
        }
    }

    pub fn parse(s: &str) -> Option<Sentiment> {
        Sentiment::ALL.into_iter().find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Five-class emotion returned by the backchannel prompt. Auxiliary only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion5 {
    Neutral,
    Sad,
    Angry,
    Happy,
    Surprised,
}

impl Emotion5 {
    pub const ALL: [Emotion5; 5] =
        [Emotion5::Neutral, Emotion5::Sad, Emotion5::Angry, Emotion5::Happy, Emotion5::Surprised];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion5::Neutral => "neutral",
            Emotion5::Sad => "sad",
            Emotion5::Angry => "angry",
            Emotion5::Happy => "happy",
            Emotion5::Surprised => "surprised",
        }
    }

    pub fn parse(s: &str) -> Option<Emotion5> {
        let s = normalize_label(s);
        Emotion5::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sentiment5 {
    #[serde(rename = "very positive")]
    VeryPositive,
    #[serde(rename = "positive")]
    Positive,
    #[serde(rename = "neutral")]
    Neutral,
    #[serde(rename = "negative")]
    Negative,
    #[serde(rename = "very negative")]
    VeryNegative,
}

impl Sentiment5 {
    pub const ALL: [Sentiment5; 5] = [
        Sentiment5::VeryPositive,
        Sentiment5::Positive,
        Sentiment5::Neutral,
        Sentiment5::Negative,
        Sentiment5::VeryNegative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment5::VeryPositive => "very positive",
            Sentiment5::Positive => "positive",
            Sentiment5::Neutral => "neutral",
            Sentiment5::Negative => "negative",
            Sentiment5::VeryNegative => "very negative",
        }
    }

    pub fn parse(s: &str) -> Option<Sentiment5> {
        let s = normalize_label(s);
        Sentiment5::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

/// Lowercases, maps `_`/`-` to spaces, strips quotes and collapses whitespace.
pub(crate) fn normalize_label(s: &str) -> String {
    s.trim()
        .trim_matches(|c| c == '"' || c == '\'' || c == '`')
        .to_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}
