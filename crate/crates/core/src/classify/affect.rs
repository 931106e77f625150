use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ClassifierSettings;
use crate::model::{render_words, Conversation, Emotion, Sentiment, Warning};

/// Keyword table shared by the lexicon classifier and the synthetic generator.
///
/// Entries with a neutral emotion only carry sentiment.
pub const LEXICON: &[(&str, Emotion, Sentiment)] = &[
    ("happy", Emotion::Joy, Sentiment::Positive),
    ("glad", Emotion::Joy, Sentiment::Positive),
    ("love", Emotion::Joy, Sentiment::Positive),
    ("great", Emotion::Joy, Sentiment::Positive),
    ("fun", Emotion::Joy, Sentiment::Positive),
    ("angry", Emotion::Anger, Sentiment::Negative),
    ("hate", Emotion::Anger, Sentiment::Negative),
    ("annoying", Emotion::Anger, Sentiment::Negative),
    ("furious", Emotion::Anger, Sentiment::Negative),
    ("terrible", Emotion::Disgust, Sentiment::Negative),
    ("gross", Emotion::Disgust, Sentiment::Negative),
    ("disgusting", Emotion::Disgust, Sentiment::Negative),
    ("awful", Emotion::Disgust, Sentiment::Negative),
    ("scared", Emotion::Fear, Sentiment::Negative),
    ("afraid", Emotion::Fear, Sentiment::Negative),
    ("worried", Emotion::Fear, Sentiment::Negative),
    ("nervous", Emotion::Fear, Sentiment::Negative),
    ("sad", Emotion::Sadness, Sentiment::Negative),
    ("lonely", Emotion::Sadness, Sentiment::Negative),
    ("miss", Emotion::Sadness, Sentiment::Negative),
    ("cry", Emotion::Sadness, Sentiment::Negative),
    ("wow", Emotion::Surprise, Sentiment::Positive),
    ("whoa", Emotion::Surprise, Sentiment::Positive),
    ("amazing", Emotion::Surprise, Sentiment::Positive),
    ("unbelievable", Emotion::Surprise, Sentiment::Positive),
    ("good", Emotion::Neutral, Sentiment::Positive),
    ("nice", Emotion::Neutral, Sentiment::Positive),
    ("bad", Emotion::Neutral, Sentiment::Negative),
    ("wrong", Emotion::Neutral, Sentiment::Negative),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffectTask {
    Emotion,
    Sentiment,
}

impl AffectTask {
    pub fn classes(self) -> Vec<&'static str> {
        match self {
            AffectTask::Emotion => Emotion::ALL.iter().map(|e| e.as_str()).collect(),
            AffectTask::Sentiment => Sentiment::ALL.iter().map(|s| s.as_str()).collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("classifier transport error: {0}")]
    Transport(String),
    #[error("classifier returned an unusable distribution: {0}")]
    Malformed(String),
}

/// Text in, class-probability map out.
pub trait TextClassifier: Send + Sync {
    fn classify(&self, text: &str) -> Result<BTreeMap<String, f64>, ClassifierError>;
}

/// Deterministic keyword classifier.
///
/// The first lexicon word carrying a non-neutral value decides the label;
/// the winner gets most of the probability mass and the rest is spread evenly.
#[derive(Debug, Clone, Copy)]
pub struct LexiconMock {
    pub task: AffectTask,
}

impl LexiconMock {
    pub fn emotion() -> Self {
        LexiconMock { task: AffectTask::Emotion }
    }

    pub fn sentiment() -> Self {
        LexiconMock { task: AffectTask::Sentiment }
    }

    fn label(&self, text: &str) -> &'static str {
        for word in text.split_whitespace() {
            let Some(&(_, e, s)) = LEXICON.iter().find(|(w, _, _)| *w == word) else { continue };
            match self.task {
                AffectTask::Emotion if e != Emotion::Neutral => return e.as_str(),
                AffectTask::Sentiment if s != Sentiment::Neutral => return s.as_str(),
                _ => {}
            }
        }
        "neutral"
    }
}

impl TextClassifier for LexiconMock {
    fn classify(&self, text: &str) -> Result<BTreeMap<String, f64>, ClassifierError> {
        let winner = self.label(text);
        let classes = self.task.classes();
        let rest = 0.3 / (classes.len() - 1) as f64;
        Ok(classes.into_iter().map(|c| (c.to_string(), if c == winner { 0.7 } else { rest })).collect())
    }
}

/// Remote classifier: `POST url {"text": ...}` answering `{"labels": {class: p}}`.
pub struct HttpTextClassifier {
    http: reqwest::blocking::Client,
    url: String,
    max_attempts: u32,
    backoff: Duration,
}

impl HttpTextClassifier {
    pub fn new(url: impl Into<String>, max_attempts: u32, deadline: Duration) -> Result<Self, ClassifierError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(deadline)
            .build()
            .map_err(|e| ClassifierError::Transport(e.to_string()))?;
        Ok(HttpTextClassifier { http, url: url.into(), max_attempts: max_attempts.max(1), backoff: Duration::from_millis(200) })
    }

    pub fn backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    /// Emotion and sentiment classifiers from settings, if both endpoints are set.
    pub fn pair_from_settings(s: &ClassifierSettings) -> Result<(Self, Self), ClassifierError> {
        let deadline = Duration::from_secs_f64(s.deadline_s);
        let (Some(e), Some(t)) = (&s.emotion_endpoint, &s.sentiment_endpoint) else {
            return Err(ClassifierError::Transport("emotion and sentiment endpoints must both be configured".into()));
        };
        Ok((Self::new(e.clone(), s.max_attempts, deadline)?, Self::new(t.clone(), s.max_attempts, deadline)?))
    }

    fn once(&self, text: &str) -> Result<Result<BTreeMap<String, f64>, ClassifierError>, ClassifierError> {
        let resp = match self.http.post(&self.url).json(&json!({ "text": text })).send() {
            Ok(r) => r,
            Err(e) => return Ok(Err(ClassifierError::Transport(e.to_string()))),
        };
        let status = resp.status();
        if status.as_u16() == 429 || status.as_u16() == 408 || status.is_server_error() {
            return Ok(Err(ClassifierError::Transport(format!("server returned {status}"))));
        }
        if !status.is_success() {
            return Err(ClassifierError::Transport(format!("server returned {status}")));
        }
        let body: Value = resp.json().map_err(|e| ClassifierError::Malformed(e.to_string()))?;
        let labels = body
            .get("labels")
            .and_then(Value::as_object)
            .ok_or_else(|| ClassifierError::Malformed("missing \"labels\" object".into()))?;
        let mut out = BTreeMap::new();
        for (k, v) in labels {
            let p = v.as_f64().ok_or_else(|| ClassifierError::Malformed(format!("probability for {k} is not a number")))?;
            out.insert(k.to_lowercase(), p);
        }
        Ok(Ok(out))
    }
}

impl TextClassifier for HttpTextClassifier {
    fn classify(&self, text: &str) -> Result<BTreeMap<String, f64>, ClassifierError> {
        let mut last = ClassifierError::Transport("no attempt made".into());
        for n in 0..self.max_attempts {
            match self.once(text)? {
                Ok(d) => return Ok(d),
                Err(e) => last = e,
            }
            if n + 1 < self.max_attempts {
                std::thread::sleep(self.backoff.saturating_mul(1 << n.min(10)));
            }
        }
        Err(last)
    }
}

fn argmax(dist: &BTreeMap<String, f64>) -> Result<&str, ClassifierError> {
    let total: f64 = dist.values().sum();
    if dist.values().any(|p| !p.is_finite() || *p < 0.0) || !(total > 0.0) {
        return Err(ClassifierError::Malformed("probabilities must be finite, non-negative and not all zero".into()));
    }
    // BTreeMap iteration is alphabetical, so equal maxima resolve to the first name
    let mut best: Option<(&str, f64)> = None;
    for (k, p) in dist {
        if best.is_none_or(|(_, b)| *p > b) {
            best = Some((k, *p));
        }
    }
    Ok(best.expect("non-empty").0)
}

/// Emotion and sentiment of one response text. Laugh markers are removed
/// first, and text with no words is neutral without consulting the classifiers.
pub fn classify_affect(
    text: &str,
    emotion: &dyn TextClassifier,
    sentiment: &dyn TextClassifier,
) -> Result<(Emotion, Sentiment), ClassifierError> {
    let words: Vec<&str> = text.split_whitespace().filter(|w| !(w.starts_with('[') && w.ends_with(']'))).collect();
    if words.is_empty() {
        return Ok((Emotion::Neutral, Sentiment::Neutral));
    }
    let clean = words.join(" ");
    let dist = emotion.classify(&clean)?;
    let e = argmax(&dist)?;
    let e = Emotion::parse(e).ok_or_else(|| ClassifierError::Malformed(format!("unknown emotion class {e:?}")))?;
    let dist = sentiment.classify(&clean)?;
    let s = argmax(&dist)?;
    let s = Sentiment::parse(s).ok_or_else(|| ClassifierError::Malformed(format!("unknown sentiment class {s:?}")))?;
    Ok((e, s))
}

/// Labels every response of the conversation. Failures fall back to
/// neutral/neutral and are reported as warnings.
pub fn assign_affect(
    conv: &mut Conversation,
    emotion: &dyn TextClassifier,
    sentiment: &dyn TextClassifier,
) -> Vec<Warning> {
    let results: Vec<_> = conv
        .responses
        .par_iter()
        .map(|r| classify_affect(&render_words(&r.tokens), emotion, sentiment))
        .collect();
    let mut warnings = Vec::new();
    for (r, res) in conv.responses.iter_mut().zip(results) {
        match res {
            Ok((e, s)) => {
                r.emotion = e;
                r.sentiment = s;
            }
            Err(err) => {
                r.emotion = Emotion::Neutral;
                r.sentiment = Sentiment::Neutral;
                warnings.push(
                    Warning::new(format!("affect defaulted to neutral: {err}")).in_conversation(&conv.id).at_response(r.id),
                );
            }
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(text: &str) -> (Emotion, Sentiment) {
        classify_affect(text, &LexiconMock::emotion(), &LexiconMock::sentiment()).unwrap()
    }

    #[test]
    fn lexicon_examples() {
        assert_eq!(lex("i am so happy"), (Emotion::Joy, Sentiment::Positive));
        assert_eq!(lex("that is terrible"), (Emotion::Disgust, Sentiment::Negative));
        assert_eq!(lex("that was a good one"), (Emotion::Neutral, Sentiment::Positive));
        assert_eq!(lex("we went to the store"), (Emotion::Neutral, Sentiment::Neutral));
    }

    #[test]
    fn markers_only_is_neutral() {
        struct Boom;
        impl TextClassifier for Boom {
            fn classify(&self, _: &str) -> Result<BTreeMap<String, f64>, ClassifierError> {
                panic!("must not be called")
            }
        }
        assert_eq!(classify_affect("[Laughter]", &Boom, &Boom).unwrap(), (Emotion::Neutral, Sentiment::Neutral));
        assert_eq!(classify_affect("", &Boom, &Boom).unwrap(), (Emotion::Neutral, Sentiment::Neutral));
    }

    #[test]
    fn markers_are_stripped_before_classifying() {
        assert_eq!(lex("[StartLaugh] wow [EndLaugh]"), (Emotion::Surprise, Sentiment::Positive));
    }

    #[test]
    fn mock_distribution_sums_to_one() {
        for task in [AffectTask::Emotion, AffectTask::Sentiment] {
            let d = LexiconMock { task }.classify("so sad").unwrap();
            assert_eq!(d.len(), task.classes().len());
            assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_distribution_is_rejected() {
        let mut d = BTreeMap::new();
        d.insert("joy".to_string(), 0.0);
        assert!(argmax(&d).is_err());
        d.insert("fear".to_string(), f64::NAN);
        assert!(argmax(&d).is_err());
    }

    #[test]
    fn lexicon_words_are_single_lowercase_tokens() {
        for (w, _, _) in LEXICON {
            assert!(!w.is_empty() && w.chars().all(|c| c.is_ascii_lowercase()));
        }
    }
}
