//! Personality prompt assembly, repeated chat queries and score aggregation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{render_bucket, BasicAttribute, CohortMeans, SpeakerAttributes, SpeakerBuckets};
use crate::classify::MALFORMED_RETRIES;
use crate::gateway::{extract_trailing_json, ChatClient, ChatRequest, GatewayError};
use crate::model::{
    average_scores, Conversation, Duration, Emotion, Sentiment, SpeakerId, Trait, TraitLabel, TraitLabels, TraitScores,
};
use crate::rng::SplitMix64;
use crate::template::render;

pub const PERSONALITY_TEMPLATE: &str = include_str!("../assets/personality_prompt.txt");

/// Which prompt sections are shown to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptFeatures {
    pub include_samples: bool,
    pub include_basics: bool,
    pub include_emotion: bool,
    pub include_sentiment: bool,
}

impl Default for PromptFeatures {
    fn default() -> Self {
        PromptFeatures::ALL
    }
}

impl PromptFeatures {
    pub const ALL: PromptFeatures =
        PromptFeatures { include_samples: true, include_basics: true, include_emotion: true, include_sentiment: true };

    /// Parses a comma-separated subset of `samples,basics,emotion,sentiment`.
    pub fn parse(s: &str) -> Result<PromptFeatures, PersonalityError> {
        let mut f = PromptFeatures { include_samples: false, include_basics: false, include_emotion: false, include_sentiment: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "samples" => f.include_samples = true,
                "basics" => f.include_basics = true,
                "emotion" | "emotions" => f.include_emotion = true,
                "sentiment" | "sentiments" => f.include_sentiment = true,
                other => return Err(PersonalityError::Features(format!("unknown feature {other:?}"))),
            }
        }
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), PersonalityError> {
        if self.include_samples || self.include_basics || self.include_emotion || self.include_sentiment {
            Ok(())
        } else {
            Err(PersonalityError::Features("at least one feature must be enabled".into()))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PersonalityError {
    #[error("invalid feature selection: {0}")]
    Features(String),
    #[error("cohort averages are required for the emotion and sentiment sections")]
    MissingCohortMeans,
    #[error("query count must be at least 1")]
    NoQueries,
    #[error("query {query} returned no parseable trait labels after {attempts} attempts")]
    Unparseable { query: usize, attempts: u32 },
    #[error("query {query} failed: {source}")]
    Client {
        query: usize,
        #[source]
        source: GatewayError,
    },
}

/// Seeded uniform sample (without replacement) of the speaker's floor-holding
/// responses longer than `min_dur`, rendered with laugh tokens.
pub fn select_samples(conv: &Conversation, speaker: SpeakerId, n: usize, min_dur: Duration, seed: u64) -> Vec<String> {
    let mut pool: Vec<&str> = Vec::new();
    let texts: Vec<String> = conv
        .by_speaker(speaker)
        .filter(|r| r.label.is_turn() && r.duration() > min_dur)
        .map(|r| r.text())
        .collect();
    pool.extend(texts.iter().map(String::as_str));
    let k = n.min(pool.len());
    let mut rng = SplitMix64::new(seed);
    for i in 0..k {
        let j = i + rng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool[..k].iter().map(|s| s.to_string()).collect()
}

/// Sections of the speaker description that the feature flags control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Samples,
    Emotion,
    Sentiment,
    Basics,
}

/// One section, heading first, each line newline-terminated.
pub fn render_section(
    section: Section,
    attrs: &SpeakerAttributes,
    buckets: &SpeakerBuckets,
    samples: &[String],
    means: Option<&CohortMeans>,
) -> Result<String, PersonalityError> {
    let mut s = String::new();
    match section {
        Section::Samples => {
            s.push_str("Sample Responses:\n");
            for (i, text) in samples.iter().enumerate() {
                let _ = writeln!(s, "  Sample {}: {}", i + 1, text);
            }
        }
        Section::Emotion => {
            let m = means.ok_or(PersonalityError::MissingCohortMeans)?;
            s.push_str("Emotions:\n");
            for e in Emotion::ALL {
                let _ = writeln!(s, "  {}: {:.1}% (average: {:.1}%)", e.as_str(), attrs.emotion_pct[e.index()], m.emotion_pct[e.index()]);
            }
        }
        Section::Sentiment => {
            let m = means.ok_or(PersonalityError::MissingCohortMeans)?;
            s.push_str("Sentiment:\n");
            for t in Sentiment::ALL {
                let _ = writeln!(s, "  {}: {:.1}% (average: {:.1}%)", t.as_str(), attrs.sentiment_pct[t.index()], m.sentiment_pct[t.index()]);
            }
        }
        Section::Basics => {
            s.push_str("Basic Statistics:\n");
            for a in BasicAttribute::ALL {
                let b = buckets.get(a).unwrap_or(crate::attributes::RelativeBucket::Normal);
                let _ = writeln!(s, "  {}: {}", a.title(), render_bucket(a, b));
            }
        }
    }
    Ok(s)
}

/// Full character prompt. Enabled sections appear in the order samples,
/// emotions, sentiment, basic statistics, separated by blank lines.
pub fn build_personality_prompt(
    attrs: &SpeakerAttributes,
    buckets: &SpeakerBuckets,
    samples: &[String],
    means: Option<&CohortMeans>,
    features: PromptFeatures,
) -> Result<String, PersonalityError> {
    features.validate()?;
    let wanted = [
        (Section::Samples, features.include_samples),
        (Section::Emotion, features.include_emotion),
        (Section::Sentiment, features.include_sentiment),
        (Section::Basics, features.include_basics),
    ];
    let mut blocks = Vec::new();
    for (section, on) in wanted {
        if on {
            blocks.push(render_section(section, attrs, buckets, samples, means)?);
        }
    }
    Ok(render(PERSONALITY_TEMPLATE, &[("sections", &blocks.join("\n"))]).expect("bundled template is well-formed"))
}

/// Reads one label per trait from the trailing JSON of a reply.
pub fn parse_trait_labels(reply: &str) -> Option<TraitLabels> {
    let obj = extract_trailing_json(reply).ok()?;
    let mut out: [Option<TraitLabel>; 5] = [None; 5];
    for (k, v) in &obj {
        if let (Some(t), Some(v)) = (Trait::parse(k), v.as_str()) {
            out[t.index()] = Some(TraitLabel::parse(v)?);
        }
    }
    let mut labels = [TraitLabel::Neutral; 5];
    for (slot, v) in labels.iter_mut().zip(out) {
        *slot = v?;
    }
    Some(TraitLabels(labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitPrediction {
    pub conversation_id: String,
    pub speaker: SpeakerId,
    pub scores: TraitScores,
    /// Labels of every query, in query order.
    #[serde(default)]
    pub raw_labels: Vec<TraitLabels>,
    #[serde(default)]
    pub query_count: usize,
}

impl TraitPrediction {
    pub fn key(&self) -> (String, SpeakerId) {
        (self.conversation_id.clone(), self.speaker)
    }
}

/// Runs `query_count` independent completions and averages their scores.
/// Any query that fails or never parses fails the whole prediction.
pub fn predict_personality(
    client: &dyn ChatClient,
    prompt: &str,
    query_count: usize,
    model: &str,
    temperature: f64,
    max_tokens: u32,
    tag: &str,
) -> Result<(TraitScores, Vec<TraitLabels>), PersonalityError> {
    if query_count == 0 {
        return Err(PersonalityError::NoQueries);
    }
    let results: Vec<Result<TraitLabels, PersonalityError>> = (0..query_count)
        .into_par_iter()
        .map(|q| {
            let req = ChatRequest::single(model, prompt, temperature, max_tokens, format!("{tag}:q{q}"));
            for _ in 0..=MALFORMED_RETRIES {
                let reply = client.complete(&req).map_err(|source| PersonalityError::Client { query: q, source })?;
                if let Some(l) = parse_trait_labels(&reply) {
                    return Ok(l);
                }
            }
            Err(PersonalityError::Unparseable { query: q, attempts: MALFORMED_RETRIES + 1 })
        })
        .collect();
    let labels = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let scores: Vec<[i32; 5]> = labels.iter().map(TraitLabels::scores).collect();
    let avg = average_scores(&scores).map_err(|_| PersonalityError::NoQueries)?;
    Ok((avg, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::RelativeBucket;
    use crate::model::{Response, ResponseId, ResponseLabel, Timestamp, Token, WordToken};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    fn attrs() -> SpeakerAttributes {
        let mut emotion_pct = [0.0; 7];
        emotion_pct[Emotion::Anger.index()] = 100.0 / 36.0;
        emotion_pct[Emotion::Neutral.index()] = 3500.0 / 36.0;
        SpeakerAttributes {
            conversation_id: "c".into(),
            speaker: SpeakerId::A,
            num_turns: 10,
            avg_turn_duration_s: 3.0,
            laughs_per_min_speech: 1.0,
            emotive_bc_per_min_other: 0.5,
            cognitive_bc_per_min_other: 0.5,
            interjections_per_12min: 2.0,
            emotion_pct,
            sentiment_pct: [20.0, 60.0, 20.0],
        }
    }

    fn buckets() -> SpeakerBuckets {
        SpeakerBuckets {
            conversation_id: "c".into(),
            speaker: SpeakerId::A,
            buckets: BasicAttribute::ALL
                .iter()
                .map(|&a| (a, if a == BasicAttribute::Laughter { RelativeBucket::VeryHigh } else { RelativeBucket::Normal }))
                .collect(),
        }
    }

    fn means() -> CohortMeans {
        let mut m = CohortMeans { emotion_pct: [0.0; 7], sentiment_pct: [10.0, 60.0, 30.0] };
        m.emotion_pct[Emotion::Anger.index()] = 3.7;
        m
    }

    #[test]
    fn sections_and_formatting() {
        let p = build_personality_prompt(&attrs(), &buckets(), &["hi there".into()], Some(&means()), PromptFeatures::ALL).unwrap();
        for h in ["Sample Responses:", "Emotions:", "Sentiment:", "Basic Statistics:"] {
            assert!(p.contains(h), "missing {h}");
        }
        assert!(p.contains("  anger: 2.8% (average: 3.7%)\n"));
        assert!(p.contains("  Sample 1: hi there\n"));
        assert!(p.contains("  Frequency of Laughter: Very Frequent\n"));
        assert!(p.trim_end().ends_with('}'));
    }

    #[test]
    fn toggles_remove_exactly_their_section() {
        let (a, b, m) = (attrs(), buckets(), means());
        let samples = vec!["one".to_string()];
        let full = build_personality_prompt(&a, &b, &samples, Some(&m), PromptFeatures::ALL).unwrap();
        let cases = [
            (Section::Samples, PromptFeatures { include_samples: false, ..PromptFeatures::ALL }),
            (Section::Emotion, PromptFeatures { include_emotion: false, ..PromptFeatures::ALL }),
            (Section::Sentiment, PromptFeatures { include_sentiment: false, ..PromptFeatures::ALL }),
            (Section::Basics, PromptFeatures { include_basics: false, ..PromptFeatures::ALL }),
        ];
        for (section, f) in cases {
            let without = build_personality_prompt(&a, &b, &samples, Some(&m), f).unwrap();
            let block = render_section(section, &a, &b, &samples, Some(&m)).unwrap();
            let removed = if section == Section::Basics {
                full.replacen(&format!("\n{block}"), "", 1)
            } else {
                full.replacen(&format!("{block}\n"), "", 1)
            };
            assert_eq!(removed, without, "{section:?}");
        }
    }

    #[test]
    fn missing_means_is_an_error_only_when_needed() {
        let f = PromptFeatures::parse("samples,basics").unwrap();
        let p = build_personality_prompt(&attrs(), &buckets(), &[], None, f).unwrap();
        assert!(!p.contains("Emotions:"));
        assert!(matches!(
            build_personality_prompt(&attrs(), &buckets(), &[], None, PromptFeatures::ALL),
            Err(PersonalityError::MissingCohortMeans)
        ));
        let only = build_personality_prompt(&attrs(), &buckets(), &[], None, PromptFeatures::parse("samples").unwrap()).unwrap();
        assert!(!only.contains("Basic Statistics:"));
    }

    #[test]
    fn feature_parsing() {
        assert!(PromptFeatures::parse("").is_err());
        assert!(PromptFeatures::parse("samples,colour").is_err());
        assert_eq!(PromptFeatures::parse("samples,basics,emotion,sentiment").unwrap(), PromptFeatures::ALL);
    }

    fn conv_with(durations_ms: &[(i64, ResponseLabel)]) -> Conversation {
        let mut t = 0;
        let responses = durations_ms
            .iter()
            .enumerate()
            .map(|(i, &(d, label))| {
                let w = WordToken::new(format!("w{i}"), Timestamp::from_millis(t), Timestamp::from_millis(t + d), SpeakerId::A);
                t += d + 1000;
                let mut r = Response::from_tokens(ResponseId(i as u32), SpeakerId::A, vec![Token::word(&w)]);
                r.label = label;
                r
            })
            .collect();
        Conversation { id: "s".into(), duration: Duration::from_millis(t), responses, overlaps: vec![], source: None }
    }

    #[test]
    fn undersupply_returns_all_and_is_deterministic() {
        use ResponseLabel::*;
        let conv = conv_with(&[
            (3000, Turn),
            (2000, Turn),
            (2500, SuccessfulInterjection),
            (5000, EmotiveBackchannel),
            (4000, Turn),
            (2001, Turn),
            (9000, Turn),
        ]);
        let min = Duration::from_millis(2000);
        let s = select_samples(&conv, SpeakerId::A, 20, min, 7);
        let mut sorted = s.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["w0", "w2", "w4", "w5", "w6"]);
        assert_eq!(s, select_samples(&conv, SpeakerId::A, 20, min, 7));
        assert_eq!(select_samples(&conv, SpeakerId::A, 2, min, 7).len(), 2);
    }

    #[test]
    fn relabeling_non_qualifying_does_not_change_sample() {
        use ResponseLabel::*;
        let a = conv_with(&[(3000, Turn), (5000, EmotiveBackchannel), (4000, Turn), (1000, Turn), (6000, Turn)]);
        let b = conv_with(&[(3000, Turn), (5000, UnsuccessfulInterjection), (4000, Turn), (1000, SuccessfulInterjection), (6000, Turn)]);
        let min = Duration::from_millis(2000);
        for seed in 0..20 {
            assert_eq!(select_samples(&a, SpeakerId::A, 2, min, seed), select_samples(&b, SpeakerId::A, 2, min, seed));
        }
    }

    #[test]
    fn selection_is_uniform() {
        let conv = conv_with(&[(3000, ResponseLabel::Turn); 6]);
        let min = Duration::from_millis(2000);
        let draws = 10_000;
        let mut counts = [0usize; 6];
        for seed in 0..draws {
            for s in select_samples(&conv, SpeakerId::A, 2, min, seed as u64 * 0x9E37_79B9) {
                counts[s[1..].parse::<usize>().unwrap()] += 1;
            }
        }
        // each item is chosen with probability 2/6
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99.9th percentile of chi-square with 5 degrees of freedom
        assert!(chi2 < 20.52, "chi2 = {chi2}, counts = {counts:?}");
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    struct Scripted {
        replies: Mutex<Vec<String>>,
        calls: AtomicUsize,
    }

    impl ChatClient for Scripted {
        fn complete(&self, _: &ChatRequest) -> Result<String, GatewayError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let mut r = self.replies.lock().unwrap();
            Ok(if r.len() > 1 { r.remove(0) } else { r[0].clone() })
        }
    }

    fn reply(ext: &str) -> String {
        format!(
            "analysis\n{{\"openness\": \"neutral\", \"conscientiousness\": \"neutral\", \"extraversion\": \"{ext}\", \"agreeableness\": \"neutral\", \"neuroticism\": \"opposed\"}}"
        )
    }

    fn run(c: &dyn ChatClient, n: usize) -> Result<(TraitScores, Vec<TraitLabels>), PersonalityError> {
        predict_personality(c, "p", n, "m", 0.7, 100, "t")
    }

    #[test]
    fn five_query_average() {
        let c = Scripted {
            replies: Mutex::new(["highly aligned", "aligned", "aligned", "neutral", "highly aligned"].map(reply).to_vec()),
            calls: AtomicUsize::new(0),
        };
        let (scores, raw) = run(&c, 5).unwrap();
        assert_eq!(scores.get(Trait::Extraversion), 60.0);
        let c = Scripted {
            replies: Mutex::new(["aligned", "aligned", "neutral", "aligned", "highly aligned"].map(reply).to_vec()),
            calls: AtomicUsize::new(0),
        };
        assert_eq!(run(&c, 5).unwrap().0.get(Trait::Extraversion), 50.0);
        assert_eq!(scores.get(Trait::Neuroticism), -50.0);
        assert_eq!(raw.len(), 5);
        let c = Scripted { replies: Mutex::new(vec![reply("highly aligned")]), calls: AtomicUsize::new(0) };
        assert_eq!(run(&c, 5).unwrap().0.get(Trait::Extraversion), 100.0);
    }

    #[test]
    fn missing_key_retried_then_error() {
        let bad = r#"{"openness": "neutral", "conscientiousness": "neutral", "extraversion": "aligned", "agreeableness": "neutral"}"#;
        let c = Scripted { replies: Mutex::new(vec![bad.to_string()]), calls: AtomicUsize::new(0) };
        assert!(matches!(run(&c, 1), Err(PersonalityError::Unparseable { attempts: 4, .. })));
        assert_eq!(c.calls.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn malformed_then_valid_recovers() {
        let c = Scripted { replies: Mutex::new(vec!["no json".into(), reply("opposed")]), calls: AtomicUsize::new(0) };
        assert_eq!(run(&c, 1).unwrap().0.get(Trait::Extraversion), -50.0);
    }

    #[test]
    fn synonym_tolerant_keys() {
        let l = parse_trait_labels(
            r#"{"Openness": "Highly_Aligned", "CONSCIENTIOUSNESS": "aligned", "extra_version": "neutral", "Agreeableness ": "opposed", "neuroticism": "highly-opposed"}"#,
        )
        .unwrap();
        assert_eq!(l.scores(), [100, 50, 0, -50, -100]);
    }
}
