//! Per-speaker conversation attributes and cohort-relative bucketing.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::{Conversation, Emotion, ResponseLabel, Sentiment, SpeakerId, Warning};

/// Interjection counts are scaled to this window length.
pub const INTERJECTION_WINDOW_S: f64 = 720.0;
/// Smallest cohort for which the IQR is used.
pub const MIN_COHORT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerAttributes {
    pub conversation_id: String,
    pub speaker: SpeakerId,
    pub num_turns: usize,
    pub avg_turn_duration_s: f64,
    pub laughs_per_min_speech: f64,
    pub emotive_bc_per_min_other: f64,
    pub cognitive_bc_per_min_other: f64,
    pub interjections_per_12min: f64,
    #[serde(with = "emotion_map")]
    pub emotion_pct: [f64; 7],
    #[serde(with = "sentiment_map")]
    pub sentiment_pct: [f64; 3],
}

macro_rules! class_map {
    ($name:ident, $ty:ty, $n:literal) => {
        mod $name {
            use serde::de::Error;
            use serde::{Deserialize, Deserializer, Serialize, Serializer};
            use std::collections::BTreeMap;

            pub fn serialize<S: Serializer>(v: &[f64; $n], s: S) -> Result<S::Ok, S::Error> {
                let m: BTreeMap<&str, f64> = <$ty>::ALL.iter().map(|c| (c.as_str(), v[c.index()])).collect();
                m.serialize(s)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; $n], D::Error> {
                let m = BTreeMap::<String, f64>::deserialize(d)?;
                let mut out = [0.0; $n];
                for c in <$ty>::ALL {
                    out[c.index()] = *m.get(c.as_str()).ok_or_else(|| D::Error::custom(format!("missing {}", c.as_str())))?;
                }
                Ok(out)
            }
        }
    };
}
class_map!(emotion_map, crate::model::Emotion, 7);
class_map!(sentiment_map, crate::model::Sentiment, 3);

fn per_minute(count: usize, seconds: f64) -> f64 {
    if seconds > 0.0 {
        count as f64 * 60.0 / seconds
    } else {
        0.0
    }
}

fn percentages<const N: usize>(counts: [usize; N]) -> [f64; N] {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return [0.0; N];
    }
    counts.map(|c| c as f64 * 100.0 / total as f64)
}

/// Attributes of one speaker in a finalized conversation.
pub fn compute_attributes(conv: &Conversation, speaker: SpeakerId) -> (SpeakerAttributes, Vec<Warning>) {
    let mut warnings = Vec::new();
    let own_time = conv.speaking_time(speaker).as_secs_f64();
    let other_time = conv.speaking_time(speaker.other()).as_secs_f64();

    let mut turns = 0usize;
    let mut turn_time = 0.0;
    let mut laughs = 0usize;
    let (mut emotive, mut cognitive, mut interjections) = (0usize, 0usize, 0usize);
    let mut emo = [0usize; 7];
    let mut sen = [0usize; 3];
    for r in conv.by_speaker(speaker) {
        if r.label.is_turn() {
            turns += 1;
            turn_time += r.duration().as_secs_f64();
        }
        match r.label {
            ResponseLabel::EmotiveBackchannel => emotive += 1,
            ResponseLabel::CognitiveBackchannel => cognitive += 1,
            ResponseLabel::SuccessfulInterjection | ResponseLabel::UnsuccessfulInterjection => interjections += 1,
            ResponseLabel::PendingBackchannel => warnings.push(
                Warning::new("unresolved backchannel counted as neither kind").in_conversation(&conv.id).at_response(r.id),
            ),
            ResponseLabel::Turn => {}
        }
        laughs += r.laugh_count();
        emo[r.emotion.index()] += 1;
        sen[r.sentiment.index()] += 1;
    }

    if own_time <= 0.0 {
        warnings.push(Warning::new(format!("speaker {speaker} has no speaking time; laughter rate set to 0")).in_conversation(&conv.id));
    }
    if other_time <= 0.0 {
        warnings.push(
            Warning::new(format!("speaker {} has no speaking time; backchannel rates of {speaker} set to 0", speaker.other()))
                .in_conversation(&conv.id),
        );
    }
    let duration = conv.duration.as_secs_f64();
    let attrs = SpeakerAttributes {
        conversation_id: conv.id.clone(),
        speaker,
        num_turns: turns,
        avg_turn_duration_s: if turns > 0 { turn_time / turns as f64 } else { 0.0 },
        laughs_per_min_speech: per_minute(laughs, own_time),
        emotive_bc_per_min_other: per_minute(emotive, other_time),
        cognitive_bc_per_min_other: per_minute(cognitive, other_time),
        interjections_per_12min: if duration > 0.0 { interjections as f64 * INTERJECTION_WINDOW_S / duration } else { 0.0 },
        emotion_pct: percentages(emo),
        sentiment_pct: percentages(sen),
    };
    (attrs, warnings)
}

/// The six behavioral statistics that are bucketed and shown as words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasicAttribute {
    Turns,
    TurnDuration,
    Laughter,
    EmotiveBackchannel,
    CognitiveBackchannel,
    Interjections,
}

impl BasicAttribute {
    pub const ALL: [BasicAttribute; 6] = [
        BasicAttribute::Turns,
        BasicAttribute::TurnDuration,
        BasicAttribute::Laughter,
        BasicAttribute::EmotiveBackchannel,
        BasicAttribute::CognitiveBackchannel,
        BasicAttribute::Interjections,
    ];

    /// Heading used in the personality prompt.
    pub fn title(self) -> &'static str {
        match self {
            BasicAttribute::Turns => "Number of turns",
            BasicAttribute::TurnDuration => "Talking time per turn",
            BasicAttribute::Laughter => "Frequency of Laughter",
            BasicAttribute::EmotiveBackchannel => "Frequency of Emotive Backchannel",
            BasicAttribute::CognitiveBackchannel => "Frequency of Cognitive Backchannel",
            BasicAttribute::Interjections => "Frequency of interjections",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            BasicAttribute::Turns => "num_turns",
            BasicAttribute::TurnDuration => "avg_turn_duration_s",
            BasicAttribute::Laughter => "laughs_per_min_speech",
            BasicAttribute::EmotiveBackchannel => "emotive_bc_per_min_other",
            BasicAttribute::CognitiveBackchannel => "cognitive_bc_per_min_other",
            BasicAttribute::Interjections => "interjections_per_12min",
        }
    }

    pub fn value(self, a: &SpeakerAttributes) -> f64 {
        match self {
            BasicAttribute::Turns => a.num_turns as f64,
            BasicAttribute::TurnDuration => a.avg_turn_duration_s,
            BasicAttribute::Laughter => a.laughs_per_min_speech,
            BasicAttribute::EmotiveBackchannel => a.emotive_bc_per_min_other,
            BasicAttribute::CognitiveBackchannel => a.cognitive_bc_per_min_other,
            BasicAttribute::Interjections => a.interjections_per_12min,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeBucket {
    VeryLow,
    Low,
    Normal,
    High,
    VeryHigh,
}

pub fn render_bucket(attr: BasicAttribute, bucket: RelativeBucket) -> &'static str {
    use RelativeBucket::*;
    let words: [&str; 5] = match attr {
        BasicAttribute::Turns => ["Very Few", "Few", "Normal", "Many", "Very Many"],
        BasicAttribute::TurnDuration => ["Very Short", "Short", "Normal", "Long", "Very Long"],
        _ => ["Very Infrequent", "Infrequent", "Normal", "Frequent", "Very Frequent"],
    };
    let i = match bucket {
        VeryLow => 0,
        Low => 1,
        Normal => 2,
        High => 3,
        VeryHigh => 4,
    };
    words[i]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BucketError {
    #[error("cohort has {0} speakers; at least {MIN_COHORT} are required")]
    CohortTooSmall(usize),
    #[error("target index {0} is outside the cohort")]
    BadIndex(usize),
    #[error("cohort contains a non-finite value")]
    NonFinite,
}

/// Quantile of sorted data by linear interpolation at position `p·(n−1)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean and interquartile range of a cohort.
pub fn cohort_stats(values: &[f64]) -> Result<(f64, f64), BucketError> {
    if values.len() < MIN_COHORT {
        return Err(BucketError::CohortTooSmall(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(BucketError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok((mean, quantile(&sorted, 0.75) - quantile(&sorted, 0.25)))
}

/// Relative slack on the bucket boundaries. Deviations that equal a boundary
/// in exact arithmetic can land one rounding step outside it in `f64`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

/// Bucket of `value` given cohort mean and IQR. Equality falls to the
/// less extreme side.
pub fn classify_deviation(value: f64, mean: f64, iqr: f64, k1: f64, k2: f64) -> RelativeBucket {
    let d = value - mean;
    let slack = BOUNDARY_TOLERANCE * value.abs().max(mean.abs()).max(iqr);
    if d.abs() <= k1 * iqr + slack {
        RelativeBucket::Normal
    } else if d.abs() <= k2 * iqr + slack {
        if d > 0.0 {
            RelativeBucket::High
        } else {
            RelativeBucket::Low
        }
    } else if d > 0.0 {
        RelativeBucket::VeryHigh
    } else {
        RelativeBucket::VeryLow
    }
}

pub fn bucketize(values: &[f64], target_index: usize, k1: f64, k2: f64) -> Result<RelativeBucket, BucketError> {
    let (mean, iqr) = cohort_stats(values)?;
    let v = *values.get(target_index).ok_or(BucketError::BadIndex(target_index))?;
    Ok(classify_deviation(v, mean, iqr, k1, k2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerBuckets {
    pub conversation_id: String,
    pub speaker: SpeakerId,
    pub buckets: Vec<(BasicAttribute, RelativeBucket)>,
}

impl SpeakerBuckets {
    pub fn get(&self, attr: BasicAttribute) -> Option<RelativeBucket> {
        self.buckets.iter().find(|(a, _)| *a == attr).map(|(_, b)| *b)
    }
}

/// Buckets every speaker of the cohort on each basic attribute.
pub fn bucketize_cohort(cohort: &[SpeakerAttributes], k1: f64, k2: f64) -> Result<Vec<SpeakerBuckets>, BucketError> {
    let mut stats = Vec::with_capacity(6);
    for attr in BasicAttribute::ALL {
        let col: Vec<f64> = cohort.iter().map(|a| attr.value(a)).collect();
        stats.push(cohort_stats(&col)?);
    }
    Ok(cohort
        .iter()
        .map(|a| SpeakerBuckets {
            conversation_id: a.conversation_id.clone(),
            speaker: a.speaker,
            buckets: BasicAttribute::ALL
                .iter()
                .map(|&attr| {
                    let (mean, iqr) = stats[attr.index()];
                    (attr, classify_deviation(attr.value(a), mean, iqr, k1, k2))
                })
                .collect(),
        })
        .collect())
}

/// Cohort-average affect percentages, shown next to each speaker's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortMeans {
    #[serde(with = "emotion_map")]
    pub emotion_pct: [f64; 7],
    #[serde(with = "sentiment_map")]
    pub sentiment_pct: [f64; 3],
}

pub fn cohort_means(cohort: &[SpeakerAttributes]) -> Option<CohortMeans> {
    if cohort.is_empty() {
        return None;
    }
    let n = cohort.len() as f64;
    let mut m = CohortMeans { emotion_pct: [0.0; 7], sentiment_pct: [0.0; 3] };
    for a in cohort {
        for i in 0..7 {
            m.emotion_pct[i] += a.emotion_pct[i] / n;
        }
        for i in 0..3 {
            m.sentiment_pct[i] += a.sentiment_pct[i] / n;
        }
    }
    Some(m)
}

/// Header of the attribute table.
pub fn attribute_columns() -> Vec<String> {
    let mut cols = vec!["conversation_id".to_string(), "speaker".to_string()];
    cols.extend(BasicAttribute::ALL.iter().map(|a| a.column().to_string()));
    cols.extend(Emotion::ALL.iter().map(|e| format!("emotion_{}", e.as_str())));
    cols.extend(Sentiment::ALL.iter().map(|s| format!("sentiment_{}", s.as_str())));
    cols
}

pub fn write_attributes_csv<W: Write>(out: W, rows: &[SpeakerAttributes]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(attribute_columns())?;
    for a in rows {
        let mut rec = vec![a.conversation_id.clone(), a.speaker.to_string()];
        rec.extend(BasicAttribute::ALL.iter().map(|b| b.value(a).to_string()));
        rec.extend(a.emotion_pct.iter().map(f64::to_string));
        rec.extend(a.sentiment_pct.iter().map(f64::to_string));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_buckets_csv<W: Write>(out: W, rows: &[SpeakerBuckets]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["conversation_id".to_string(), "speaker".to_string()];
    header.extend(BasicAttribute::ALL.iter().map(|a| a.column().to_string()));
    w.write_record(header)?;
    for b in rows {
        let mut rec = vec![b.conversation_id.clone(), b.speaker.to_string()];
        rec.extend(b.buckets.iter().map(|(a, k)| render_bucket(*a, *k).to_string()));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line, each terminated by a newline.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("serializable"));
        s.push('\n');
    }
    s
}

pub fn from_jsonl<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}
