use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::sort_annotations;
use crate::classify::LEXICON;
use crate::config::PipelineConfig;
use crate::ingest::{Channel, Interval, TranscriptDocument};
use crate::model::{
    Conversation, Duration, Emotion, Emotion5, LaughEvent, LaughMarker, OverlapAnnotation, OverlapKind, OverlapRef,
    Response, ResponseId, ResponseLabel, Sentiment, Sentiment5, SpeakerId, Timestamp, Token, WordToken,
};

/// Event-rate profile for generated conversations. Probabilities are per
/// floor turn (listener events, speech-laughter) or per transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthProfile {
    pub floor_turns: usize,
    /// Fixed conversation length; `None` sizes it to the script.
    pub duration_s: Option<f64>,
    pub min_turn_words: usize,
    pub max_turn_words: usize,
    pub p_interjection: f64,
    pub p_same_speaker: f64,
    pub p_small_overlap: f64,
    pub p_emotive: f64,
    pub p_cognitive: f64,
    pub p_fail: f64,
    pub p_short_backchannel: f64,
    pub p_laugh: f64,
    pub p_speech_laugh: f64,
    pub p_silence_clip: f64,
    pub p_noise: f64,
    /// Chance of using exact-threshold geometry where one applies.
    pub p_boundary: f64,
    pub p_affect: f64,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            floor_turns: 30,
            duration_s: None,
            min_turn_words: 8,
            max_turn_words: 24,
            p_interjection: 0.25,
            p_same_speaker: 0.1,
            p_small_overlap: 0.3,
            p_emotive: 0.25,
            p_cognitive: 0.25,
            p_fail: 0.15,
            p_short_backchannel: 0.15,
            p_laugh: 0.2,
            p_speech_laugh: 0.2,
            p_silence_clip: 0.15,
            p_noise: 0.1,
            p_boundary: 0.2,
            p_affect: 0.4,
        }
    }
}

impl SynthProfile {
    /// No overlapping speech at all: every response is a plain turn.
    pub fn no_overlap() -> Self {
        SynthProfile {
            p_interjection: 0.0,
            p_small_overlap: 0.0,
            p_emotive: 0.0,
            p_cognitive: 0.0,
            p_fail: 0.0,
            p_short_backchannel: 0.0,
            ..SynthProfile::default()
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            self.p_interjection,
            self.p_same_speaker,
            self.p_small_overlap,
            self.p_emotive,
            self.p_cognitive,
            self.p_fail,
            self.p_short_backchannel,
            self.p_laugh,
            self.p_speech_laugh,
            self.p_silence_clip,
            self.p_noise,
            self.p_boundary,
            self.p_affect,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(SynthError::Infeasible("probabilities must lie in [0, 1]".into()));
        }
        if self.p_interjection + self.p_same_speaker > 1.0 {
            return Err(SynthError::Infeasible("transition probabilities sum above 1".into()));
        }
        if self.p_emotive + self.p_cognitive + self.p_fail + self.p_short_backchannel > 1.0 {
            return Err(SynthError::Infeasible("listener event probabilities sum above 1".into()));
        }
        if self.floor_turns == 0 {
            return Err(SynthError::Infeasible("floor_turns must be >= 1".into()));
        }
        if self.min_turn_words == 0 || self.min_turn_words > self.max_turn_words {
            return Err(SynthError::Infeasible("turn word range is empty".into()));
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0 && d.is_finite()) {
                return Err(SynthError::Infeasible("duration_s must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible profile: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Turn,
    BackchannelEmotive,
    BackchannelCognitive,
    InterjectionSuccess,
    InterjectionFail,
    Laugh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub speaker: SpeakerId,
    pub kind: EventKind,
    pub start: Timestamp,
    pub end: Timestamp,
    pub word_count: usize,
    pub lexicon_tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConversation {
    pub transcript: TranscriptDocument,
    /// Expected conversation after the full pipeline with mock services.
    pub truth: Conversation,
    pub script: Vec<ScriptedEvent>,
}

const FILLER: &[&str] = &[
    "so", "we", "went", "to", "the", "store", "and", "then", "it", "was", "kind", "of", "like", "you", "know", "i",
    "think", "they", "have", "a", "lot", "about", "that", "when", "just", "there", "because", "my", "family", "lives",
    "in", "town", "work", "is", "far", "from", "here", "um", "uh", "well", "do", "not", "mean", "call", "weekend",
];

/// (text, expected emotion, expected sentiment)
const EMOTIVE: &[(&str, Emotion, Sentiment)] = &[
    ("wow", Emotion::Surprise, Sentiment::Positive),
    ("oh wow", Emotion::Surprise, Sentiment::Positive),
    ("oh", Emotion::Neutral, Sentiment::Neutral),
    ("oh my god", Emotion::Neutral, Sentiment::Neutral),
];
const COGNITIVE: &[(&str, Emotion, Sentiment)] = &[
    ("yeah", Emotion::Neutral, Sentiment::Neutral),
    ("i see", Emotion::Neutral, Sentiment::Neutral),
    ("right", Emotion::Neutral, Sentiment::Neutral),
    ("yeah right", Emotion::Neutral, Sentiment::Neutral),
];
const FAIL: &[(&str, Emotion, Sentiment)] = &[
    ("wait let me tell you about that", Emotion::Neutral, Sentiment::Neutral),
    ("but i think the store was closed then", Emotion::Neutral, Sentiment::Neutral),
    ("no no my family lives far from here", Emotion::Neutral, Sentiment::Neutral),
];

type Word = (String, i64, i64);

struct Planned {
    speaker: SpeakerId,
    kind: EventKind,
    tag: String,
    words: Vec<Word>,
    /// Speech-laughter over `words[i..=j]`, with the laugh event span.
    speech_laugh: Option<(usize, usize, i64, i64)>,
    /// Laughter-only response span.
    laugh: Option<(i64, i64)>,
    partner: Option<(usize, OverlapKind)>,
    emotion: Emotion,
    sentiment: Sentiment,
    bc5: Option<(Emotion5, Sentiment5)>,
}

impl Planned {
    fn start(&self) -> i64 {
        self.laugh.map(|l| l.0).unwrap_or_else(|| self.words[0].1)
    }

    fn end(&self) -> i64 {
        self.laugh.map(|l| l.1).unwrap_or_else(|| self.words.last().expect("words").2)
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    p: &'a SynthProfile,
    gap: i64,
    min: i64,
    plan: Vec<Planned>,
    last_end: [i64; 2],
}

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.gen_bool(p)
    }

    fn range(&mut self, lo: i64, hi: i64) -> i64 {
        if hi <= lo {
            lo
        } else {
            self.rng.gen_range(lo..=hi)
        }
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())]
    }

    fn intra_gap(&mut self) -> i64 {
        if self.chance(self.p.p_boundary * 0.2) {
            self.gap - 1
        } else {
            self.range(0, 250)
        }
    }

    fn push_word(&mut self, words: &mut Vec<Word>, text: &str, at: i64) {
        let dur = self.range(150, 500);
        words.push((text.to_string(), at, at + dur));
    }

    /// A floor turn's words from `start`; extended until it ends after `must_pass`.
    fn turn_words(&mut self, start: i64, must_pass: Option<i64>) -> (Vec<Word>, String, Emotion, Sentiment) {
        let n = self.rng.gen_range(self.p.min_turn_words..=self.p.max_turn_words);
        let mut texts: Vec<&str> = (0..n).map(|_| self.pick(FILLER)).collect();
        let (mut tag, mut emotion, mut sentiment) = ("neutral".to_string(), Emotion::Neutral, Sentiment::Neutral);
        if self.chance(self.p.p_affect) {
            let (kw, e, s) = self.pick(LEXICON);
            let pos = self.rng.gen_range(0..=texts.len());
            texts.insert(pos, kw);
            tag = kw.to_string();
            emotion = e;
            sentiment = s;
        }
        let mut words = Vec::with_capacity(texts.len() + 2);
        let mut t = start;
        for (i, w) in texts.iter().enumerate() {
            if i > 0 {
                t = words.last().map(|x: &Word| x.2).unwrap_or(t) + self.intra_gap();
            }
            self.push_word(&mut words, w, t);
        }
        if let Some(limit) = must_pass {
            while words.last().expect("non-empty").2 <= limit {
                let at = words.last().expect("non-empty").2 + self.range(0, 250);
                let w = self.pick(FILLER);
                self.push_word(&mut words, w, at);
            }
        }
        (words, tag, emotion, sentiment)
    }

    /// Words of `text` filling exactly `[start, start + total]`.
    fn spanning(&mut self, start: i64, total: i64, text: &str) -> Vec<Word> {
        let texts: Vec<&str> = text.split_whitespace().collect();
        let k = texts.len() as i64;
        let mut gaps: Vec<i64> = (1..k).map(|_| self.range(0, 60)).collect();
        if total - gaps.iter().sum::<i64>() < 10 * k {
            gaps.iter_mut().for_each(|g| *g = 0);
        }
        let word_total = total - gaps.iter().sum::<i64>();
        let each = word_total / k;
        let mut out = Vec::with_capacity(texts.len());
        let mut t = start;
        for (i, w) in texts.iter().enumerate() {
            let dur = if i as i64 == k - 1 { start + total - t } else { each };
            out.push((w.to_string(), t, t + dur));
            t += dur;
            if let Some(g) = gaps.get(i) {
                t += g;
            }
        }
        out
    }

    fn add_speech_laugh(&mut self, idx: usize) {
        if !self.chance(self.p.p_speech_laugh) {
            return;
        }
        let words = &self.plan[idx].words;
        let n = words.len();
        let i = self.rng.gen_range(0..n);
        let j = (i + self.rng.gen_range(0..3)).min(n - 1);
        let before = if i > 0 { words[i].1 - words[i - 1].2 } else { 300 };
        let after = if j + 1 < n { words[j + 1].1 - words[j].2 } else { 300 };
        let (ws, we) = (words[i].1, words[j].2);
        let e1 = self.range(0, before);
        let e2 = self.range(0, after);
        self.plan[idx].speech_laugh = Some((i, j, ws - e1, we + e2));
    }

    fn push(&mut self, p: Planned) -> usize {
        let s = p.speaker.index();
        self.last_end[s] = self.last_end[s].max(p.end());
        self.plan.push(p);
        self.plan.len() - 1
    }

    fn floor_turn(&mut self, speaker: SpeakerId, start: i64, must_pass: Option<i64>, kind: EventKind, partner: Option<usize>) -> usize {
        let (words, tag, emotion, sentiment) = self.turn_words(start, must_pass);
        let idx = self.push(Planned {
            speaker,
            kind,
            tag,
            words,
            speech_laugh: None,
            laugh: None,
            partner: partner.map(|p| (p, OverlapKind::Partial)),
            emotion,
            sentiment,
            bc5: None,
        });
        self.add_speech_laugh(idx);
        idx
    }

    /// Places backchannels / failed interjections / short replies inside a host turn.
    fn listener_events(&mut self, host: usize) {
        let listener = self.plan[host].speaker.other();
        let (hs, he) = (self.plan[host].start(), self.plan[host].end());
        for _ in 0..2 {
            let roll: f64 = self.rng.gen();
            let p = self.p;
            let mut acc = p.p_emotive;
            let kind = if roll < acc {
                EventKind::BackchannelEmotive
            } else if roll < {
                acc += p.p_cognitive;
                acc
            } {
                EventKind::BackchannelCognitive
            } else if roll < {
                acc += p.p_fail;
                acc
            } {
                EventKind::InterjectionFail
            } else if roll < acc + p.p_short_backchannel {
                EventKind::Turn
            } else {
                continue;
            };
            let (text, emotion, sentiment) = match kind {
                EventKind::BackchannelEmotive => self.pick(EMOTIVE),
                EventKind::BackchannelCognitive => self.pick(COGNITIVE),
                EventKind::InterjectionFail => self.pick(FAIL),
                _ => {
                    if self.chance(0.5) {
                        self.pick(EMOTIVE)
                    } else {
                        self.pick(COGNITIVE)
                    }
                }
            };
            let boundary = self.chance(self.p.p_boundary);
            let total = match kind {
                EventKind::Turn if boundary => self.min - 1,
                EventKind::Turn => self.range(100, self.min - 1),
                EventKind::InterjectionFail => {
                    let k = text.split_whitespace().count() as i64;
                    if boundary { self.min.max(k * 10) } else { self.range((k * 200).max(self.min), k * 350) }
                }
                _ if boundary => self.min,
                _ => self.range(self.min, self.min + 600),
            };
            let earliest = (hs + 1).max(self.last_end[listener.index()] + self.gap);
            let latest = he - 1 - total;
            if earliest > latest {
                continue;
            }
            let start = self.range(earliest, latest);
            let words = self.spanning(start, total, text);
            let (partner, bc5) = match kind {
                EventKind::Turn => (None, None),
                EventKind::BackchannelEmotive => {
                    (Some((host, OverlapKind::Fully)), Some((Emotion5::Surprised, Sentiment5::Positive)))
                }
                _ => (Some((host, OverlapKind::Fully)), Some((Emotion5::Neutral, Sentiment5::Neutral))),
            };
            let tag = if kind == EventKind::Turn { "short_backchannel".to_string() } else { text.to_string() };
            self.push(Planned {
                speaker: listener,
                kind,
                tag,
                words,
                speech_laugh: None,
                laugh: None,
                partner,
                emotion,
                sentiment,
                bc5,
            });
        }
    }

    fn laugh_only(&mut self, speaker: SpeakerId, start: i64, end: i64) {
        self.push(Planned {
            speaker,
            kind: EventKind::Laugh,
            tag: "laughter".into(),
            words: Vec::new(),
            speech_laugh: None,
            laugh: Some((start, end)),
            partner: None,
            emotion: Emotion::Neutral,
            sentiment: Sentiment::Neutral,
            bc5: None,
        });
    }

    /// Hands the floor on from `cur`; returns the new floor turn.
    fn transition(&mut self, cur: usize) -> usize {
        let y = self.plan[cur].speaker;
        let x = y.other();
        let (ys, ye) = (self.plan[cur].start(), self.plan[cur].end());
        let roll: f64 = self.rng.gen();

        if roll < self.p.p_same_speaker {
            let pause = if self.chance(self.p.p_boundary) { self.gap } else { self.range(self.gap, self.gap + 1500) };
            let start = self.last_end[y.index()] + pause;
            return self.floor_turn(y, start, None, EventKind::Turn, None);
        }

        let x_ready = self.last_end[x.index()] + self.gap;
        if roll < self.p.p_same_speaker + self.p.p_interjection {
            let overlap = if self.chance(self.p.p_boundary) { self.min } else { self.range(self.min, self.min + 1500) };
            let start = ye - overlap;
            if start > ys && start >= x_ready {
                if self.chance(self.p.p_boundary) {
                    // end-time tie with the overlappee
                    let text = (0..self.range(2, 5)).map(|_| self.pick(FILLER)).collect::<Vec<_>>().join(" ");
                    let words = self.spanning(start, overlap, &text);
                    return self.push(Planned {
                        speaker: x,
                        kind: EventKind::InterjectionSuccess,
                        tag: "end_tie".into(),
                        words,
                        speech_laugh: None,
                        laugh: None,
                        partner: Some((cur, OverlapKind::Partial)),
                        emotion: Emotion::Neutral,
                        sentiment: Sentiment::Neutral,
                        bc5: None,
                    });
                }
                return self.floor_turn(x, start, Some(ye), EventKind::InterjectionSuccess, Some(cur));
            }
        }

        if self.chance(self.p.p_small_overlap) {
            let overlap = if self.chance(self.p.p_boundary) { self.min - 1 } else { self.range(1, self.min - 1) };
            let start = ye - overlap;
            if start > ys && start >= x_ready {
                return self.floor_turn(x, start, Some(ye), EventKind::Turn, None);
            }
        }

        let mut start = (ye + self.range(50, 1500)).max(x_ready);
        if self.chance(self.p.p_laugh) {
            let dur = self.range(300, 1500);
            if self.chance(0.5) {
                let ls = ye.max(self.last_end[y.index()]) + self.gap + self.range(0, 500);
                self.laugh_only(y, ls, ls + dur);
                start = start.max(ls + dur + self.range(0, 800));
            } else {
                let ls = ye.max(x_ready);
                self.laugh_only(x, ls, ls + dur);
                start = ls + dur + self.gap + self.range(0, 800);
            }
        }
        self.floor_turn(x, start, None, EventKind::Turn, None)
    }
}

fn ms(v: i64) -> Timestamp {
    Timestamp::from_millis(v)
}

/// Generates one conversation plus the exact expected annotation.
///
/// Timing lives on a 1 ms grid. Same-speaker events are separated by at
/// least the gap threshold, overlaps are realized only where scripted, and
/// silence intervals clip word edges that the ground truth already excludes.
pub fn generate_conversation(
    seed: u64,
    profile: &SynthProfile,
    cfg: &PipelineConfig,
) -> Result<SynthConversation, SynthError> {
    profile.validate()?;
    let gap = cfg.gap_threshold().micros() / 1000;
    let min = cfg.min_overlap().micros() / 1000;
    if gap < 2 || min < 2 {
        return Err(SynthError::Infeasible("thresholds below 2 ms cannot be realized".into()));
    }
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), p: profile, gap, min, plan: Vec::new(), last_end: [i64::MIN / 4; 2] };

    let first_speaker = if g.chance(0.5) { SpeakerId::A } else { SpeakerId::B };
    let start = g.range(500, 1500);
    let mut cur = g.floor_turn(first_speaker, start, None, EventKind::Turn, None);
    for _ in 1..profile.floor_turns {
        g.listener_events(cur);
        cur = g.transition(cur);
    }
    g.listener_events(cur);

    let script_end = g.plan.iter().map(Planned::end).max().unwrap_or(0);
    let duration_ms = match profile.duration_s {
        Some(d) => {
            let d_ms = (d * 1000.0).round() as i64;
            if script_end + 300 > d_ms {
                return Err(SynthError::Infeasible(format!(
                    "script needs {:.1} s but duration_s is {d}",
                    (script_end + 300) as f64 / 1000.0
                )));
            }
            d_ms
        }
        None => script_end + 1000,
    };

    let mut rng = g.rng;
    let plan = g.plan;
    let transcript = build_transcript(&mut rng, profile, &plan, seed, duration_ms);
    let (truth, script) = build_truth(&plan, &transcript.conversation_id, duration_ms);
    Ok(SynthConversation { transcript, truth, script })
}

fn build_transcript(
    rng: &mut ChaCha8Rng,
    profile: &SynthProfile,
    plan: &[Planned],
    seed: u64,
    duration_ms: i64,
) -> TranscriptDocument {
    let mut channels = Vec::with_capacity(2);
    let mut silences = Vec::new();
    let mut laughs = Vec::new();
    for speaker in SpeakerId::BOTH {
        let mut words: Vec<(String, i64, i64)> =
            plan.iter().filter(|p| p.speaker == speaker).flat_map(|p| p.words.iter().cloned()).collect();
        words.sort_by_key(|w| w.1);

        // raw words run into the following gap; a silence clips them back
        let mut raw: Vec<(String, i64, i64)> = Vec::with_capacity(words.len());
        for (i, (text, s, e)) in words.iter().enumerate() {
            let room = words.get(i + 1).map_or(1000, |n| n.1 - e);
            let mut end = *e;
            if room >= 4 && profile.p_silence_clip > 0.0 && rng.gen_bool(profile.p_silence_clip) {
                let delta = rng.gen_range(1..=(room / 2).min(200));
                end = e + delta;
                silences.push((speaker, Interval::new(ms(*e), ms(end))));
            }
            raw.push((text.clone(), *s, end));
        }

        // noise words entirely inside silence, dropped by trimming
        let mut with_noise = Vec::with_capacity(raw.len());
        for i in 0..raw.len() {
            with_noise.push(raw[i].clone());
            if let Some(next) = raw.get(i + 1) {
                let (lo, hi) = (raw[i].2, next.1);
                if hi - lo >= 1200 && profile.p_noise > 0.0 && rng.gen_bool(profile.p_noise) {
                    let mid = (lo + hi) / 2;
                    with_noise.push(("uh".to_string(), mid - 100, mid + 100));
                    silences.push((speaker, Interval::new(ms(mid - 150), ms(mid + 150))));
                }
            }
        }

        channels.push(Channel {
            speaker,
            words: with_noise.into_iter().map(|(t, s, e)| WordToken::new(t, ms(s), ms(e), speaker)).collect(),
        });

        for p in plan.iter().filter(|p| p.speaker == speaker) {
            if let Some((_, _, ls, le)) = p.speech_laugh {
                laughs.push(LaughEvent { start: ms(ls), end: ms(le), speaker });
            }
            if let Some((ls, le)) = p.laugh {
                laughs.push(LaughEvent { start: ms(ls), end: ms(le), speaker });
            }
        }
    }
    laughs.sort_by_key(|l| (l.speaker, l.start, l.end));
    silences.sort_by_key(|(s, i)| (*s, i.start, i.end));
    let b = channels.pop().expect("two channels");
    let a = channels.pop().expect("two channels");
    TranscriptDocument {
        conversation_id: format!("synth_{seed}"),
        duration: Duration::from_millis(duration_ms),
        channels: [a, b],
        laughs,
        silences: Some(silences),
    }
}

fn build_truth(plan: &[Planned], id: &str, duration_ms: i64) -> (Conversation, Vec<ScriptedEvent>) {
    let mut order: Vec<usize> = (0..plan.len()).collect();
    order.sort_by_key(|&i| (plan[i].start(), plan[i].speaker));
    let mut rid = vec![ResponseId(0); plan.len()];
    for (k, &i) in order.iter().enumerate() {
        rid[i] = ResponseId(k as u32);
    }

    let mut responses = Vec::with_capacity(plan.len());
    let mut overlaps = Vec::new();
    let mut script = Vec::with_capacity(plan.len());
    for &i in &order {
        let p = &plan[i];
        let mut tokens = Vec::with_capacity(p.words.len() + 2);
        if let Some((ls, le)) = p.laugh {
            tokens.push(Token::marker(LaughMarker::Laughter, ms(ls), ms(le), p.speaker));
        }
        for (k, (text, s, e)) in p.words.iter().enumerate() {
            let laugh = p.speech_laugh.filter(|l| l.0 <= k && k <= l.1);
            if matches!(laugh, Some(l) if l.0 == k) {
                tokens.push(Token::marker(LaughMarker::StartLaugh, ms(*s), ms(*s), p.speaker));
            }
            tokens.push(Token::word(&WordToken::new(text.clone(), ms(*s), ms(*e), p.speaker)));
            if matches!(laugh, Some(l) if l.1 == k) {
                tokens.push(Token::marker(LaughMarker::EndLaugh, ms(*e), ms(*e), p.speaker));
            }
        }
        let mut r = Response::from_tokens(rid[i], p.speaker, tokens);
        r.label = match p.kind {
            EventKind::Turn | EventKind::Laugh => ResponseLabel::Turn,
            EventKind::InterjectionSuccess => ResponseLabel::SuccessfulInterjection,
            EventKind::BackchannelEmotive => ResponseLabel::EmotiveBackchannel,
            EventKind::BackchannelCognitive => ResponseLabel::CognitiveBackchannel,
            EventKind::InterjectionFail => ResponseLabel::UnsuccessfulInterjection,
        };
        r.emotion = p.emotion;
        r.sentiment = p.sentiment;
        if let Some((e5, s5)) = p.bc5 {
            r.bc_emotion5 = Some(e5);
            r.bc_sentiment5 = Some(s5);
        }
        if let Some((host, kind)) = p.partner {
            r.overlap = Some(OverlapRef { kind, partner: rid[host] });
            let h = &plan[host];
            overlaps.push(OverlapAnnotation {
                overlapper: rid[i],
                overlappee: rid[host],
                kind,
                start: ms(p.start().max(h.start())),
                end: ms(p.end().min(h.end())),
            });
        }
        script.push(ScriptedEvent {
            speaker: p.speaker,
            kind: p.kind,
            start: r.start,
            end: r.end,
            word_count: p.words.len(),
            lexicon_tag: p.tag.clone(),
        });
        responses.push(r);
    }
    sort_annotations(&mut overlaps);
    let conv = Conversation {
        id: id.to_string(),
        duration: Duration::from_millis(duration_ms),
        responses,
        overlaps,
        source: None,
    };
    (conv, script)
}
