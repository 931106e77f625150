use serde_json::json;

use crate::model::{Trait, TraitLabel};
use crate::rng::SplitMix64;

pub const BACKCHANNEL_PROMPT_MARKER: &str = "Your task is to classify the type of backchannel.";
pub const PERSONALITY_PROMPT_MARKER: &str = "Big Five Inventory (BFI) Personality Traits";
const TARGET_LINE: &str = "Target interjection text:";

/// Rule-based stand-in for a chat model. Pure in `(prompt, seed)`.
///
/// Backchannel prompts are answered from the target text: six or more words
/// is "not backchannel", "wow"/"oh" is emotive, "yeah"/"right"/"i see" is
/// cognitive, laughter alone is emotive, anything else cognitive.
/// Personality prompts are answered from the rendered basic-statistics
/// buckets and affect percentages. The seed only varies the prose preamble.
pub fn mock_chat(prompt: &str, seed: u64) -> String {
    let mut rng = SplitMix64::new(seed ^ fingerprint(prompt));
    if prompt.contains(BACKCHANNEL_PROMPT_MARKER) {
        backchannel_reply(prompt, &mut rng)
    } else if prompt.contains(PERSONALITY_PROMPT_MARKER) {
        personality_reply(prompt, &mut rng)
    } else {
        let openers = ["I am not sure what is being asked.", "No classification task was found in the prompt."];
        openers[rng.below(openers.len() as u64) as usize].to_string()
    }
}

fn fingerprint(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// The backchannel verdict the mock gives for a target text.
pub fn mock_backchannel_verdict(target: &str) -> (&'static str, &'static str, &'static str) {
    let words: Vec<&str> = target.split_whitespace().filter(|w| !(w.starts_with('[') && w.ends_with(']'))).collect();
    let has = |w: &str| words.contains(&w);
    if words.len() >= 6 {
        ("not backchannel", "neutral", "neutral")
    } else if has("wow") || has("oh") || words.is_empty() {
        ("emotive", "surprised", "positive")
    } else {
        // "yeah", "right", "i see" and any other short reply
        ("cognitive", "neutral", "neutral")
    }
}

fn backchannel_reply(prompt: &str, rng: &mut SplitMix64) -> String {
    let target = prompt
        .lines()
        .find_map(|l| l.trim().strip_prefix(TARGET_LINE))
        .map(str::trim)
        .unwrap_or("");
    let (kind, emotion, sentiment) = mock_backchannel_verdict(target);
    let openers = [
        "1. The speakers are chatting about everyday matters.",
        "1. The conversation continues around the target response.",
        "1. Both speakers exchange short remarks.",
    ];
    let verdict = json!({
        "interjection text": target,
        "interjection type": kind,
        "emotion": emotion,
        "sentiment": sentiment,
    });
    format!(
        "{}\n2. The target text is \"{}\".\n3. Decision: {}.\n\n```json\n{}\n```\n",
        openers[rng.below(openers.len() as u64) as usize],
        target,
        kind,
        serde_json::to_string_pretty(&verdict).expect("json")
    )
}

fn bucket_level(prompt: &str, heading: &str) -> i32 {
    let Some(value) = prompt.lines().find_map(|l| l.trim().strip_prefix(heading)).map(str::trim) else {
        return 0;
    };
    match value {
        "Very Many" | "Very Long" | "Very Frequent" => 2,
        "Many" | "Long" | "Frequent" => 1,
        "Few" | "Short" | "Infrequent" => -1,
        "Very Few" | "Very Short" | "Very Infrequent" => -2,
        _ => 0,
    }
}

/// Percentage-point excess of `class` over its cohort average, if shown.
fn pct_excess(prompt: &str, section: &str, class: &str) -> Option<f64> {
    let mut in_section = false;
    for line in prompt.lines() {
        let t = line.trim();
        if t == section {
            in_section = true;
            continue;
        }
        if in_section {
            if t.is_empty() {
                break;
            }
            if let Some(rest) = t.strip_prefix(class).and_then(|r| r.strip_prefix(':')) {
                let (own, avg) = rest.split_once("(average:")?;
                let own: f64 = own.trim().trim_end_matches('%').parse().ok()?;
                let avg: f64 = avg.trim().trim_end_matches(')').trim_end_matches('%').parse().ok()?;
                return Some(own - avg);
            }
        }
    }
    None
}

fn level_of_excess(x: f64) -> i32 {
    if x > 10.0 {
        2
    } else if x > 3.0 {
        1
    } else if x < -10.0 {
        -2
    } else if x < -3.0 {
        -1
    } else {
        0
    }
}

fn label_of(sum: i32) -> TraitLabel {
    match sum {
        s if s >= 3 => TraitLabel::HighlyAligned,
        1 | 2 => TraitLabel::Aligned,
        0 => TraitLabel::Neutral,
        -2 | -1 => TraitLabel::Opposed,
        _ => TraitLabel::HighlyOpposed,
    }
}

/// Trait labels the mock derives from a rendered personality prompt.
pub fn mock_personality_labels(prompt: &str) -> [TraitLabel; 5] {
    let turns = bucket_level(prompt, "Number of turns:");
    let duration = bucket_level(prompt, "Talking time per turn:");
    let laughter = bucket_level(prompt, "Frequency of Laughter:");
    let emotive = bucket_level(prompt, "Frequency of Emotive Backchannel:");
    let cognitive = bucket_level(prompt, "Frequency of Cognitive Backchannel:");
    let interjections = bucket_level(prompt, "Frequency of interjections:");
    let negative = pct_excess(prompt, "Sentiment:", "negative").unwrap_or(0.0);
    let positive = pct_excess(prompt, "Sentiment:", "positive").unwrap_or(0.0);
    let joy = pct_excess(prompt, "Emotions:", "joy").unwrap_or(0.0);

    let mut out = [TraitLabel::Neutral; 5];
    out[Trait::Openness.index()] = label_of(duration + turns);
    out[Trait::Conscientiousness.index()] = label_of(cognitive - interjections);
    out[Trait::Extraversion.index()] = label_of(laughter + turns);
    out[Trait::Agreeableness.index()] = label_of(cognitive + emotive + level_of_excess(joy).signum());
    out[Trait::Neuroticism.index()] = label_of(level_of_excess(negative - positive));
    out
}

fn personality_reply(prompt: &str, rng: &mut SplitMix64) -> String {
    let labels = mock_personality_labels(prompt);
    let mut obj = serde_json::Map::new();
    for t in Trait::ALL {
        obj.insert(t.as_str().to_string(), json!(labels[t.index()].as_str()));
    }
    let openers = [
        "1. Relevant features include turn-taking, laughter and backchannel frequency.",
        "1. The speaker's statistics and samples were reviewed.",
        "1. Features considered: basics, affect distribution and sample responses.",
    ];
    format!(
        "{}\n8. Final classification:\n```json\n{}\n```\n",
        openers[rng.below(openers.len() as u64) as usize],
        serde_json::to_string_pretty(&obj).expect("json")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::extract_trailing_json;

    fn bc_prompt(target: &str) -> String {
        format!("{BACKCHANNEL_PROMPT_MARKER}\n{TARGET_LINE} {target}\nSpeaker B: so {{{{{{(TARGET) Speaker A: {target}}}}}}} ok")
    }

    #[test]
    fn backchannel_rules() {
        let kind = |t: &str| {
            let reply = mock_chat(&bc_prompt(t), 1);
            extract_trailing_json(&reply).unwrap()["interjection type"].as_str().unwrap().to_string()
        };
        assert_eq!(kind("wow"), "emotive");
        assert_eq!(kind("oh really"), "emotive");
        assert_eq!(kind("i see"), "cognitive");
        assert_eq!(kind("yeah"), "cognitive");
        assert_eq!(kind("wait wait let me say one more thing"), "not backchannel");
        assert_eq!(kind("[Laughter]"), "emotive");
    }

    #[test]
    fn target_marker_is_in_prompt() {
        let p = bc_prompt("wow");
        assert!(p.contains("{{{(TARGET) Speaker A: wow}}}"));
    }

    #[test]
    fn personality_follows_buckets() {
        let prompt = format!(
            "{PERSONALITY_PROMPT_MARKER}\nBasic Statistics:\n  Number of turns: Many\n  Frequency of Laughter: Very Frequent\n"
        );
        let labels = mock_personality_labels(&prompt);
        assert_eq!(labels[Trait::Extraversion.index()], TraitLabel::HighlyAligned);
        assert_eq!(labels[Trait::Openness.index()], TraitLabel::Aligned);
        let reply = mock_chat(&prompt, 4);
        let obj = extract_trailing_json(&reply).unwrap();
        assert_eq!(obj["extraversion"], "highly aligned");
    }

    #[test]
    fn reads_affect_excess() {
        let p = "Sentiment:\n  positive: 10.0% (average: 12.0%)\n  negative: 40.0% (average: 25.5%)\n\nBasic";
        assert_eq!(pct_excess(p, "Sentiment:", "negative"), Some(14.5));
        assert_eq!(pct_excess(p, "Sentiment:", "positive"), Some(-2.0));
        assert_eq!(pct_excess(p, "Emotions:", "joy"), None);
    }

    #[test]
    fn pure_in_prompt_and_seed() {
        let p = bc_prompt("yeah");
        assert_eq!(mock_chat(&p, 3), mock_chat(&p, 3));
    }
}
