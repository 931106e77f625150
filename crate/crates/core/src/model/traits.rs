use std::fmt;

use serde::{Deserialize, Serialize};

use super::affect::normalize_label;

/// Big-Five personality dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trait {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Openness,
        Trait::Conscientiousness,
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Neuroticism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Trait::Openness => "openness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::Neuroticism => "neuroticism",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Matches case-, space- and underscore-insensitively.
    pub fn parse(s: &str) -> Option<Trait> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        Trait::ALL.into_iter().find(|t| t.as_str() == key)
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraitLabel {
    #[serde(rename = "highly aligned")]
    HighlyAligned,
    #[serde(rename = "aligned")]
    Aligned,
    #[serde(rename = "neutral")]
    Neutral,
    #[serde(rename = "opposed")]
    Opposed,
    #[serde(rename = "highly opposed")]
    HighlyOpposed,
}

impl TraitLabel {
    pub const ALL: [TraitLabel; 5] = [
        TraitLabel::HighlyAligned,
        TraitLabel::Aligned,
        TraitLabel::Neutral,
        TraitLabel::Opposed,
        TraitLabel::HighlyOpposed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraitLabel::HighlyAligned => "highly aligned",
            TraitLabel::Aligned => "aligned",
            TraitLabel::Neutral => "neutral",
            TraitLabel::Opposed => "opposed",
            TraitLabel::HighlyOpposed => "highly opposed",
        }
    }

    pub fn parse(s: &str) -> Option<TraitLabel> {
        let s = normalize_label(s);
        TraitLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn from_score(score: i32) -> Option<TraitLabel> {
        TraitLabel::ALL.into_iter().find(|l| label_to_score(*l) == score)
    }
}

pub fn label_to_score(label: TraitLabel) -> i32 {
    match label {
        TraitLabel::HighlyAligned => 100,
        TraitLabel::Aligned => 50,
        TraitLabel::Neutral => 0,
        TraitLabel::Opposed => -50,
        TraitLabel::HighlyOpposed => -100,
    }
}

/// One label per trait, as returned by a single personality query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraitLabels(pub [TraitLabel; 5]);

impl TraitLabels {
    pub fn get(&self, t: Trait) -> TraitLabel {
        self.0[t.index()]
    }

    pub fn scores(&self) -> [i32; 5] {
        self.0.map(label_to_score)
    }
}

impl Serialize for TraitLabels {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        for t in Trait::ALL {
            m.serialize_entry(t.as_str(), self.get(t).as_str())?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for TraitLabels {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<String, String>::deserialize(d)?;
        let mut out = [None; 5];
        for (k, v) in &map {
            let t = Trait::parse(k).ok_or_else(|| serde::de::Error::custom(format!("unknown trait `{k}`")))?;
            let l = TraitLabel::parse(v)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown trait label `{v}`")))?;
            out[t.index()] = Some(l);
        }
        let mut labels = [TraitLabel::Neutral; 5];
        for t in Trait::ALL {
            labels[t.index()] = out[t.index()]
                .ok_or_else(|| serde::de::Error::custom(format!("missing trait `{t}`")))?;
        }
        Ok(TraitLabels(labels))
    }
}

/// Per-trait alignment score in [-100, 100].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraitScores(pub [f64; 5]);

impl TraitScores {
    pub fn get(&self, t: Trait) -> f64 {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: Trait, v: f64) {
        self.0[t.index()] = v;
    }

    pub fn from_ints(v: [i32; 5]) -> TraitScores {
        TraitScores(v.map(f64::from))
    }
}

impl Serialize for TraitScores {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        for t in Trait::ALL {
            m.serialize_entry(t.as_str(), &self.get(t))?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for TraitScores {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<String, f64>::deserialize(d)?;
        let mut out = [None; 5];
        for (k, v) in &map {
            let t = Trait::parse(k).ok_or_else(|| serde::de::Error::custom(format!("unknown trait `{k}`")))?;
            out[t.index()] = Some(*v);
        }
        let mut scores = TraitScores::default();
        for t in Trait::ALL {
            let v = out[t.index()].ok_or_else(|| serde::de::Error::custom(format!("missing trait `{t}`")))?;
            if !(-100.0..=100.0).contains(&v) {
                return Err(serde::de::Error::custom(format!("{t} score {v} outside [-100, 100]")));
            }
            scores.set(t, v);
        }
        Ok(scores)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot average an empty list of trait scores")]
pub struct EmptyScores;

/// Per-trait arithmetic mean of integer score vectors.
pub fn average_scores(scores: &[[i32; 5]]) -> Result<TraitScores, EmptyScores> {
    if scores.is_empty() {
        return Err(EmptyScores);
    }
    let mut sums = [0i64; 5];
    for v in scores {
        for (s, x) in sums.iter_mut().zip(v) {
            *s += i64::from(*x);
        }
    }
    let n = scores.len() as f64;
    Ok(TraitScores(sums.map(|s| s as f64 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn score_mapping() {
        assert_eq!(label_to_score(TraitLabel::HighlyAligned), 100);
        assert_eq!(label_to_score(TraitLabel::Aligned), 50);
        assert_eq!(label_to_score(TraitLabel::Neutral), 0);
        assert_eq!(label_to_score(TraitLabel::Opposed), -50);
        assert_eq!(label_to_score(TraitLabel::HighlyOpposed), -100);
    }

    #[test]
    fn score_mapping_is_bijective() {
        let mut seen: Vec<i32> = TraitLabel::ALL.iter().map(|l| label_to_score(*l)).collect();
        seen.sort();
        assert_eq!(seen, vec![-100, -50, 0, 50, 100]);
        for l in TraitLabel::ALL {
            assert_eq!(TraitLabel::from_score(label_to_score(l)), Some(l));
        }
    }

    #[test]
    fn averaging() {
        let ext = |v: i32| [0, 0, v, 0, 0];
        assert_eq!(average_scores(&[ext(100)]).unwrap().get(Trait::Extraversion), 100.0);
        let five = [ext(100), ext(50), ext(50), ext(0), ext(100)];
        assert_eq!(average_scores(&five).unwrap().get(Trait::Extraversion), 60.0);
        let v = [100, -50, 0, 50, -100];
        assert_eq!(average_scores(&[v; 5]).unwrap(), TraitScores::from_ints(v));
        assert_eq!(average_scores(&[]), Err(EmptyScores));
    }

    #[test]
    fn trait_keys_are_synonym_tolerant() {
        assert_eq!(Trait::parse("Extraversion"), Some(Trait::Extraversion));
        assert_eq!(Trait::parse("neuro_ticism"), Some(Trait::Neuroticism));
        assert_eq!(Trait::parse(" Agree ableness "), Some(Trait::Agreeableness));
        assert_eq!(TraitLabel::parse("Highly_Aligned"), Some(TraitLabel::HighlyAligned));
        assert_eq!(TraitLabel::parse("HIGHLY OPPOSED"), Some(TraitLabel::HighlyOpposed));
    }

    fn label() -> impl Strategy<Value = TraitLabel> {
        prop::sample::select(TraitLabel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn average_is_permutation_invariant(
            rows in prop::collection::vec(prop::array::uniform5(label()), 1..12),
            seed in any::<u64>(),
        ) {
            let ints: Vec<[i32; 5]> = rows.iter().map(|r| r.map(label_to_score)).collect();
            let mut shuffled = ints.clone();
            // rotate by a seed-dependent amount then reverse
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = average_scores(&ints).unwrap();
            let b = average_scores(&shuffled).unwrap();
            prop_assert_eq!(a, b);
            for t in Trait::ALL {
                let v = a.get(t);
                prop_assert!((-100.0..=100.0).contains(&v));
                let step = 50.0 / ints.len() as f64;
                let k = v / step;
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
        }
    }
}
