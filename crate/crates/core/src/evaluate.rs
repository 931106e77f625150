//! Trend alignment, per-trait correlation and cosine similarity of predictions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::attributes::{attribute_columns, BasicAttribute, SpeakerAttributes};
use crate::model::{SpeakerId, Trait, TraitScores, Warning};
use crate::personality::TraitPrediction;

pub const DEFAULT_TREND_TABLE: &str = include_str!("../assets/trend_table.csv");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least {0} speakers are required")]
    TooFewSpeakers(usize),
    #[error("attribute column {0:?} is missing")]
    MissingAttribute(String),
    #[error("trend table: {0}")]
    Table(String),
    #[error("no speaker appears in both predictions and labels")]
    NoCommonSpeakers,
}

/// Pearson coefficient; `degenerate` marks a constant input, for which `r` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub degenerate: bool,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooFewSpeakers(2));
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Ok(Correlation { r: 0.0, degenerate: true });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation { r: 0.0, degenerate: true });
    }
    Ok(Correlation { r: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0), degenerate: false })
}

/// Expected attribute-by-trait trends, each cell in [-100, 100].
#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    pub rows: Vec<(String, [f64; 5])>,
}

/// Row keys of a complete table, matching the attribute export columns.
pub fn trend_row_names() -> Vec<String> {
    attribute_columns().split_off(2)
}

impl TrendTable {
    pub fn new(rows: Vec<(String, [f64; 5])>) -> Self {
        TrendTable { rows }
    }

    pub fn bundled() -> Self {
        Self::from_csv(DEFAULT_TREND_TABLE).expect("bundled trend table is valid")
    }

    /// Parses a 16-row table with a trait header. Every expected row must be
    /// present exactly once.
    pub fn from_csv(text: &str) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| EvalError::Table(e.to_string()))?.clone();
        if header.len() != 6 {
            return Err(EvalError::Table(format!("expected 6 columns, found {}", header.len())));
        }
        let mut order = [0usize; 5];
        for (col, name) in header.iter().enumerate().skip(1) {
            let t = Trait::parse(name).ok_or_else(|| EvalError::Table(format!("unknown trait column {name:?}")))?;
            order[col - 1] = t.index();
        }
        let mut found: BTreeMap<String, [f64; 5]> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| EvalError::Table(e.to_string()))?;
            let name = rec.get(0).unwrap_or("").to_string();
            if !trend_row_names().contains(&name) {
                return Err(EvalError::Table(format!("unknown row {name:?}")));
            }
            let mut vals = [0.0; 5];
            for (col, cell) in rec.iter().enumerate().skip(1) {
                let v: f64 = cell.parse().map_err(|_| EvalError::Table(format!("row {name:?}: bad number {cell:?}")))?;
                if !(-100.0..=100.0).contains(&v) {
                    return Err(EvalError::Table(format!("row {name:?}: {v} outside [-100, 100]")));
                }
                vals[order[col - 1]] = v;
            }
            if found.insert(name.clone(), vals).is_some() {
                return Err(EvalError::Table(format!("duplicate row {name:?}")));
            }
        }
        let mut rows = Vec::with_capacity(16);
        for name in trend_row_names() {
            let vals = found.remove(&name).ok_or_else(|| EvalError::Table(format!("missing row {name:?}")))?;
            rows.push((name, vals));
        }
        Ok(TrendTable { rows })
    }

    /// Normalized absolute weights of one trait's column.
    pub fn weights(&self, t: Trait) -> Vec<f64> {
        let total: f64 = self.rows.iter().map(|(_, v)| v[t.index()].abs()).sum();
        self.rows.iter().map(|(_, v)| if total > 0.0 { v[t.index()].abs() / total } else { 0.0 }).collect()
    }

    pub fn negated(&self) -> Self {
        TrendTable { rows: self.rows.iter().map(|(n, v)| (n.clone(), v.map(|x| -x))).collect() }
    }
}

/// Raw attribute values of one speaker keyed by export column name.
pub fn attribute_values(a: &SpeakerAttributes) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for b in BasicAttribute::ALL {
        m.insert(b.column().to_string(), b.value(a));
    }
    for e in crate::model::Emotion::ALL {
        m.insert(format!("emotion_{}", e.as_str()), a.emotion_pct[e.index()]);
    }
    for s in crate::model::Sentiment::ALL {
        m.insert(format!("sentiment_{}", s.as_str()), a.sentiment_pct[s.index()]);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerTrait {
    pub scores: TraitScores,
    pub average: f64,
}

impl PerTrait {
    fn from_array(v: [f64; 5]) -> Self {
        PerTrait { average: v.iter().sum::<f64>() / 5.0, scores: TraitScores(v) }
    }
}

/// Weighted, sign-corrected sum of correlations between each trait's
/// predictions and the raw attributes.
pub fn trend_score(
    predictions: &[TraitScores],
    attributes: &[BTreeMap<String, f64>],
    table: &TrendTable,
) -> Result<(PerTrait, Vec<Warning>), EvalError> {
    if predictions.len() != attributes.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), attributes.len()));
    }
    if predictions.len() < 2 {
        return Err(EvalError::TooFewSpeakers(2));
    }
    let mut columns = Vec::with_capacity(table.rows.len());
    for (name, _) in &table.rows {
        let col = attributes
            .iter()
            .map(|m| m.get(name).copied().ok_or_else(|| EvalError::MissingAttribute(name.clone())))
            .collect::<Result<Vec<f64>, _>>()?;
        columns.push(col);
    }
    let mut warnings = Vec::new();
    let mut out = [0.0; 5];
    for t in Trait::ALL {
        let pred: Vec<f64> = predictions.iter().map(|p| p.get(t)).collect();
        let total: f64 = table.rows.iter().map(|(_, v)| v[t.index()].abs()).sum();
        if total == 0.0 {
            warnings.push(Warning::new(format!("trend table has no nonzero cell for {t}; score set to 0")));
            continue;
        }
        let mut score = 0.0;
        for ((name, cells), col) in table.rows.iter().zip(&columns) {
            let cell = cells[t.index()];
            if cell == 0.0 {
                continue;
            }
            let c = pearson(&pred, col)?;
            if c.degenerate {
                warnings.push(Warning::new(format!("constant input when correlating {t} with {name}; r taken as 0")));
            }
            // weight |T|/sum times sign(T) is T/sum
            score += cell / total * c.r;
        }
        out[t.index()] = score;
    }
    Ok((PerTrait::from_array(out), warnings))
}

fn cosine(a: &[f64; 5], b: &[f64; 5]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| (dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub correlation: PerTrait,
    pub cosine: f64,
    pub speakers: usize,
}

/// Compares predictions with reference labels over the speakers present in
/// both. Unmatched speakers and zero vectors are skipped with warnings.
pub fn label_similarity(
    predictions: &[TraitPrediction],
    human: &[TraitPrediction],
) -> Result<(Similarity, Vec<Warning>), EvalError> {
    let mut warnings = Vec::new();
    let reference: BTreeMap<(String, SpeakerId), &TraitPrediction> = human.iter().map(|h| (h.key(), h)).collect();
    let mut pairs = Vec::new();
    for p in predictions {
        match reference.get(&p.key()) {
            Some(h) => pairs.push((p.scores.0, h.scores.0)),
            None => warnings.push(Warning::new(format!("no reference labels for speaker {}", p.speaker)).in_conversation(&p.conversation_id)),
        }
    }
    if pairs.is_empty() {
        return Err(EvalError::NoCommonSpeakers);
    }
    let mut corr = [0.0; 5];
    if pairs.len() >= 2 {
        for t in Trait::ALL {
            let x: Vec<f64> = pairs.iter().map(|(p, _)| p[t.index()]).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, h)| h[t.index()]).collect();
            let c = pearson(&x, &y)?;
            if c.degenerate {
                warnings.push(Warning::new(format!("constant scores for {t}; correlation taken as 0")));
            }
            corr[t.index()] = c.r;
        }
    } else {
        warnings.push(Warning::new("one common speaker; correlations reported as 0"));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, h) in &pairs {
        match cosine(p, h) {
            Some(c) => {
                sum += c;
                n += 1;
            }
            None => warnings.push(Warning::new("zero score vector skipped in cosine similarity")),
        }
    }
    let cos = if n > 0 { sum / n as f64 } else { 0.0 };
    Ok((Similarity { correlation: PerTrait::from_array(corr), cosine: cos, speakers: pairs.len() }, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trend: Option<PerTrait>,
    pub similarity: Option<Similarity>,
    pub warnings: Vec<Warning>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, name: &str, p: &PerTrait| {
            let _ = write!(s, "{name:<12}");
            for t in Trait::ALL {
                let _ = write!(s, " {:>9.4}", p.scores.get(t));
            }
            let _ = writeln!(s, " {:>9.4}", p.average);
        };
        let _ = write!(s, "{:<12}", "metric");
        for t in Trait::ALL {
            let _ = write!(s, " {:>9}", &t.as_str()[..t.as_str().len().min(9)]);
        }
        let _ = writeln!(s, " {:>9}", "average");
        if let Some(t) = &self.trend {
            row(&mut s, "trend", t);
        }
        if let Some(sim) = &self.similarity {
            row(&mut s, "correlation", &sim.correlation);
            let _ = writeln!(s, "cosine       {:.4} over {} speakers", sim.cosine, sim.speakers);
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(s, "{} warnings", self.warnings.len());
        }
        s
    }
}
