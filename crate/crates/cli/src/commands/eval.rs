use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use duplex_core::attributes::SpeakerAttributes;
use duplex_core::evaluate::{attribute_values, label_similarity, trend_score, MetricsReport, TrendTable};
use duplex_core::personality::TraitPrediction;
use duplex_core::SpeakerId;

use super::attributes::ATTRIBUTES_FILE;
use super::predict::read_jsonl_file;
use super::Ctx;

fn check_range(rows: &[TraitPrediction], path: &Path) -> Result<()> {
    for r in rows {
        if let Some(v) = r.scores.0.iter().find(|v| !(-100.0..=100.0).contains(*v)) {
            bail!("{}: score {v} for {}/{} is outside [-100, 100]", path.display(), r.conversation_id, r.speaker);
        }
    }
    Ok(())
}

fn keys(rows: &[TraitPrediction]) -> Result<BTreeSet<(String, SpeakerId)>> {
    let mut set = BTreeSet::new();
    for r in rows {
        if !set.insert(r.key()) {
            bail!("speaker {}/{} appears twice", r.conversation_id, r.speaker);
        }
    }
    Ok(set)
}

fn describe(missing: &BTreeSet<&(String, SpeakerId)>) -> String {
    let shown: Vec<String> = missing.iter().take(5).map(|(c, s)| format!("{c}/{s}")).collect();
    let more = missing.len().saturating_sub(shown.len());
    if more > 0 {
        format!("{} and {more} more", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

pub fn run(
    ctx: &mut Ctx,
    predictions: &Path,
    human: Option<&Path>,
    attributes: Option<&Path>,
    trend_table: Option<&Path>,
) -> Result<()> {
    if human.is_none() && attributes.is_none() {
        bail!("nothing to evaluate: pass --human and/or --attributes");
    }
    let preds: Vec<TraitPrediction> = read_jsonl_file(ctx, predictions)?;
    check_range(&preds, predictions)?;
    let pred_keys = keys(&preds)?;
    let mut warnings = Vec::new();

    let trend = match attributes {
        Some(dir) => {
            let table = match trend_table {
                Some(p) => {
                    let text = String::from_utf8(ctx.read_input(p)?).context("trend table is not UTF-8")?;
                    TrendTable::from_csv(&text).with_context(|| format!("invalid trend table {}", p.display()))?
                }
                None => TrendTable::bundled(),
            };
            let attrs: Vec<SpeakerAttributes> = read_jsonl_file(ctx, &dir.join(ATTRIBUTES_FILE))?;
            let by_key: BTreeMap<(String, SpeakerId), &SpeakerAttributes> =
                attrs.iter().map(|a| ((a.conversation_id.clone(), a.speaker), a)).collect();
            let mut values = Vec::with_capacity(preds.len());
            for p in &preds {
                let a = by_key
                    .get(&p.key())
                    .ok_or_else(|| anyhow!("no attributes for predicted speaker {}/{}", p.conversation_id, p.speaker))?;
                values.push(attribute_values(a));
            }
            let scores: Vec<_> = preds.iter().map(|p| p.scores).collect();
            let (t, w) = trend_score(&scores, &values, &table)?;
            warnings.extend(w);
            Some(t)
        }
        None => None,
    };

    let similarity = match human {
        Some(path) => {
            let reference: Vec<TraitPrediction> = read_jsonl_file(ctx, path)?;
            check_range(&reference, path)?;
            let ref_keys = keys(&reference)?;
            if ref_keys != pred_keys {
                let only_pred: BTreeSet<_> = pred_keys.difference(&ref_keys).collect();
                let only_ref: BTreeSet<_> = ref_keys.difference(&pred_keys).collect();
                let mut msg = String::from("speaker sets of predictions and reference labels differ");
                if !only_pred.is_empty() {
                    msg.push_str(&format!("; without labels: {}", describe(&only_pred)));
                }
                if !only_ref.is_empty() {
                    msg.push_str(&format!("; without predictions: {}", describe(&only_ref)));
                }
                bail!(msg);
            }
            let (s, w) = label_similarity(&preds, &reference)?;
            warnings.extend(w);
            Some(s)
        }
        None => None,
    };

    let report = MetricsReport { trend, similarity, warnings: warnings.clone() };
    let text = report.to_text();
    ctx.out.write("metrics.json", report.to_json().as_bytes())?;
    ctx.out.write("metrics.txt", text.as_bytes())?;
    print!("{text}");
    ctx.manifest.warnings.extend(warnings);
    ctx.manifest.items_ok += preds.len();
    Ok(())
}
