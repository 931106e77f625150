use std::path::Path;

use anyhow::{Context, Result};
use duplex_core::attributes::to_jsonl;
use duplex_core::dataset::write_dataset;
use duplex_core::ingest::serialize_transcript;
use duplex_core::personality::TraitPrediction;
use duplex_core::rng::{substream, SplitMix64};
use duplex_core::synth::{generate_conversation, SynthProfile};
use duplex_core::{label_to_score, SpeakerId, TraitLabel, TraitScores};
use rayon::prelude::*;

use super::Ctx;
use crate::output::file_stem;

pub fn run(ctx: &mut Ctx, count: usize, profile: Option<&Path>, no_overlap: bool) -> Result<()> {
    let profile = match profile {
        Some(p) => {
            let text = String::from_utf8(ctx.read_input(p)?).context("profile is not UTF-8")?;
            toml::from_str::<SynthProfile>(&text).with_context(|| format!("invalid profile {}", p.display()))?
        }
        None if no_overlap => SynthProfile::no_overlap(),
        None => SynthProfile::default(),
    };
    let seed = ctx.cfg.rng_seed;
    let cfg = &ctx.cfg;
    let generated = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut s = generate_conversation(substream(seed, &format!("synth/{i}")), &profile, cfg)?;
            let id = format!("synth_{seed}_{i:04}");
            s.transcript.conversation_id = id.clone();
            s.truth.id = id;
            Ok(s)
        })
        .collect::<Result<Vec<_>, duplex_core::synth::SynthError>>()?;

    let mut reference = Vec::with_capacity(2 * count);
    for s in &generated {
        let stem = file_stem(&s.truth.id);
        ctx.out.write(&format!("transcripts/{stem}.json"), &serialize_transcript(&s.transcript))?;
        ctx.out.write(&format!("truth/{stem}.jsonl"), write_dataset(&s.truth).as_bytes())?;
        let mut script = serde_json::to_vec_pretty(&s.script)?;
        script.push(b'\n');
        ctx.out.write(&format!("scripts/{stem}.json"), &script)?;
        for sp in SpeakerId::BOTH {
            reference.push(reference_labels(seed, &s.truth.id, sp));
        }
        ctx.manifest.items_ok += 1;
    }
    ctx.out.write("human_labels.jsonl", to_jsonl(&reference).as_bytes())?;
    Ok(())
}

/// Placeholder listener ratings on the label grid, seeded per speaker, so
/// that generated batches can be run through `eval`.
fn reference_labels(seed: u64, conversation_id: &str, speaker: SpeakerId) -> TraitPrediction {
    let mut rng = SplitMix64::new(substream(seed, &format!("reference/{conversation_id}/{speaker}")));
    let scores = [(); 5].map(|_| label_to_score(TraitLabel::ALL[rng.below(5) as usize]));
    TraitPrediction {
        conversation_id: conversation_id.to_string(),
        speaker,
        scores: TraitScores::from_ints(scores),
        raw_labels: Vec::new(),
        query_count: 0,
    }
}
