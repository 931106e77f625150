use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use duplex_core::attributes::{from_jsonl, CohortMeans, SpeakerAttributes, SpeakerBuckets};
use duplex_core::attributes::to_jsonl;
use duplex_core::personality::PromptFeatures;
use duplex_core::pipeline::predict_speaker;
use rayon::prelude::*;

use super::attributes::{ATTRIBUTES_FILE, BUCKETS_FILE, MEANS_FILE};
use super::{load_datasets, Ctx};
use crate::args::ServiceArgs;
use crate::output::{expand_inputs, file_stem};
use crate::services::{apply_overrides, chat_client};

pub const PREDICTIONS_FILE: &str = "predictions.jsonl";

pub fn read_jsonl_file<T: serde::de::DeserializeOwned>(ctx: &mut Ctx, path: &Path) -> Result<Vec<T>> {
    let bytes = ctx.read_input(path)?;
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    from_jsonl(&text).with_context(|| format!("invalid record in {}", path.display()))
}

pub fn run(ctx: &mut Ctx, args: &ServiceArgs, features: &str, attributes: &Path, datasets: &[PathBuf]) -> Result<()> {
    let features = PromptFeatures::parse(features)?;
    apply_overrides(args, &mut ctx.cfg);
    ctx.manifest.mock = args.mock;
    let chat = chat_client(args, &ctx.cfg)?;

    let attrs: Vec<SpeakerAttributes> = read_jsonl_file(ctx, &attributes.join(ATTRIBUTES_FILE))?;
    let buckets: Vec<SpeakerBuckets> = read_jsonl_file(ctx, &attributes.join(BUCKETS_FILE))?;
    let means_path = attributes.join(MEANS_FILE);
    let means: CohortMeans = serde_json::from_slice(&ctx.read_input(&means_path)?)
        .with_context(|| format!("invalid {}", means_path.display()))?;
    if attrs.len() != buckets.len()
        || attrs.iter().zip(&buckets).any(|(a, b)| (&a.conversation_id, a.speaker) != (&b.conversation_id, b.speaker))
    {
        bail!("{} and {} do not describe the same speakers", ATTRIBUTES_FILE, BUCKETS_FILE);
    }

    let files = expand_inputs(datasets, "jsonl")?;
    let convs = load_datasets(ctx, &files);
    let by_id: BTreeMap<&str, usize> = convs.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();

    let cfg = &ctx.cfg;
    let results: Vec<_> = attrs
        .par_iter()
        .zip(buckets.par_iter())
        .map(|(a, b)| {
            let conv = by_id.get(a.conversation_id.as_str()).map(|&i| &convs[i]).ok_or_else(|| "dataset not among the inputs".to_string())?;
            predict_speaker(conv, a, b, Some(&means), features, cfg, chat.as_ref()).map_err(|e| e.to_string())
        })
        .collect();

    let mut predictions = Vec::with_capacity(results.len());
    for (a, r) in attrs.iter().zip(results) {
        let item = format!("{}/{}", a.conversation_id, a.speaker);
        match r {
            Ok((p, prompt)) => {
                ctx.out.write(&format!("prompts/{}_{}.txt", file_stem(&a.conversation_id), a.speaker), prompt.as_bytes())?;
                predictions.push(p);
                ctx.manifest.items_ok += 1;
            }
            Err(e) => ctx.manifest.fail(item, e),
        }
    }
    ctx.out.write(PREDICTIONS_FILE, to_jsonl(&predictions).as_bytes())?;
    ctx.manifest.llm_usage = chat.usage();
    Ok(())
}
