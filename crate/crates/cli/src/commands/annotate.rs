use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::Result;
use duplex_core::dataset::write_dataset;
use duplex_core::ingest::parse_transcript;
use duplex_core::pipeline::{annotate_transcript, Services};
use rayon::prelude::*;

use super::Ctx;
use crate::args::ServiceArgs;
use crate::output::{expand_inputs, file_stem};
use crate::services::{apply_overrides, chat_client, classifiers};

pub fn run(ctx: &mut Ctx, args: &ServiceArgs, inputs: &[PathBuf]) -> Result<()> {
    apply_overrides(args, &mut ctx.cfg);
    ctx.manifest.mock = args.mock;
    // every service is set up before any input is touched
    let chat = chat_client(args, &ctx.cfg)?;
    let (emotion, sentiment) = classifiers(args, &ctx.cfg)?;
    let files = expand_inputs(inputs, "json")?;
    for f in &files {
        ctx.note_input(f);
    }

    let services = Services { chat: chat.as_ref(), emotion: emotion.as_ref(), sentiment: sentiment.as_ref() };
    let cfg = &ctx.cfg;
    let results: Vec<_> = files
        .par_iter()
        .map(|f| {
            let bytes = std::fs::read(f).map_err(|e| e.to_string())?;
            let doc = parse_transcript(&bytes).map_err(|e| e.to_string())?;
            annotate_transcript(&doc, cfg, services).map_err(|e| e.to_string())
        })
        .collect();

    let mut seen = BTreeSet::new();
    for (f, r) in files.iter().zip(results) {
        let item = f.display().to_string();
        match r {
            Ok((conv, warnings)) => {
                if !seen.insert(conv.id.clone()) {
                    ctx.manifest.fail(item, format!("duplicate conversation id {:?}", conv.id));
                    continue;
                }
                ctx.out.write(&format!("datasets/{}.jsonl", file_stem(&conv.id)), write_dataset(&conv).as_bytes())?;
                ctx.manifest.warnings.extend(warnings);
                ctx.manifest.items_ok += 1;
            }
            Err(e) => ctx.manifest.fail(item, e),
        }
    }
    ctx.manifest.llm_usage = chat.usage();
    Ok(())
}
