pub mod annotate;
pub mod attributes;
pub mod eval;
pub mod predict;
pub mod synth;

use std::path::Path;

use anyhow::{Context, Result};
use duplex_core::dataset::read_dataset;
use duplex_core::{Conversation, PipelineConfig};

use crate::manifest::RunManifest;
use crate::output::Output;

/// State shared by one command invocation.
pub struct Ctx {
    pub cfg: PipelineConfig,
    pub out: Output,
    pub manifest: RunManifest,
}

impl Ctx {
    /// Reads an input file, recording it in the manifest and protecting it
    /// from being overwritten.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        self.note_input(path);
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
    }

    pub fn note_input(&mut self, path: &Path) {
        self.out.protect(path);
        self.manifest.inputs.push(path.display().to_string());
    }
}

/// Reads every dataset, recording unreadable or duplicate ones as failures.
pub fn load_datasets(ctx: &mut Ctx, files: &[std::path::PathBuf]) -> Vec<Conversation> {
    let mut convs: Vec<Conversation> = Vec::with_capacity(files.len());
    for f in files {
        ctx.note_input(f);
        let item = f.display().to_string();
        let text = match std::fs::read_to_string(f) {
            Ok(t) => t,
            Err(e) => {
                ctx.manifest.fail(item, e);
                continue;
            }
        };
        match read_dataset(&text) {
            Ok(c) if convs.iter().any(|o| o.id == c.id) => ctx.manifest.fail(item, format!("duplicate conversation id {:?}", c.id)),
            Ok(c) => convs.push(c),
            Err(e) => ctx.manifest.fail(item, e),
        }
    }
    convs
}
