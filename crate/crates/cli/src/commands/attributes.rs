use std::path::PathBuf;

use anyhow::{Context, Result};
use duplex_core::attributes::{bucketize_cohort, cohort_means, to_jsonl, write_attributes_csv, write_buckets_csv};
use duplex_core::pipeline::batch_attributes;

use super::{load_datasets, Ctx};
use crate::output::expand_inputs;

pub const ATTRIBUTES_FILE: &str = "attributes.jsonl";
pub const BUCKETS_FILE: &str = "buckets.jsonl";
pub const MEANS_FILE: &str = "cohort_means.json";

pub fn run(ctx: &mut Ctx, datasets: &[PathBuf]) -> Result<()> {
    let files = expand_inputs(datasets, "jsonl")?;
    let convs = load_datasets(ctx, &files);
    let (attrs, warnings) = batch_attributes(&convs);
    let buckets = bucketize_cohort(&attrs, ctx.cfg.bucket_k1, ctx.cfg.bucket_k2).context("cannot bucket the cohort")?;
    let means = cohort_means(&attrs).context("empty cohort")?;

    let mut csv = Vec::new();
    write_attributes_csv(&mut csv, &attrs)?;
    ctx.out.write("attributes.csv", &csv)?;
    ctx.out.write(ATTRIBUTES_FILE, to_jsonl(&attrs).as_bytes())?;
    let mut csv = Vec::new();
    write_buckets_csv(&mut csv, &buckets)?;
    ctx.out.write("buckets.csv", &csv)?;
    ctx.out.write(BUCKETS_FILE, to_jsonl(&buckets).as_bytes())?;
    let mut m = serde_json::to_vec_pretty(&means)?;
    m.push(b'\n');
    ctx.out.write(MEANS_FILE, &m)?;

    ctx.manifest.warnings.extend(warnings);
    ctx.manifest.items_ok += convs.len();
    Ok(())
}
