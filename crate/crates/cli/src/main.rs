//! `duplex`: command-line front end of the dialog annotation and
//! personality prediction pipeline.
//!
//! Exit status is 0 when every item succeeded, 1 when some items failed
//! (they are listed in the run manifest), and 2 on configuration or other
//! fatal errors.

mod args;
mod commands;
mod manifest;
mod output;
mod services;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use duplex_core::PipelineConfig;
use tracing_subscriber::EnvFilter;

use args::{Cli, Command};
use commands::Ctx;
use manifest::RunManifest;
use output::Output;

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("invalid config {}", p.display()))
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).with_target(false).init();
}

fn run(cli: Cli) -> Result<usize> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global()?;
    }

    let name = cli.command.name();
    let mut ctx = Ctx { manifest: RunManifest::new(name, cfg.clone()), cfg, out: Output::new(&cli.out_dir)? };
    if let Some(c) = &cli.config {
        ctx.note_input(c);
    }

    match &cli.command {
        Command::Synth { count, profile, no_overlap } => commands::synth::run(&mut ctx, *count, profile.as_deref(), *no_overlap)?,
        Command::Annotate { services, inputs } => commands::annotate::run(&mut ctx, services, inputs)?,
        Command::Attributes { datasets } => commands::attributes::run(&mut ctx, datasets)?,
        Command::Predict { services, features, attributes, datasets } => {
            commands::predict::run(&mut ctx, services, features, attributes, datasets)?
        }
        Command::Eval { predictions, human, attributes, trend_table } => {
            commands::eval::run(&mut ctx, predictions, human.as_deref(), attributes.as_deref(), trend_table.as_deref())?
        }
    }

    ctx.manifest.config = ctx.cfg.clone();
    let failures = ctx.manifest.failures.len();
    let ok = ctx.manifest.items_ok;
    let bytes = ctx.manifest.finish(ctx.out.written());
    ctx.out.write(&format!("manifest.{name}.json"), &bytes)?;
    eprintln!("{name}: {ok} ok, {failures} failed; outputs in {}", ctx.out.root().display());
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
