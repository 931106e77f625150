//! Two-channel conversation transcripts to an annotated dialog dataset, and
//! from there to Big-Five personality predictions and their evaluation.
//!
//! Stages, in pipeline order: [`ingest`], [`annotate`], [`classify`],
//! [`attributes`], [`personality`], [`evaluate`]. Chat-completion access lives
//! in [`gateway`]; [`synth`] provides generated fixtures and offline mocks.

// Negated float comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotate;
pub mod attributes;
pub mod classify;
pub mod config;
pub mod dataset;
pub mod evaluate;
pub mod gateway;
pub mod ingest;
pub mod model;
pub mod personality;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod template;

pub use config::{ClassifierSettings, ConfigError, LlmSettings, PipelineConfig};
pub use model::*;
