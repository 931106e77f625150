use std::time::{SystemTime, UNIX_EPOCH};

use duplex_core::gateway::UsageStats;
use duplex_core::{PipelineConfig, Warning};
use serde::Serialize;
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

/// A per-item failure: the item was skipped and the run exits nonzero.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub item: String,
    pub error: String,
}

/// Record of one command invocation, written last.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub mock: bool,
    pub config: PipelineConfig,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
    pub items_ok: usize,
    pub failures: Vec<Failure>,
    pub warnings: Vec<Warning>,
    pub llm_usage: UsageStats,
}

impl RunManifest {
    pub fn new(command: &str, config: PipelineConfig) -> RunManifest {
        RunManifest {
            tool: "duplex",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: config.rng_seed,
            mock: false,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at: now(),
            finished_at: String::new(),
            items_ok: 0,
            failures: Vec::new(),
            warnings: Vec::new(),
            llm_usage: UsageStats::default(),
        }
    }

    pub fn fail(&mut self, item: impl Into<String>, error: impl std::fmt::Display) {
        let f = Failure { item: item.into(), error: error.to_string() };
        tracing::error!(item = %f.item, "{}", f.error);
        self.failures.push(f);
    }

    pub fn finish(&mut self, outputs: &[String]) -> Vec<u8> {
        self.outputs = outputs.to_vec();
        self.finished_at = now();
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set so that manifests of
/// repeated runs compare equal.
fn now() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0));
    OffsetDateTime::from_unix_timestamp(secs)
        .ok()
        .and_then(|t| t.format(&Rfc3339).ok())
        .unwrap_or_else(|| secs.to_string())
}
