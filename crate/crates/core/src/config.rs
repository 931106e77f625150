//! Pipeline configuration. Every threshold used downstream is read from here.

use serde::{Deserialize, Serialize};

use crate::model::Duration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Consecutive tokens closer than this merge into one response.
    pub gap_threshold_s: f64,
    /// Cross-speaker overlaps shorter than this are ignored.
    pub min_overlap_s: f64,
    /// Sample responses shown in the personality prompt.
    pub sample_count: usize,
    /// Samples must be strictly longer than this.
    pub sample_min_dur_s: f64,
    pub personality_query_count: usize,
    pub bucket_k1: f64,
    pub bucket_k2: f64,
    /// Responses of chat history shown before / after the overlappee.
    pub context_before: usize,
    pub context_after: usize,
    pub rng_seed: u64,
    pub llm: LlmSettings,
    pub classifier: ClassifierSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            gap_threshold_s: 0.7,
            min_overlap_s: 0.7,
            sample_count: 20,
            sample_min_dur_s: 2.0,
            personality_query_count: 5,
            bucket_k1: 0.8,
            bucket_k2: 1.2,
            context_before: 3,
            context_after: 3,
            rng_seed: 0,
            llm: LlmSettings::default(),
            classifier: ClassifierSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    /// Base URL; requests go to `{endpoint}/chat/completions`.
    pub endpoint: Option<String>,
    pub model: String,
    /// Name of the environment variable holding the bearer credential.
    pub api_key_env: String,
    pub classification_temperature: f64,
    pub personality_temperature: f64,
    pub max_tokens: u32,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub deadline_s: f64,
    pub max_in_flight: usize,
    /// Append every request and raw response to this file.
    pub journal: Option<String>,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings {
            endpoint: None,
            model: "gpt-4o-2024-11-20".to_string(),
            api_key_env: "DUPLEX_API_KEY".to_string(),
            classification_temperature: 0.0,
            personality_temperature: 0.7,
            max_tokens: 2048,
            max_attempts: 5,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            deadline_s: 60.0,
            max_in_flight: 4,
            journal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub emotion_endpoint: Option<String>,
    pub sentiment_endpoint: Option<String>,
    pub max_attempts: u32,
    pub deadline_s: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings { emotion_endpoint: None, sentiment_endpoint: None, max_attempts: 3, deadline_s: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError(m.to_string()));
        if !(self.gap_threshold_s > 0.0 && self.gap_threshold_s.is_finite()) {
            return err("gap_threshold_s must be > 0");
        }
        if !(self.min_overlap_s > 0.0 && self.min_overlap_s.is_finite()) {
            return err("min_overlap_s must be > 0");
        }
        if !(self.bucket_k1 < self.bucket_k2) || self.bucket_k1 < 0.0 {
            return err("bucket_k1 must be non-negative and below bucket_k2");
        }
        if self.personality_query_count == 0 {
            return err("personality_query_count must be >= 1");
        }
        if self.sample_count == 0 {
            return err("sample_count must be >= 1");
        }
        if !(self.sample_min_dur_s >= 0.0) {
            return err("sample_min_dur_s must be >= 0");
        }
        if self.llm.classification_temperature < 0.0 || self.llm.personality_temperature < 0.0 {
            return err("temperatures must be >= 0");
        }
        if self.llm.max_attempts == 0 || self.classifier.max_attempts == 0 {
            return err("max_attempts must be >= 1");
        }
        if self.llm.max_in_flight == 0 {
            return err("llm.max_in_flight must be >= 1");
        }
        if !(self.llm.deadline_s > 0.0) || !(self.classifier.deadline_s > 0.0) {
            return err("deadlines must be > 0");
        }
        Ok(())
    }

    pub fn gap_threshold(&self) -> Duration {
        Duration::from_secs_f64(self.gap_threshold_s)
    }

    pub fn min_overlap(&self) -> Duration {
        Duration::from_secs_f64(self.min_overlap_s)
    }

    pub fn sample_min_dur(&self) -> Duration {
        Duration::from_secs_f64(self.sample_min_dur_s)
    }
}
