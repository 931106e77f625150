//! Chat and classifier backends selected from flags, environment and config.

use anyhow::{anyhow, Result};
use duplex_core::classify::{HttpTextClassifier, LexiconMock, TextClassifier};
use duplex_core::gateway::{ChatClient, HttpChatClient, MockChatClient};
use duplex_core::rng::substream;
use duplex_core::PipelineConfig;

use crate::args::ServiceArgs;

/// Environment variable overriding the configured chat endpoint.
pub const ENDPOINT_ENV: &str = "DUPLEX_ENDPOINT";

/// Applies `--model` and the endpoint precedence (flag, environment, file).
pub fn apply_overrides(args: &ServiceArgs, cfg: &mut PipelineConfig) {
    if let Some(m) = &args.model {
        cfg.llm.model = m.clone();
    }
    if let Some(e) = args.endpoint.clone().or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|v| !v.trim().is_empty())) {
        cfg.llm.endpoint = Some(e);
    }
}

pub fn chat_client(args: &ServiceArgs, cfg: &PipelineConfig) -> Result<Box<dyn ChatClient>> {
    if args.mock {
        return Ok(Box::new(MockChatClient::new(substream(cfg.rng_seed, "mock"))));
    }
    if cfg.llm.endpoint.is_none() {
        return Err(anyhow!("no chat endpoint configured: pass --endpoint, set {ENDPOINT_ENV}, set llm.endpoint, or use --mock"));
    }
    Ok(Box::new(HttpChatClient::from_settings(&cfg.llm)?))
}

pub type ClassifierPair = (Box<dyn TextClassifier>, Box<dyn TextClassifier>);

pub fn classifiers(args: &ServiceArgs, cfg: &PipelineConfig) -> Result<ClassifierPair> {
    if args.mock {
        return Ok((Box::new(LexiconMock::emotion()), Box::new(LexiconMock::sentiment())));
    }
    let (e, s) = HttpTextClassifier::pair_from_settings(&cfg.classifier)
        .map_err(|e| anyhow!("classifier configuration: {e} (set classifier.emotion_endpoint and classifier.sentiment_endpoint, or use --mock)"))?;
    Ok((Box::new(e), Box::new(s)))
}
