//! Run configuration read from a TOML file; every field has a default.

use std::path::Path;

use followup_core::confounders::GeneratorConfig;
use followup_core::eval::{DEFAULT_THETA_HIGH, DEFAULT_THETA_LOW};
use followup_core::ranking::DEFAULT_MAX_ANSWER_TOKENS;
use followup_core::Bm25Params;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generator: GeneratorConfig,
    pub bm25: Bm25Params,
    pub eval: EvalConfig,
    pub max_answer_tokens: usize,
    pub vector_dim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            generator: GeneratorConfig::default(),
            bm25: Bm25Params::default(),
            eval: EvalConfig::default(),
            max_answer_tokens: DEFAULT_MAX_ANSWER_TOKENS,
            vector_dim: followup_core::embeddings::VectorStore::DEFAULT_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub ks: Vec<usize>,
    pub theta_low: f64,
    pub theta_high: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { ks: vec![1, 3], theta_low: DEFAULT_THETA_LOW, theta_high: DEFAULT_THETA_HIGH }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}
