//! Exchange and score files shared with external scorers.

use std::path::Path;

use followup_core::ranking::{ExternalScorer, ScoreRecord, DEFAULT_MAX_ANSWER_TOKENS};
use followup_core::{text, DialogContext, Label, Sample};
use serde::{Deserialize, Serialize};

use crate::jsonl::{self, FormatError};

pub const SEP: &str = "[SEP]";

/// One candidate as seen by an external scorer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub sample_id: String,
    pub candidate_id: String,
    pub joined_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

/// `q1 a1 [SEP] q2 a2 [SEP] ... qL aL [SEP] candidate`, answers truncated to
/// `max_answer_tokens`.
pub fn joined_text(ctx: &DialogContext, candidate: &str, max_answer_tokens: usize) -> String {
    let mut parts: Vec<String> = ctx
        .questions()
        .zip(ctx.answers())
        .map(|(q, a)| {
            let a = text::truncate_tokens(a.trim(), max_answer_tokens);
            if a.is_empty() { q.trim().to_string() } else { format!("{} {a}", q.trim()) }
        })
        .collect();
    parts.push(candidate.trim().to_string());
    parts.join(&format!(" {SEP} "))
}

/// Exchange records for every candidate, in dataset order. `blind` drops labels.
pub fn export(samples: &[Sample], blind: bool) -> Vec<ExchangeRecord> {
    samples
        .iter()
        .flat_map(|s| {
            s.candidates.iter().map(move |c| ExchangeRecord {
                sample_id: s.sample_id.clone(),
                candidate_id: c.candidate_id.clone(),
                joined_text: joined_text(&s.context, &c.text, DEFAULT_MAX_ANSWER_TOKENS),
                label: (!blind).then_some(c.label),
            })
        })
        .collect()
}

/// Loads a score file and checks it covers every candidate of `samples`.
pub fn import_scores(path: &Path, samples: &[Sample]) -> Result<ExternalScorer, FormatError> {
    let records = jsonl::read::<ScoreRecord>(path)?;
    let scorer = ExternalScorer::new(records).map_err(|e| FormatError::invalid(path, e.to_string()))?;
    scorer.check_coverage(samples).map_err(|e| FormatError::invalid(path, e.to_string()))?;
    Ok(scorer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use followup_core::QaPair;

    #[test]
    fn joined_text_layout() {
        let ctx = DialogContext {
            history: vec![QaPair { q: "Where was Kurt Gödel born?".into(), a: "Brunn, Austria-Hungary".into() }],
            current_q: "When was Kurt Gödel born?".into(),
            current_a: "April 28, 1906".into(),
        };
        assert_eq!(
            joined_text(&ctx, "What were Kurt Gödel's interests?", 64),
            "Where was Kurt Gödel born? Brunn, Austria-Hungary [SEP] When was Kurt Gödel born? April 28, 1906 [SEP] What were Kurt Gödel's interests?"
        );
    }
}
