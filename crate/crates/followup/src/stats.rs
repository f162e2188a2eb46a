//! Dataset accounting laid out like the usual dataset-statistics table: one
//! row per confounder type with its total and per-dialog average.
//!
//! A "dialog" row counts samples and "turns" counts context turns summed over
//! samples, so per-dialog averages are per sample.

use std::collections::BTreeMap;
use std::fmt::Write;

use followup_core::{text, Label, Sample};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub samples: usize,
    pub conversations: usize,
    pub turns: usize,
    pub turns_per_dialog: f64,
    pub tokens_per_utterance: f64,
    pub tokens_per_response: f64,
    pub confounders: BTreeMap<Label, usize>,
    pub total_confounders: usize,
    pub samples_without_confounders: usize,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 { 0.0 } else { n as f64 / d as f64 }
}

impl DatasetStats {
    pub fn from_samples(samples: &[Sample]) -> Self {
        let mut conversations: Vec<&str> = samples.iter().map(|s| s.conversation_id.as_str()).collect();
        conversations.sort_unstable();
        conversations.dedup();
        let (mut turns, mut q_tokens, mut a_tokens) = (0, 0, 0);
        let mut confounders: BTreeMap<Label, usize> = BTreeMap::new();
        for s in samples {
            turns += s.context.len();
            q_tokens += s.context.questions().map(|q| text::tokenize(q).len()).sum::<usize>();
            a_tokens += s.context.answers().map(|a| text::tokenize(a).len()).sum::<usize>();
            for c in s.candidates.iter().filter(|c| c.label.is_confounder()) {
                *confounders.entry(c.label).or_default() += 1;
            }
        }
        let total_confounders = confounders.values().sum();
        DatasetStats {
            samples: samples.len(),
            conversations: conversations.len(),
            turns,
            turns_per_dialog: ratio(turns, samples.len()),
            tokens_per_utterance: ratio(q_tokens, turns),
            tokens_per_response: ratio(a_tokens, turns),
            confounders,
            total_confounders,
            samples_without_confounders: samples.iter().filter(|s| s.no_confounders).count(),
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.confounders.get(&label).copied().unwrap_or(0)
    }

    /// Plain-text table. With `fold_partial`, partial-entity candidates are
    /// counted under the irrelevant-entity row.
    pub fn render(&self, fold_partial: bool) -> String {
        let mut rows: Vec<(&str, usize)> = vec![
            ("Paraphrase", self.count(Label::Paraphrase)),
            (
                "Irrelevant entity",
                self.count(Label::IrrelevantEntity) + if fold_partial { self.count(Label::PartialEntity) } else { 0 },
            ),
        ];
        if !fold_partial {
            rows.push(("Partial entity", self.count(Label::PartialEntity)));
        }
        rows.extend([
            ("Irrelevant context", self.count(Label::IrrelevantContext)),
            ("ASR Error", self.count(Label::AsrError)),
            ("Random utterance", self.count(Label::RandomQuestion)),
            ("Duplication of dialog history", self.count(Label::HistoryDuplicate)),
        ]);

        let mut out = String::new();
        let w = 32;
        let _ = writeln!(out, "{:<w$}{:>12}", "Dialog", self.samples);
        let _ = writeln!(out, "{:<w$}{:>12}", "Turns", self.turns);
        let _ = writeln!(out, "{:<w$}{:>12.2}", "Turns per dialog", self.turns_per_dialog);
        let _ = writeln!(out, "{:<w$}{:>12.2}", "Tokens per utterance", self.tokens_per_utterance);
        let _ = writeln!(out, "{:<w$}{:>12.2}", "Tokens per response", self.tokens_per_response);
        let _ = writeln!(out, "Confounders");
        for (name, n) in rows.into_iter().chain([("Total", self.total_confounders)]) {
            let _ = writeln!(out, "{:<w$}{:>12}", name, n);
            let _ = writeln!(out, "{:<w$}{:>12.2}", "- per dialog", ratio(n, self.samples));
        }
        let _ = writeln!(out, "{:<w$}{:>12}", "Source conversations", self.conversations);
        let _ = writeln!(out, "{:<w$}{:>12}", "Samples without confounders", self.samples_without_confounders);
        out
    }
}
