//! Source conversations and the per-turn samples built from them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// One question/answer exchange of a source conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    #[serde(rename = "question")]
    pub question_original: String,
    /// Context-independent rewrite of the question.
    #[serde(rename = "rewritten_question")]
    pub question_rewritten: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub unanswered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub conversation_id: String,
    pub topic: String,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("turn {turn}: field `{field}` is empty")]
    EmptyField { turn: usize, field: &'static str },
    #[error("field `conversation_id` is empty")]
    EmptyId,
}

impl Conversation {
    /// Checks the per-turn invariants: a non-empty rewrite and an answer unless
    /// the turn is flagged unanswered.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.conversation_id.trim().is_empty() {
            return Err(CorpusError::EmptyId);
        }
        for (i, turn) in self.turns.iter().enumerate() {
            if turn.question_rewritten.trim().is_empty() {
                return Err(CorpusError::EmptyField { turn: i + 1, field: "rewritten_question" });
            }
            if turn.answer.trim().is_empty() && !turn.unanswered {
                return Err(CorpusError::EmptyField { turn: i + 1, field: "answer" });
            }
        }
        Ok(())
    }

    /// Expands the conversation into `T - 1` sample skeletons. The skeleton for
    /// turn `L` holds turns `1..L` as context and turn `L + 1` as the valid
    /// follow-up. Conversations shorter than two turns yield nothing.
    pub fn skeletons(&self) -> Vec<SampleSkeleton> {
        let t = self.turns.len();
        if t < 2 {
            log::warn!("conversation {} has {} turn(s); no samples", self.conversation_id, t);
            return Vec::new();
        }
        (1..t)
            .map(|l| {
                let history = self.turns[..l - 1]
                    .iter()
                    .map(|turn| QaPair { q: turn.question_rewritten.clone(), a: turn.answer.clone() })
                    .collect();
                let current = &self.turns[l - 1];
                SampleSkeleton {
                    sample_id: sample_id(&self.conversation_id, l),
                    conversation_id: self.conversation_id.clone(),
                    turn: l,
                    context: DialogContext {
                        history,
                        current_q: current.question_rewritten.clone(),
                        current_a: current.answer.clone(),
                    },
                    valid_text: self.turns[l].question_rewritten.clone(),
                }
            })
            .collect()
    }
}

pub fn sample_id(conversation_id: &str, turn: usize) -> String {
    format!("{conversation_id}#{turn}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub q: String,
    pub a: String,
}

/// History turns plus the current turn. Questions are always the rewritten form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogContext {
    pub history: Vec<QaPair>,
    pub current_q: String,
    pub current_a: String,
}

impl DialogContext {
    /// Context length `L`: history turns plus the current one.
    pub fn len(&self) -> usize {
        self.history.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// History questions in order, then the current question.
    pub fn questions(&self) -> impl Iterator<Item = &str> {
        self.history.iter().map(|p| p.q.as_str()).chain(core::iter::once(self.current_q.as_str()))
    }

    pub fn answers(&self) -> impl Iterator<Item = &str> {
        self.history.iter().map(|p| p.a.as_str()).chain(core::iter::once(self.current_a.as_str()))
    }
}

/// A dialog context and its valid follow-up, before confounders are added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSkeleton {
    pub sample_id: String,
    pub conversation_id: String,
    /// 1-based index of the current turn.
    pub turn: usize,
    pub context: DialogContext,
    pub valid_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Valid,
    Paraphrase,
    IrrelevantEntity,
    PartialEntity,
    IrrelevantContext,
    AsrError,
    RandomQuestion,
    HistoryDuplicate,
}

impl Label {
    pub const ALL: [Label; 8] = [
        Label::Valid,
        Label::Paraphrase,
        Label::IrrelevantEntity,
        Label::PartialEntity,
        Label::IrrelevantContext,
        Label::AsrError,
        Label::RandomQuestion,
        Label::HistoryDuplicate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Valid => "valid",
            Label::Paraphrase => "paraphrase",
            Label::IrrelevantEntity => "irrelevant_entity",
            Label::PartialEntity => "partial_entity",
            Label::IrrelevantContext => "irrelevant_context",
            Label::AsrError => "asr_error",
            Label::RandomQuestion => "random_question",
            Label::HistoryDuplicate => "history_duplicate",
        }
    }

    pub fn is_confounder(self) -> bool {
        self != Label::Valid
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown label `{s}`"))
    }
}

/// Where a generated confounder came from, for audits and diff checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    /// The question the candidate was derived from.
    pub source_question: String,
    /// Token range of the source question that was rewritten.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_conversation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub candidate_id: String,
    pub text: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub conversation_id: String,
    pub context: DialogContext,
    pub candidates: Vec<Candidate>,
    pub seed: u64,
    /// `permutation[i]` is the generation-order index of the candidate shown at position `i`.
    pub permutation: Vec<usize>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub no_confounders: bool,
}

impl Sample {
    pub fn valid(&self) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.label == Label::Valid)
    }

    pub fn valid_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.label == Label::Valid).count()
    }
}
