//! Candidate scoring and deterministic ranking.
//!
//! A [`Scorer`] assigns every candidate of a sample a relevance score (higher
//! is better) or `None` when it cannot score it. [`rank`] orders candidates by
//! descending score, breaks ties by ascending `candidate_id`, and puts
//! unscored candidates last so the valid one always keeps a rank.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Candidate, DialogContext, Label, Sample};
use crate::embeddings::{self, SentenceVectors, VectorStore};
use crate::index::{BankDocument, Bm25Params, InvertedIndex, QuestionBank};
use crate::text;

/// Default cap on answer tokens fed to scorers.
pub const DEFAULT_MAX_ANSWER_TOKENS: usize = 64;

/// Space-joined `q1 a1 ... qL aL`, answers truncated to `max_answer_tokens`.
pub fn context_text(ctx: &DialogContext, max_answer_tokens: usize) -> String {
    let mut parts: Vec<&str> = Vec::with_capacity(2 * ctx.len());
    for (q, a) in ctx.questions().zip(ctx.answers()) {
        parts.push(q.trim());
        let a = text::truncate_tokens(a.trim(), max_answer_tokens);
        if !a.is_empty() {
            parts.push(a);
        }
    }
    parts.join(" ")
}

/// Lexical query: the current question followed by the history questions.
pub fn lexical_query(ctx: &DialogContext) -> String {
    let mut parts = alloc::vec![ctx.current_q.as_str()];
    parts.extend(ctx.history.iter().map(|p| p.q.as_str()));
    parts.join(" ")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("no score for {} candidate(s): {}", .0.len(), fmt_keys(.0))]
    Missing(Vec<(String, String)>),
    #[error("score {score} for {sample_id}/{candidate_id} is outside [0, 1]")]
    OutOfRange { sample_id: String, candidate_id: String, score: f64 },
    #[error("scorer returned {got} scores for {expected} candidates")]
    Arity { expected: usize, got: usize },
    #[error("sample {0} has no valid candidate")]
    NoValid(String),
    #[error(transparent)]
    Embedding(#[from] embeddings::EmbeddingError),
}

fn fmt_keys(keys: &[(String, String)]) -> String {
    let mut s: Vec<String> = keys.iter().take(10).map(|(a, b)| format!("{a}/{b}")).collect();
    if keys.len() > 10 {
        s.push(format!("... {} more", keys.len() - 10));
    }
    s.join(", ")
}

pub trait Scorer {
    fn name(&self) -> &str;

    /// Scores aligned with `sample.candidates`; `None` marks a candidate the
    /// scorer had to skip.
    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        (**self).score_sample(sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub candidate_id: String,
    pub label: Label,
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub unscored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub sample_id: String,
    pub ranked: Vec<RankedEntry>,
    /// 1-based position of the valid candidate.
    pub rank_of_valid: usize,
}

impl RankedList {
    /// Recomputes the valid candidate's position from `ranked`.
    pub fn valid_position(&self) -> Option<usize> {
        self.ranked.iter().position(|e| e.label == Label::Valid).map(|p| p + 1)
    }
}

pub fn rank(sample: &Sample, scorer: &(impl Scorer + ?Sized)) -> Result<RankedList, ScoreError> {
    let scores = scorer.score_sample(sample)?;
    rank_with_scores(sample, &scores)
}

/// Orders a sample's candidates by precomputed scores.
pub fn rank_with_scores(sample: &Sample, scores: &[Option<f64>]) -> Result<RankedList, ScoreError> {
    if scores.len() != sample.candidates.len() {
        return Err(ScoreError::Arity { expected: sample.candidates.len(), got: scores.len() });
    }
    let mut ranked: Vec<RankedEntry> = sample
        .candidates
        .iter()
        .zip(scores)
        .map(|(c, s)| {
            let score = s.filter(|x| !x.is_nan());
            RankedEntry { candidate_id: c.candidate_id.clone(), label: c.label, score, unscored: score.is_none() }
        })
        .collect();
    ranked.sort_by(|a, b| match (a.score, b.score) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.candidate_id.cmp(&b.candidate_id)),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => a.candidate_id.cmp(&b.candidate_id),
    });
    let rank_of_valid = ranked
        .iter()
        .position(|e| e.label == Label::Valid)
        .map(|p| p + 1)
        .ok_or_else(|| ScoreError::NoValid(sample.sample_id.clone()))?;
    Ok(RankedList { sample_id: sample.sample_id.clone(), ranked, rank_of_valid })
}

/// Cosine between the mean word vector of the context and of each candidate.
pub struct CosineScorer<'a> {
    pub store: &'a VectorStore,
    pub max_answer_tokens: usize,
}

impl<'a> CosineScorer<'a> {
    pub fn new(store: &'a VectorStore) -> Self {
        CosineScorer { store, max_answer_tokens: DEFAULT_MAX_ANSWER_TOKENS }
    }
}

impl Scorer for CosineScorer<'_> {
    fn name(&self) -> &str {
        "cosine"
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        let ctx = embeddings::embed_mean(&context_text(&sample.context, self.max_answer_tokens), self.store);
        sample
            .candidates
            .iter()
            .map(|c| {
                let cand = embeddings::embed_mean(&c.text, self.store);
                Ok(Some(embeddings::cosine(&ctx.vector, &cand.vector)?))
            })
            .collect()
    }
}

/// Cosine over imported sentence vectors. Texts without a vector are skipped.
pub struct SentenceScorer<'a> {
    pub vectors: &'a SentenceVectors,
    pub max_answer_tokens: usize,
}

impl<'a> SentenceScorer<'a> {
    pub fn new(vectors: &'a SentenceVectors) -> Self {
        SentenceScorer { vectors, max_answer_tokens: DEFAULT_MAX_ANSWER_TOKENS }
    }
}

impl Scorer for SentenceScorer<'_> {
    fn name(&self) -> &str {
        "sentence-import"
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        let key = context_text(&sample.context, self.max_answer_tokens);
        let Some(ctx) = self.vectors.get(&key) else {
            log::warn!("{}: no sentence vector for the context", sample.sample_id);
            return Ok(alloc::vec![None; sample.candidates.len()]);
        };
        sample
            .candidates
            .iter()
            .map(|c| match self.vectors.get(&c.text) {
                Some(v) => Ok(Some(embeddings::cosine(ctx, v)?)),
                None => {
                    log::warn!("{}/{}: no sentence vector", sample.sample_id, c.candidate_id);
                    Ok(None)
                }
            })
            .collect()
    }
}

/// BM25 of each candidate against the dialog questions, over a micro-index of
/// the sample's own candidates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bm25Scorer {
    pub params: Bm25Params,
}

impl Scorer for Bm25Scorer {
    fn name(&self) -> &str {
        "bm25"
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        let bank = QuestionBank {
            documents: sample
                .candidates
                .iter()
                .map(|c| BankDocument {
                    doc_id: c.candidate_id.clone(),
                    text: c.text.clone(),
                    conversation_id: sample.conversation_id.clone(),
                })
                .collect(),
        };
        let Ok(index) = InvertedIndex::build(&bank, self.params) else {
            // candidate ids are unique within a sample
            unreachable!("duplicate candidate id in {}", sample.sample_id);
        };
        let query = lexical_query(&sample.context);
        Ok(sample.candidates.iter().map(|c| index.bm25_score(&query, &c.candidate_id).ok()).collect())
    }
}

/// One externally produced score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub candidate_id: String,
    pub score: f64,
}

/// Lookup-only scorer over a score file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalScorer {
    scores: BTreeMap<(String, String), f64>,
}

impl ExternalScorer {
    /// Every score must lie in `[0, 1]`. Later duplicates overwrite earlier ones.
    pub fn new(records: impl IntoIterator<Item = ScoreRecord>) -> Result<Self, ScoreError> {
        let mut scores = BTreeMap::new();
        for r in records {
            if !(0.0..=1.0).contains(&r.score) {
                return Err(ScoreError::OutOfRange { sample_id: r.sample_id, candidate_id: r.candidate_id, score: r.score });
            }
            scores.insert((r.sample_id, r.candidate_id), r.score);
        }
        Ok(ExternalScorer { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn get(&self, sample: &Sample, c: &Candidate) -> Option<f64> {
        // BTreeMap<(String, String)> cannot be probed with borrowed pairs
        self.scores.get(&(sample.sample_id.clone(), c.candidate_id.clone())).copied()
    }

    /// Every `(sample_id, candidate_id)` of `samples` that has no score.
    pub fn missing<'s>(&self, samples: impl IntoIterator<Item = &'s Sample>) -> Vec<(String, String)> {
        samples
            .into_iter()
            .flat_map(|s| s.candidates.iter().map(move |c| (s, c)))
            .filter(|(s, c)| self.get(s, c).is_none())
            .map(|(s, c)| (s.sample_id.clone(), c.candidate_id.clone()))
            .collect()
    }

    pub fn check_coverage<'s>(&self, samples: impl IntoIterator<Item = &'s Sample>) -> Result<(), ScoreError> {
        let missing = self.missing(samples);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(ScoreError::Missing(missing))
        }
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        "external"
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        let scores: Vec<Option<f64>> = sample.candidates.iter().map(|c| self.get(sample, c)).collect();
        if scores.iter().any(Option::is_none) {
            return Err(ScoreError::Missing(self.missing(core::iter::once(sample))));
        }
        Ok(scores)
    }
}

/// Scorer from a closure over `(sample, candidate)`.
pub struct FnScorer<F> {
    name: String,
    f: F,
}

impl<F> FnScorer<F>
where
    F: Fn(&Sample, &Candidate) -> Option<f64>,
{
    pub fn new(name: &str, f: F) -> Self {
        FnScorer { name: name.into(), f }
    }
}

impl<F> Scorer for FnScorer<F>
where
    F: Fn(&Sample, &Candidate) -> Option<f64>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn score_sample(&self, sample: &Sample) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(sample.candidates.iter().map(|c| (self.f)(sample, c)).collect())
    }
}
