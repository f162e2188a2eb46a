//! Inverted index over a question bank with Okapi BM25 scoring.
//!
//! ```text
//! score(q, d) = sum over distinct t in q of
//!     idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
//! idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
//! ```
//!
//! Documents are stored in ascending `doc_id` order, so posting lists sorted
//! by internal ordinal are also sorted by `doc_id`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankDocument {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub conversation_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuestionBank {
    pub documents: Vec<BankDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),
    #[error("unknown doc_id `{0}`")]
    UnknownDocId(String),
    #[error("inconsistent index: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEntry {
    pub doc_id: String,
    pub text: String,
    pub conversation_id: String,
    pub length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    params: Bm25Params,
    docs: Vec<DocEntry>,
    postings: BTreeMap<String, Vec<Posting>>,
    avg_doc_length: f64,
}

impl InvertedIndex {
    pub fn build(bank: &QuestionBank, params: Bm25Params) -> Result<Self, IndexError> {
        let mut order: Vec<&BankDocument> = bank.documents.iter().collect();
        order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        if let Some(w) = order.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
            return Err(IndexError::DuplicateDocId(w[0].doc_id.clone()));
        }
        let mut docs = Vec::with_capacity(order.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (ord, d) in order.into_iter().enumerate() {
            let tokens = text::token_strings(&d.text);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting { doc: ord as u32, tf: count });
            }
            docs.push(DocEntry {
                doc_id: d.doc_id.clone(),
                text: d.text.clone(),
                conversation_id: d.conversation_id.clone(),
                length: tokens.len() as u32,
            });
        }
        Ok(Self::assemble(params, docs, postings))
    }

    fn assemble(params: Bm25Params, docs: Vec<DocEntry>, postings: BTreeMap<String, Vec<Posting>>) -> Self {
        let avg_doc_length = if docs.is_empty() {
            0.0
        } else {
            docs.iter().map(|d| f64::from(d.length)).sum::<f64>() / docs.len() as f64
        };
        InvertedIndex { params, docs, postings, avg_doc_length }
    }

    /// Rebuilds an index from persisted parts, checking its invariants.
    pub fn from_parts(
        params: Bm25Params,
        docs: Vec<DocEntry>,
        postings: BTreeMap<String, Vec<Posting>>,
    ) -> Result<Self, IndexError> {
        if let Some(w) = docs.windows(2).find(|w| w[0].doc_id >= w[1].doc_id) {
            return Err(IndexError::Inconsistent(alloc::format!("docs out of order at `{}`", w[1].doc_id)));
        }
        let mut lengths = alloc::vec![0u64; docs.len()];
        for (term, list) in &postings {
            if list.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return Err(IndexError::Inconsistent(alloc::format!("postings for `{term}` not sorted")));
            }
            for p in list {
                let slot = lengths
                    .get_mut(p.doc as usize)
                    .ok_or_else(|| IndexError::Inconsistent(alloc::format!("posting to missing doc {}", p.doc)))?;
                *slot += u64::from(p.tf);
            }
        }
        for (d, &sum) in docs.iter().zip(&lengths) {
            if sum != u64::from(d.length) {
                return Err(IndexError::Inconsistent(alloc::format!(
                    "doc `{}` has length {} but postings sum to {sum}",
                    d.doc_id, d.length
                )));
            }
        }
        Ok(Self::assemble(params, docs, postings))
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }

    pub fn doc(&self, doc_id: &str) -> Option<&DocEntry> {
        self.ordinal(doc_id).map(|i| &self.docs[i])
    }

    fn ordinal(&self, doc_id: &str) -> Option<usize> {
        self.docs.binary_search_by(|d| d.doc_id.as_str().cmp(doc_id)).ok()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_frequency(&self, term: &str, doc_id: &str) -> u32 {
        let Some(ord) = self.ordinal(doc_id) else { return 0 };
        self.tf_at(term, ord as u32)
    }

    fn tf_at(&self, term: &str, ord: u32) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| list.binary_search_by(|p| p.doc.cmp(&ord)).ok().map(|i| list[i].tf))
            .unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.document_frequency(term) as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    fn term_weight(&self, idf: f64, tf: u32, doc_len: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let ratio = if self.avg_doc_length > 0.0 { f64::from(doc_len) / self.avg_doc_length } else { 0.0 };
        idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * ratio))
    }

    /// BM25 score of one document for a free-text query.
    pub fn bm25_score(&self, query: &str, doc_id: &str) -> Result<f64, IndexError> {
        let ord = self.ordinal(doc_id).ok_or_else(|| IndexError::UnknownDocId(doc_id.into()))?;
        let len = self.docs[ord].length;
        Ok(query_terms(query)
            .iter()
            .map(|t| {
                let tf = self.tf_at(t, ord as u32);
                if tf == 0 {
                    0.0
                } else {
                    self.term_weight(self.idf(t), tf, len)
                }
            })
            .sum())
    }

    /// Top `k` documents by score, ties by ascending `doc_id`; zero-score
    /// documents are never returned.
    pub fn search(&self, query: &str, k: usize) -> Vec<(String, f64)> {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for t in query_terms(query) {
            let Some(list) = self.postings.get(&t) else { continue };
            let idf = self.idf(&t);
            for p in list {
                *acc.entry(p.doc).or_default() += self.term_weight(idf, p.tf, self.docs[p.doc as usize].length);
            }
        }
        let mut hits: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, s)| s > 0.0).collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.truncate(k);
        hits.into_iter().map(|(ord, s)| (self.docs[ord as usize].doc_id.clone(), s)).collect()
    }
}

/// Distinct query terms in first-occurrence order.
pub fn query_terms(query: &str) -> Vec<String> {
    let mut seen = alloc::collections::BTreeSet::new();
    text::token_strings(query).into_iter().filter(|t| seen.insert(t.clone())).collect()
}
