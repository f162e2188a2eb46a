//! Readers and writers for the resource files around the core types.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use followup_core::embeddings::{SentenceVectors, VectorStore};
use followup_core::index::{BankDocument, Bm25Params, DocEntry, InvertedIndex, Posting, QuestionBank};
use followup_core::phonetics::PhoneticLexicon;
use followup_core::{Conversation, EntityCatalog, NameLexicon};
use followup_core::confounders::ImportedParaphrases;
use serde::{Deserialize, Serialize};

use crate::jsonl::{self, FormatError, LineError};

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError::io(path, e))
}

/// Conversation records, in file order. Schema and validation failures are
/// reported per line; an empty file gives an empty corpus.
pub fn load_corpus(path: &Path) -> Result<Vec<Conversation>, FormatError> {
    let file = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let (items, mut errors) =
        jsonl::parse_numbered::<Conversation>(BufReader::new(file)).map_err(|e| FormatError::io(path, e))?;
    let mut out = Vec::with_capacity(items.len());
    let mut ids = BTreeMap::new();
    for (line, conv) in items {
        if let Err(e) = conv.validate() {
            errors.push(LineError { line, message: e.to_string() });
        } else if let Some(first) = ids.insert(conv.conversation_id.clone(), line) {
            errors.push(LineError { line, message: format!("conversation_id `{}` already used on line {first}", conv.conversation_id) });
        } else {
            out.push(conv);
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(FormatError::Lines { path: path.to_path_buf(), errors })
    }
}

/// Tab-separated `surface<TAB>type` catalog. Rejected lines are logged and skipped.
pub fn load_catalog(path: &Path) -> Result<EntityCatalog, FormatError> {
    let (catalog, rejected) = EntityCatalog::parse(&read_text(path)?);
    for r in &rejected {
        log::warn!("{}:{}: {}; line skipped", path.display(), r.line, r.error);
    }
    Ok(catalog)
}

pub fn load_names(first: &Path, last: &Path) -> Result<NameLexicon, FormatError> {
    Ok(NameLexicon::from_lists(&read_text(first)?, &read_text(last)?))
}

/// One word per line.
pub fn load_lexicon(path: &Path) -> Result<PhoneticLexicon, FormatError> {
    let text = read_text(path)?;
    Ok(PhoneticLexicon::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))))
}

/// Text word vectors, `token v1 ... vD` per line. An optional leading
/// `count dim` header is honoured. Lines with the wrong number of values are
/// skipped with a warning; a file with no usable line is an error.
pub fn load_word_vectors(path: &Path, dim: usize) -> Result<VectorStore, FormatError> {
    let file = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut store = VectorStore::new(dim);
    let mut rejected = 0usize;
    let mut values = Vec::with_capacity(dim);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        values.clear();
        let mut bad = false;
        for f in fields {
            match f.parse::<f32>() {
                Ok(v) => values.push(v),
                Err(_) => {
                    bad = true;
                    break;
                }
            }
        }
        if i == 0 && values.len() == 1 && !bad && token.parse::<usize>().is_ok() {
            let declared = values[0] as usize;
            if declared != dim {
                return Err(FormatError::invalid(path, format!("header declares dimension {declared}, expected {dim}")));
            }
            continue;
        }
        if bad || values.len() != dim {
            rejected += 1;
            if rejected <= 10 {
                log::warn!("{}:{}: expected {dim} values, line skipped", path.display(), i + 1);
            }
            continue;
        }
        let token: String = token.chars().flat_map(char::to_lowercase).collect();
        store.insert(&token, &values).map_err(|e| FormatError::invalid(path, e.to_string()))?;
    }
    if rejected > 10 {
        log::warn!("{}: {rejected} lines skipped in total", path.display());
    }
    if store.is_empty() {
        return Err(FormatError::invalid(path, format!("no vector of dimension {dim}")));
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceVectorRecord {
    pub text: String,
    pub values: Vec<f64>,
}

pub fn load_sentence_vectors(path: &Path) -> Result<SentenceVectors, FormatError> {
    let mut out = SentenceVectors::new();
    for (line, r) in jsonl::read_numbered::<SentenceVectorRecord>(path)? {
        out.insert(&r.text, r.values)
            .map_err(|e| FormatError::Lines { path: path.to_path_buf(), errors: vec![LineError { line, message: e.to_string() }] })?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseRecord {
    pub question: String,
    pub paraphrase: String,
}

pub fn load_paraphrases(path: &Path) -> Result<ImportedParaphrases, FormatError> {
    let mut out = ImportedParaphrases::new();
    for r in jsonl::read::<ParaphraseRecord>(path)? {
        out.insert(&r.question, &r.paraphrase);
    }
    Ok(out)
}

pub fn load_question_bank(path: &Path) -> Result<QuestionBank, FormatError> {
    Ok(QuestionBank { documents: jsonl::read::<BankDocument>(path)? })
}

/// Question bank made of every rewritten question of a corpus, ids
/// `<conversation_id>#<turn>` with 1-based turns.
pub fn bank_from_corpus(conversations: &[Conversation]) -> QuestionBank {
    QuestionBank {
        documents: conversations
            .iter()
            .flat_map(|c| {
                c.turns.iter().enumerate().map(move |(i, t)| BankDocument {
                    doc_id: followup_core::corpus::sample_id(&c.conversation_id, i + 1),
                    text: t.question_rewritten.clone(),
                    conversation_id: c.conversation_id.clone(),
                })
            })
            .collect(),
    }
}

pub const INDEX_FORMAT: &str = "followup-bm25";
pub const INDEX_VERSION: u32 = 1;

/// Persisted index, one JSON record per line: a header, then one line per
/// document in index order, then one line per term in term order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum IndexLine {
    Header { format: String, version: u32, k1: f64, b: f64, docs: usize, terms: usize },
    Doc(DocEntry),
    Term { term: String, postings: Vec<(u32, u32)> },
}

pub fn save_index(path: &Path, index: &InvertedIndex) -> Result<(), FormatError> {
    jsonl::write_with(path, |w| {
        let mut put = |line: &IndexLine| -> std::io::Result<()> {
            serde_json::to_writer(&mut *w, line).map_err(std::io::Error::other)?;
            w.write_all(b"\n")
        };
        let p = index.params();
        put(&IndexLine::Header {
            format: INDEX_FORMAT.into(),
            version: INDEX_VERSION,
            k1: p.k1,
            b: p.b,
            docs: index.doc_count(),
            terms: index.postings().len(),
        })?;
        for d in index.docs() {
            put(&IndexLine::Doc(d.clone()))?;
        }
        for (term, list) in index.postings() {
            put(&IndexLine::Term { term: term.clone(), postings: list.iter().map(|p| (p.doc, p.tf)).collect() })?;
        }
        Ok(())
    })
}

pub fn load_index(path: &Path) -> Result<InvertedIndex, FormatError> {
    let lines = jsonl::read::<IndexLine>(path)?;
    let mut it = lines.into_iter();
    let Some(IndexLine::Header { format, version, k1, b, docs: n_docs, terms: n_terms }) = it.next() else {
        return Err(FormatError::invalid(path, "missing index header"));
    };
    if format != INDEX_FORMAT || version != INDEX_VERSION {
        return Err(FormatError::invalid(path, format!("unsupported index {format} v{version}")));
    }
    let mut docs = Vec::with_capacity(n_docs);
    let mut postings = BTreeMap::new();
    for line in it {
        match line {
            IndexLine::Doc(d) => docs.push(d),
            IndexLine::Term { term, postings: list } => {
                postings.insert(term, list.into_iter().map(|(doc, tf)| Posting { doc, tf }).collect());
            }
            IndexLine::Header { .. } => return Err(FormatError::invalid(path, "second header")),
        }
    }
    if docs.len() != n_docs || postings.len() != n_terms {
        return Err(FormatError::invalid(path, "truncated index"));
    }
    InvertedIndex::from_parts(Bm25Params { k1, b }, docs, postings).map_err(|e| FormatError::invalid(path, e.to_string()))
}
