use followup_core::index::{BankDocument, Bm25Params, InvertedIndex, QuestionBank};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn bank(docs: &[(&str, &str)]) -> QuestionBank {
    QuestionBank {
        documents: docs
            .iter()
            .map(|(id, t)| BankDocument { doc_id: id.to_string(), text: t.to_string(), conversation_id: String::new() })
            .collect(),
    }
}

fn toy() -> InvertedIndex {
    InvertedIndex::build(
        &bank(&[("d1", "the cat sat on the mat"), ("d2", "the dog sat"), ("d3", "cats and dogs")]),
        Bm25Params::default(),
    )
    .unwrap()
}

// Term-by-term with literal counts: N = 3, avgdl = 12 / 3 = 4.
fn idf(df: f64) -> f64 {
    (1.0 + (3.0 - df + 0.5) / (df + 0.5)).ln()
}

fn term(tf: f64, df: f64, dl: f64) -> f64 {
    let (k1, b, avgdl) = (1.2, 0.75, 4.0);
    idf(df) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
}

#[test]
fn toy_corpus_matches_hand_evaluation() {
    let idx = toy();
    let q = "the cat sat";
    // d1: the tf=2 df=2, cat tf=1 df=1, sat tf=1 df=2, length 6
    let d1 = term(2.0, 2.0, 6.0) + term(1.0, 1.0, 6.0) + term(1.0, 2.0, 6.0);
    // d2: the tf=1 df=2, sat tf=1 df=2, length 3
    let d2 = term(1.0, 2.0, 3.0) + term(1.0, 2.0, 3.0);
    assert!((idx.bm25_score(q, "d1").unwrap() - d1).abs() < 1e-9);
    assert!((idx.bm25_score(q, "d2").unwrap() - d2).abs() < 1e-9);
    assert_eq!(idx.bm25_score(q, "d3").unwrap(), 0.0);
    // repeated query terms count once
    assert!((idx.bm25_score("cat cat the the", "d1").unwrap() - (term(2.0, 2.0, 6.0) + term(1.0, 1.0, 6.0))).abs() < 1e-9);
    let hits = idx.search(q, 10);
    assert_eq!(hits.iter().map(|(d, _)| d.as_str()).collect::<Vec<_>>(), vec!["d1", "d2"]);
}

#[test]
fn unknown_doc_is_an_error() {
    assert!(toy().bm25_score("cat", "d9").is_err());
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"]).prop_map(String::from)
}

fn docs() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec(word(), 1..8), 1..12)
}

proptest! {
    #[test]
    fn postings_hold_exactly_the_documents_containing_each_term(docs in docs()) {
        let texts: Vec<(String, String)> = docs.iter().enumerate().map(|(i, d)| (format!("d{i:02}"), d.join(" "))).collect();
        let refs: Vec<(&str, &str)> = texts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let idx = InvertedIndex::build(&bank(&refs), Bm25Params::default()).unwrap();
        let mut expected: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (id, d) in texts.iter().zip(&docs).map(|((id, _), d)| (id, d)) {
            for w in d {
                *expected.entry(w.clone()).or_default().entry(id.clone()).or_default() += 1;
            }
        }
        prop_assert_eq!(idx.postings().len(), expected.len());
        for (term, per_doc) in &expected {
            prop_assert_eq!(idx.document_frequency(term), per_doc.len());
            for (id, tf) in per_doc {
                prop_assert_eq!(idx.term_frequency(term, id), *tf);
            }
        }
        for (id, _) in &texts {
            for term in expected.keys() {
                if !expected[term].contains_key(id) {
                    prop_assert_eq!(idx.term_frequency(term, id), 0);
                }
            }
        }
    }

    #[test]
    fn adding_a_document_leaves_other_term_frequencies_alone(docs in docs(), extra in prop::collection::vec(word(), 1..6)) {
        let texts: Vec<(String, String)> = docs.iter().enumerate().map(|(i, d)| (format!("d{i:02}"), d.join(" "))).collect();
        let refs: Vec<(&str, &str)> = texts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let before = InvertedIndex::build(&bank(&refs), Bm25Params::default()).unwrap();
        let extra = extra.join(" ");
        let mut more = refs.clone();
        more.push(("zz", extra.as_str()));
        let after = InvertedIndex::build(&bank(&more), Bm25Params::default()).unwrap();
        for (id, _) in &texts {
            for term in before.postings().keys() {
                prop_assert_eq!(before.term_frequency(term, id), after.term_frequency(term, id));
            }
        }
    }

    #[test]
    fn scores_are_nonnegative_and_order_independent(docs in docs(), q in prop::collection::vec(word(), 1..4)) {
        let texts: Vec<(String, String)> = docs.iter().enumerate().map(|(i, d)| (format!("d{i:02}"), d.join(" "))).collect();
        let refs: Vec<(&str, &str)> = texts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let a = InvertedIndex::build(&bank(&refs), Bm25Params::default()).unwrap();
        let rev: Vec<(&str, &str)> = refs.iter().rev().copied().collect();
        let b = InvertedIndex::build(&bank(&rev), Bm25Params::default()).unwrap();
        let q = q.join(" ");
        for (id, _) in &texts {
            let s = a.bm25_score(&q, id).unwrap();
            prop_assert!(s >= 0.0);
            prop_assert_eq!(s, b.bm25_score(&q, id).unwrap());
        }
    }
}
