//! One line per acceptance criterion; exits non-zero if any criterion fails.
//!
//! The desk-scale cosine check needs external data and runs only when
//! `FOLLOWUP_VECTORS` (word vectors, text format) and `FOLLOWUP_DATASET`
//! (samples.jsonl) are set. `FOLLOWUP_VECTOR_DIM` defaults to 300.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;

use common::{generate, run_ok, s};
use followup::formats;
use followup_core::confounders::differs_only_in_span;
use followup_core::eval::{hit_ratio, mrr};
use followup_core::index::{BankDocument, Bm25Params, InvertedIndex, QuestionBank};
use followup_core::phonetics::{accept_homophone, phonetic_key, HomophoneSource, LocalHomophones, PhoneticLexicon};
use followup_core::ranking::{rank_with_scores, RankedEntry, RankedList};
use followup_core::text::{fold_key, token_strings};
use followup_core::{Candidate, DialogContext, Label, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const METRIC_TOL: f64 = 1e-12;
const BM25_TOL: f64 = 1e-9;
const MRR_SPOT: f64 = 0.583_333_333_333_333_3;
const DESK_MRR_BAND: (f64, f64) = (0.10, 0.25);
const DETERMINISM_CONVERSATIONS: usize = 50;
const DETERMINISM_SEED: u64 = 42;
const RANDOM_QUESTIONS: usize = 3;
const LEXICON_SIZE: usize = 1000;
const MONOTONE_SAMPLES: usize = 100;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = fn() -> Outcome;

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn read_samples(p: &Path) -> Vec<Sample> {
    fs::read_to_string(p).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

// ---------------------------------------------------------------- metrics

fn ranked_list(id: usize, len: usize, valid_at: usize) -> RankedList {
    let ranked = (0..len)
        .map(|i| RankedEntry {
            candidate_id: format!("c{i:02}"),
            label: if i == valid_at { Label::Valid } else { Label::RandomQuestion },
            score: Some(1.0 - i as f64 / len as f64),
            unscored: false,
        })
        .collect();
    RankedList { sample_id: format!("s{id}"), ranked, rank_of_valid: valid_at + 1 }
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let lists: Vec<RankedList> = (0..1000)
        .map(|i| {
            let len = rng.gen_range(2..=40);
            ranked_list(i, len, rng.gen_range(0..len))
        })
        .collect();
    // brute force straight from the ranked entries, ignoring rank_of_valid
    let pos = |l: &RankedList| l.ranked.iter().position(|e| e.label == Label::Valid).unwrap() + 1;
    let brute_mrr = lists.iter().map(|l| 1.0 / pos(l) as f64).sum::<f64>() / lists.len() as f64;
    let mut worst = (mrr(&lists).unwrap() - brute_mrr).abs();
    for k in [1, 3, 5, 10, 40] {
        let hits = lists.iter().filter(|l| pos(l) <= k).count();
        let brute = 100.0 * hits as f64 / lists.len() as f64;
        worst = worst.max((hit_ratio(&lists, k).unwrap() - brute).abs());
    }
    outcome(ensure(worst < METRIC_TOL, format!("max |delta| {worst:e}")).map(|_| format!("1000 lists, max |delta| {worst:e}")))
}

fn mrr_spot_values() -> Outcome {
    let three = [ranked_list(0, 5, 0), ranked_list(1, 5, 1), ranked_list(2, 5, 3)];
    let ones = [ranked_list(0, 4, 0), ranked_list(1, 7, 0)];
    let a = mrr(&three).unwrap();
    let b = mrr(&ones).unwrap();
    outcome(
        ensure((a - MRR_SPOT).abs() < METRIC_TOL && (b - 1.0).abs() < METRIC_TOL, format!("[1,2,4] -> {a}, all first -> {b}"))
            .map(|_| format!("[1,2,4] -> {a:.5}, all first -> {b}")),
    )
}

fn monotone_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for i in 0..MONOTONE_SAMPLES {
        let n = rng.gen_range(2..=30);
        let valid = rng.gen_range(0..n);
        let candidates: Vec<Candidate> = (0..n)
            .map(|j| Candidate {
                candidate_id: format!("c{j:02}"),
                text: format!("candidate {j}"),
                label: if j == valid { Label::Valid } else { Label::Paraphrase },
                origin: None,
            })
            .collect();
        let sample = Sample {
            sample_id: format!("m#{i}"),
            conversation_id: "m".into(),
            context: DialogContext { history: vec![], current_q: "q".into(), current_a: "a".into() },
            candidates,
            seed: 0,
            permutation: (0..n).collect(),
            no_confounders: false,
        };
        let scores: Vec<Option<f64>> = (0..n).map(|_| Some(rng.gen_range(-2.0..2.0))).collect();
        let mapped: Vec<Option<f64>> = scores.iter().map(|s| s.map(|x| x * x * x + x)).collect();
        let order = |l: RankedList| l.ranked.into_iter().map(|e| e.candidate_id).collect::<Vec<_>>();
        let a = order(rank_with_scores(&sample, &scores).unwrap());
        let b = order(rank_with_scores(&sample, &mapped).unwrap());
        if a != b {
            return Outcome::Fail(format!("sample {i}: {a:?} vs {b:?}"));
        }
    }
    Outcome::Pass(format!("{MONOTONE_SAMPLES} samples, identical orderings"))
}

// ------------------------------------------------------------ generation

const OUTPUTS: [&str; 4] = ["samples.jsonl", "audit.jsonl", "stats.txt", "stats.json"];

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let paths = common::synthetic(d, DETERMINISM_CONVERSATIONS);
    let runs = [("a", 1), ("b", 1), ("c", 8)];
    for (name, workers) in runs {
        generate(&paths, &d.join(name), DETERMINISM_SEED, workers, &[]);
    }
    let r = (|| {
        for f in OUTPUTS {
            let a = fs::read(d.join("a").join(f)).unwrap();
            ensure(!a.is_empty(), format!("{f} is empty"))?;
            ensure(a == fs::read(d.join("b").join(f)).unwrap(), format!("{f} differs between repeated runs"))?;
            ensure(a == fs::read(d.join("c").join(f)).unwrap(), format!("{f} differs between 1 and 8 workers"))?;
        }
        Ok(format!("{DETERMINISM_CONVERSATIONS} conversations, seed {DETERMINISM_SEED}, 2 repeats and 1 vs 8 workers byte-identical"))
    })();
    outcome(r)
}

fn structural() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let paths = common::synthetic(d, DETERMINISM_CONVERSATIONS);
    generate(&paths, &d.join("gen"), DETERMINISM_SEED, 0, &[]);
    let samples = read_samples(&d.join("gen/samples.jsonl"));
    let conversations = formats::load_corpus(&paths.corpus).unwrap();
    let mut pool: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for c in &conversations {
        pool.insert(&c.conversation_id, c.turns.iter().map(|t| fold_key(&t.question_rewritten)).collect());
    }
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    let r = (|| {
        ensure(!samples.is_empty(), "no samples")?;
        for smp in &samples {
            let id = &smp.sample_id;
            ensure(smp.valid_count() == 1, format!("{id}: {} valid candidates", smp.valid_count()))?;

            let taken: BTreeSet<String> =
                smp.candidates.iter().filter(|c| c.label != Label::RandomQuestion).map(|c| fold_key(&c.text)).collect();
            let available: BTreeSet<&String> = pool
                .iter()
                .filter(|(cid, _)| **cid != smp.conversation_id)
                .flat_map(|(_, qs)| qs)
                .filter(|q| !taken.contains(*q))
                .collect();
            let random = smp.candidates.iter().filter(|c| c.label == Label::RandomQuestion).count();
            if available.len() >= RANDOM_QUESTIONS {
                ensure(random == RANDOM_QUESTIONS, format!("{id}: {random} random questions with a pool of {}", available.len()))?;
            }

            let context: Vec<&str> = smp.context.questions().collect();
            for c in &smp.candidates {
                *counts.entry(c.label).or_default() += 1;
                match c.label {
                    Label::HistoryDuplicate => {
                        ensure(context.contains(&c.text.as_str()), format!("{id}: duplicate `{}` not in context", c.text))?
                    }
                    Label::IrrelevantEntity | Label::AsrError => {
                        let o = c.origin.as_ref().ok_or(format!("{id}: {} without origin", c.candidate_id))?;
                        let span = o.span.ok_or(format!("{id}: {} without span", c.candidate_id))?;
                        ensure(
                            differs_only_in_span(&o.source_question, &c.text, span),
                            format!("{id}: `{}` changes `{}` outside {span:?}", c.text, o.source_question),
                        )?;
                        if c.label == Label::AsrError {
                            let src = token_strings(&o.source_question);
                            let cand = token_strings(&c.text);
                            ensure(cand.len() == src.len(), format!("{id}: `{}` changes token count", c.text))?;
                            let (a, b) = (&src[span[0]], &cand[span[0]]);
                            ensure(
                                a != b && phonetic_key(a) == phonetic_key(b),
                                format!("{id}: asr `{a}` -> `{b}` breaks key or spelling"),
                            )?;
                        }
                    }
                    _ => {}
                }
            }
        }
        for label in [Label::HistoryDuplicate, Label::IrrelevantEntity, Label::AsrError, Label::RandomQuestion] {
            ensure(counts.get(&label).copied().unwrap_or(0) > 0, format!("fixture produced no {}", label.as_str()))?;
        }
        Ok(format!(
            "{} samples; {} duplicates, {} irrelevant entity, {} asr checked",
            samples.len(),
            counts[&Label::HistoryDuplicate],
            counts[&Label::IrrelevantEntity],
            counts[&Label::AsrError]
        ))
    })();
    outcome(r)
}

fn table_one() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let paths = common::godel(d);
    let cfg = d.join("run.toml");
    fs::write(&cfg, "[generator]\nentity_targets = \"all_context\"\n").unwrap();
    let expected = [
        ("Where was Kurt Gödel born?", Label::HistoryDuplicate),
        ("Which school did Kurt Gödel attend?", Label::Paraphrase),
        ("Where was Cristiano Ronaldo born?", Label::IrrelevantEntity),
        ("Where did Curt Gödel go to school?", Label::AsrError),
        ("When did Cristiano Ronaldo join Juventus?", Label::RandomQuestion),
        ("When did Kurt Gödel join Juventus?", Label::IrrelevantContext),
        ("What were Kurt Gödel's interests?", Label::Valid),
    ];
    let mut seeds = 0;
    for seed in 0..5 {
        let out = d.join(format!("gen{seed}"));
        let seed_s = seed.to_string();
        run_ok(&[
            "--config", s(&cfg), "generate",
            "--corpus", s(&paths.corpus),
            "--catalog", s(&paths.catalog),
            "--first-names", s(&paths.first),
            "--last-names", s(&paths.last),
            "--lexicon", s(&paths.lexicon),
            "--paraphrases", s(&paths.paraphrases),
            "--seed", &seed_s,
            "--out", s(&out),
        ]);
        let samples = read_samples(&out.join("samples.jsonl"));
        let Some(smp) = samples.iter().find(|x| x.sample_id == "godel#4") else {
            return Outcome::Fail(format!("seed {seed}: no sample godel#4"));
        };
        for (text, label) in expected {
            if !smp.candidates.iter().any(|c| c.text == text && c.label == label) {
                return Outcome::Fail(format!("seed {seed}: missing {} `{text}`", label.as_str()));
            }
        }
        seeds += 1;
    }
    Outcome::Pass(format!("six confounder rows and the valid follow-up present for {seeds} seeds"))
}

// ------------------------------------------------------- bm25, phonetics

fn bm25_oracle() -> Outcome {
    let docs = [("d1", "the cat sat on the mat"), ("d2", "the dog sat"), ("d3", "cats and dogs")];
    let bank = QuestionBank {
        documents: docs
            .iter()
            .map(|(id, t)| BankDocument { doc_id: id.to_string(), text: t.to_string(), conversation_id: String::new() })
            .collect(),
    };
    let idx = InvertedIndex::build(&bank, Bm25Params::default()).unwrap();
    // N = 3, avgdl = 4, k1 = 1.2, b = 0.75
    let idf = |df: f64| (1.0 + (3.0 - df + 0.5) / (df + 0.5)).ln();
    let term = |tf: f64, df: f64, dl: f64| idf(df) * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * dl / 4.0));
    let cases = [
        ("the cat sat", "d1", term(2.0, 2.0, 6.0) + term(1.0, 1.0, 6.0) + term(1.0, 2.0, 6.0)),
        ("the cat sat", "d2", term(1.0, 2.0, 3.0) + term(1.0, 2.0, 3.0)),
        ("the cat sat", "d3", 0.0),
        ("cats dogs mat", "d3", term(1.0, 1.0, 3.0) + term(1.0, 1.0, 3.0)),
        ("cats dogs mat", "d1", term(1.0, 1.0, 6.0)),
        ("dog dog", "d2", term(1.0, 1.0, 3.0)),
    ];
    let mut worst: f64 = 0.0;
    for (q, doc, want) in cases {
        worst = worst.max((idx.bm25_score(q, doc).unwrap() - want).abs());
    }
    outcome(ensure(worst < BM25_TOL, format!("max |delta| {worst:e}")).map(|_| format!("6 query/doc pairs, max |delta| {worst:e}")))
}

// Mirrors the key rules on plain words, independent of the library code.
fn oracle_key(w: &str) -> String {
    let w = w.to_lowercase().replace('ö', "o");
    let s = if let Some(r) = w.strip_prefix("ph") {
        format!("f{r}")
    } else if let Some(r) = w.strip_prefix('x') {
        format!("ks{r}")
    } else if let Some(r) = w.strip_prefix('q') {
        format!("k{r}")
    } else if let Some(r) = w.strip_prefix('c') {
        if r.starts_with(['e', 'i', 'y']) { format!("s{r}") } else { format!("k{r}") }
    } else {
        w
    };
    let s: String = s.char_indices().filter(|&(i, c)| i == 0 || !"why".contains(c)).map(|(_, c)| c).collect();
    let mut d = String::new();
    for c in s.chars() {
        if !d.ends_with(c) {
            d.push(c);
        }
    }
    d.char_indices().filter(|&(i, c)| i == 0 || !"aeiou".contains(c)).map(|(_, c)| c.to_ascii_uppercase()).collect()
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            cur[j] = (prev[j - 1] + usize::from(a[i - 1] != b[j - 1])).min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn lexicon() -> Vec<String> {
    let mut words: Vec<String> = [
        "kurt", "curt", "cart", "court", "washington", "houston", "phone", "fone", "night", "knight", "city", "sity",
        "cent", "sent", "queen", "kween", "xenon", "brady", "bradey", "godel", "gödel", "whole", "hole",
    ]
    .iter()
    .map(|w| w.to_string())
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let onsets = ["c", "k", "q", "ph", "f", "x", "s", "w", "h", "b", "t", "r"];
    let nuclei = ["a", "e", "i", "o", "u", "y", "ee", "ou"];
    let codas = ["", "t", "tt", "rt", "n", "nn", "h", "w", "s", "ck", "l"];
    while words.len() < LEXICON_SIZE {
        let mut w = String::new();
        for _ in 0..rng.gen_range(1..=2) {
            w.push_str(onsets[rng.gen_range(0..onsets.len())]);
            w.push_str(nuclei[rng.gen_range(0..nuclei.len())]);
            w.push_str(codas[rng.gen_range(0..codas.len())]);
        }
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

fn phonetics() -> Outcome {
    let r = (|| {
        ensure(phonetic_key("kurt") == phonetic_key("curt"), "key(kurt) != key(curt)")?;
        ensure(phonetic_key("washington") != phonetic_key("houston"), "key(washington) == key(houston)")?;
        let words = lexicon();
        let src = LocalHomophones::new(PhoneticLexicon::from_words(&words));
        let mut pairs = 0;
        for w in &words {
            for h in src.homophones(w).map_err(|e| e.to_string())? {
                ensure(oracle_key(&h) == oracle_key(w), format!("{w} -> {h}: keys differ"))?;
                ensure(h.to_lowercase() != w.to_lowercase(), format!("{w} -> {h}: same spelling"))?;
                ensure(h.split_whitespace().count() == 1, format!("{w} -> {h}: not one token"))?;
                ensure(levenshtein(w, &h) <= 2, format!("{w} -> {h}: edit distance above 2"))?;
                ensure(accept_homophone(w, &h), format!("{w} -> {h}: rejected by filter"))?;
                pairs += 1;
            }
        }
        ensure(pairs > 100, format!("only {pairs} homophone pairs"))?;
        Ok(format!("{} words, {pairs} homophone pairs all pass the filter", words.len()))
    })();
    outcome(r)
}

// ------------------------------------------------------- end-to-end ranking

fn oracle_scores(samples: &[Sample]) -> String {
    let mut out = String::new();
    for smp in samples {
        for c in &smp.candidates {
            let v = if c.label == Label::Valid { 1 } else { 0 };
            out.push_str(&format!(
                "{{\"sample_id\":{},\"candidate_id\":{},\"score\":{v}}}\n",
                serde_json::to_string(&smp.sample_id).unwrap(),
                serde_json::to_string(&c.candidate_id).unwrap()
            ));
        }
    }
    out
}

fn eval_mrr(work: &Path, dataset: &Path, scorer_args: &[&str], config: Option<&Path>) -> f64 {
    let ranked = work.join("ranked.jsonl");
    let out = work.join("eval");
    let mut args = vec![];
    if let Some(c) = config {
        args.extend(["--config", s(c)]);
    }
    args.extend(["rank", "--dataset", s(dataset), "--out", s(&ranked)]);
    args.extend_from_slice(scorer_args);
    run_ok(&args);
    run_ok(&["eval", "--ranked", s(&ranked), "--out", s(&out)]);
    let report: serde_json::Value = serde_json::from_str(fs::read_to_string(out.join("report.jsonl")).unwrap().trim()).unwrap();
    report["mrr"].as_f64().unwrap()
}

fn oracle_score_file() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dataset = match std::env::var_os("FOLLOWUP_DATASET") {
        Some(p) => p.into(),
        None => {
            let paths = common::synthetic(d, DETERMINISM_CONVERSATIONS);
            generate(&paths, &d.join("gen"), DETERMINISM_SEED, 0, &[]);
            d.join("gen/samples.jsonl")
        }
    };
    let samples = read_samples(&dataset);
    let scores = d.join("oracle.jsonl");
    fs::write(&scores, oracle_scores(&samples)).unwrap();
    let m = eval_mrr(d, &dataset, &["--scorer", "external", "--scores", s(&scores)], None);
    outcome(ensure((m - 1.0).abs() < METRIC_TOL, format!("MRR {m}")).map(|_| format!("{} samples, MRR {m}", samples.len())))
}

fn desk_scale_cosine() -> Outcome {
    let (Some(vectors), Some(dataset)) = (std::env::var_os("FOLLOWUP_VECTORS"), std::env::var_os("FOLLOWUP_DATASET")) else {
        return Outcome::NotRun("needs published word vectors and a test split; set FOLLOWUP_VECTORS and FOLLOWUP_DATASET".into());
    };
    let dim: usize = std::env::var("FOLLOWUP_VECTOR_DIM").ok().and_then(|v| v.parse().ok()).unwrap_or(300);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.toml");
    fs::write(&cfg, format!("vector_dim = {dim}\n")).unwrap();
    let vectors = Path::new(&vectors);
    let m = eval_mrr(d, Path::new(&dataset), &["--scorer", "cosine", "--vectors", s(vectors)], Some(&cfg));
    let (lo, hi) = DESK_MRR_BAND;
    outcome(ensure((lo..=hi).contains(&m), format!("MRR {m:.4} outside [{lo}, {hi}]")).map(|_| format!("MRR {m:.4} in [{lo}, {hi}]")))
}

fn main() {
    let checks: &[(&str, Check)] = &[
        ("metric oracle equivalence", metric_oracle),
        ("MRR spot values", mrr_spot_values),
        ("determinism", determinism),
        ("structural generation properties", structural),
        ("worked example reproduction", table_one),
        ("BM25 oracle", bm25_oracle),
        ("phonetics", phonetics),
        ("desk-scale cosine baseline", desk_scale_cosine),
        ("oracle score file end to end", oracle_score_file),
        ("monotone invariance", monotone_invariance),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Outcome::Pass(d) => println!("PASS     {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL     {name}: {d}");
            }
            Outcome::NotRun(d) => println!("NOT RUN  {name}: {d}"),
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
