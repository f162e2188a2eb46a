use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use followup::config::RunConfig;
use followup::datamuse::{RemoteHomophones, WithFallback, DEFAULT_BASE_URL};
use followup::exchange;
use followup::formats;
use followup::jsonl;
use followup::pipeline;
use followup::report::{self, ReportRecord};
use followup::stats::DatasetStats;
use followup_core::confounders::{
    AuditRecord, ParaphraseChain, ParaphraseProvider, QuestionPool, Resources, RuleParaphraser,
};
use followup_core::eval;
use followup_core::index::InvertedIndex;
use followup_core::phonetics::{HomophoneSource, LocalHomophones, PhoneticLexicon};
use followup_core::ranking::{Bm25Scorer, CosineScorer, RankedList, Scorer, SentenceScorer};
use followup_core::Sample;

#[derive(Parser)]
#[command(name = "followup", version, about = "Generate, rank and evaluate follow-up question candidates")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses one per core
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build samples with typed confounders from a conversation corpus
    Generate(GenerateArgs),
    /// Build a BM25 index over a question bank
    Index(IndexArgs),
    /// Query a saved index
    Search(SearchArgs),
    /// Score and order the candidates of every sample
    Rank(RankArgs),
    /// MRR, hit ratio and score distributions of ranked output
    Eval(EvalArgs),
    /// Write the exchange file for an external scorer
    ExportScoring(ExportArgs),
    /// Check a score file covers a dataset
    ImportScores(ImportArgs),
    /// Print dataset statistics
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for samples.jsonl, audit.jsonl, stats.txt and stats.json
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Entity catalog, `surface<TAB>type` per line
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    first_names: Option<PathBuf>,
    #[arg(long)]
    last_names: Option<PathBuf>,
    /// Imported paraphrases, {question, paraphrase} per line; tried before the built-in templates
    #[arg(long)]
    paraphrases: Option<PathBuf>,
    /// Disable the built-in paraphrase templates
    #[arg(long)]
    no_paraphrase_rules: bool,
    /// Word list for local homophone lookup
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Query a sounds-like endpoint, falling back to the local lexicon
    #[arg(long)]
    remote_homophones: bool,
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    homophone_url: String,
    #[arg(long)]
    homophone_cache: Option<PathBuf>,
    /// Report partial-entity counts under irrelevant entity
    #[arg(long)]
    fold_partial: bool,
}

#[derive(Args)]
struct IndexArgs {
    /// Question bank, {doc_id, text, conversation_id} per line
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    bank: Option<PathBuf>,
    /// Index every rewritten question of a corpus instead
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScorerKind {
    Cosine,
    Bm25,
    External,
    SentenceImport,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    scorer: ScorerKind,
    /// Word vectors for the cosine scorer
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Sentence vectors for the sentence-import scorer
    #[arg(long)]
    sentence_vectors: Option<PathBuf>,
    /// Score file for the external scorer
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    ranked: PathBuf,
    /// Cut-offs for hit ratio, e.g. `--k 1 --k 3`
    #[arg(long)]
    k: Vec<usize>,
    /// Low and high score thresholds, e.g. `0.1,0.4`
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
    /// Name recorded in the report
    #[arg(long, default_value = "unknown")]
    scorer: String,
    /// Output directory for report.jsonl, report.txt and histograms.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Omit labels
    #[arg(long)]
    blind: bool,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    scores: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    fold_partial: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => generate(a, config, cli.workers),
        Command::Index(a) => index(a, &config),
        Command::Search(a) => search(a),
        Command::Rank(a) => rank(a, &config, cli.workers),
        Command::Eval(a) => evaluate(a, &config),
        Command::ExportScoring(a) => export(a),
        Command::ImportScores(a) => import(a),
        Command::Stats(a) => stats(a),
    }
}

fn need_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} `{}` does not exist", path.display());
    }
    Ok(())
}

fn generate(a: GenerateArgs, config: RunConfig, workers: usize) -> Result<()> {
    need_file(&a.corpus, "corpus")?;
    for (p, what) in [
        (&a.catalog, "catalog"),
        (&a.first_names, "first-name list"),
        (&a.last_names, "last-name list"),
        (&a.paraphrases, "paraphrase file"),
        (&a.lexicon, "lexicon"),
    ] {
        if let Some(p) = p {
            need_file(p, what)?;
        }
    }
    let mut gen_config = config.generator;
    gen_config.seed = a.seed;

    let conversations = formats::load_corpus(&a.corpus)?;
    let catalog = a.catalog.as_deref().map(formats::load_catalog).transpose()?;
    let names = match (&a.first_names, &a.last_names) {
        (Some(f), Some(l)) => Some(formats::load_names(f, l)?),
        (None, None) => None,
        _ => bail!("--first-names and --last-names go together"),
    };
    let mut chain = ParaphraseChain::new();
    if let Some(p) = &a.paraphrases {
        chain = chain.push(formats::load_paraphrases(p)?);
    }
    if !a.no_paraphrase_rules {
        chain = chain.push(RuleParaphraser::default());
    }
    let local = LocalHomophones::new(match &a.lexicon {
        Some(p) => formats::load_lexicon(p)?,
        None => PhoneticLexicon::new(),
    });
    let remote = a.remote_homophones.then(|| WithFallback {
        primary: RemoteHomophones::new(&a.homophone_url, a.homophone_cache.clone(), Duration::from_secs(10)),
        fallback: &local,
    });
    let homophones: Option<&(dyn HomophoneSource + Sync)> = match &remote {
        Some(r) => Some(r),
        None if a.lexicon.is_some() => Some(&local),
        None => None,
    };
    let paraphraser: Option<&(dyn ParaphraseProvider + Sync)> = (!chain.is_empty()).then_some(&chain as _);
    let pool = QuestionPool::build(&conversations, catalog.as_ref());
    let res = Resources { catalog: catalog.as_ref(), names: names.as_ref(), paraphraser, homophones, pool: &pool };

    let generated = pipeline::generate(&conversations, &res, &gen_config, workers)?;
    let stats = DatasetStats::from_samples(&generated.samples);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    jsonl::write(&a.out.join("samples.jsonl"), &generated.samples)?;
    jsonl::write::<AuditRecord, _>(&a.out.join("audit.jsonl"), &generated.audit)?;
    let table = stats.render(a.fold_partial);
    jsonl::write_with(&a.out.join("stats.txt"), |w| std::io::Write::write_all(w, table.as_bytes()))?;
    jsonl::write(&a.out.join("stats.json"), [&stats])?;
    print!("{table}");
    Ok(())
}

fn index(a: IndexArgs, config: &RunConfig) -> Result<()> {
    let bank = match (&a.bank, &a.corpus) {
        (Some(b), _) => formats::load_question_bank(b)?,
        (None, Some(c)) => formats::bank_from_corpus(&formats::load_corpus(c)?),
        (None, None) => unreachable!("clap requires one source"),
    };
    let idx = InvertedIndex::build(&bank, config.bm25)?;
    formats::save_index(&a.out, &idx)?;
    eprintln!("indexed {} documents, {} terms", idx.doc_count(), idx.postings().len());
    Ok(())
}

fn search(a: SearchArgs) -> Result<()> {
    let idx = formats::load_index(&a.index)?;
    for (doc_id, score) in idx.search(&a.query, a.k) {
        let text = idx.doc(&doc_id).map_or("", |d| d.text.as_str());
        println!("{score:.6}\t{doc_id}\t{text}");
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Vec<Sample>> {
    let samples: Vec<Sample> = jsonl::read(path)?;
    for s in &samples {
        if s.valid_count() != 1 {
            bail!("{}: sample {} has {} valid candidates", path.display(), s.sample_id, s.valid_count());
        }
    }
    Ok(samples)
}

fn rank(a: RankArgs, config: &RunConfig, workers: usize) -> Result<()> {
    let samples = load_dataset(&a.dataset)?;
    let required = |p: &Option<PathBuf>, flag: &str| -> Result<PathBuf> {
        let p = p.clone().with_context(|| format!("this scorer needs --{flag}"))?;
        need_file(&p, flag)?;
        Ok(p)
    };
    let (store, sentences, external);
    let scorer: Box<dyn Scorer + Sync> = match a.scorer {
        ScorerKind::Cosine => {
            store = formats::load_word_vectors(&required(&a.vectors, "vectors")?, config.vector_dim)?;
            let texts = samples.iter().flat_map(|s| {
                s.context.questions().chain(s.context.answers()).chain(s.candidates.iter().map(|c| c.text.as_str()))
            });
            let (hit, total) = followup_core::embeddings::coverage(texts, &store);
            eprintln!("vocabulary coverage {:.3} ({hit}/{total} tokens)", hit as f64 / total.max(1) as f64);
            Box::new(CosineScorer { store: &store, max_answer_tokens: config.max_answer_tokens })
        }
        ScorerKind::SentenceImport => {
            sentences = formats::load_sentence_vectors(&required(&a.sentence_vectors, "sentence-vectors")?)?;
            Box::new(SentenceScorer { vectors: &sentences, max_answer_tokens: config.max_answer_tokens })
        }
        ScorerKind::Bm25 => Box::new(Bm25Scorer { params: config.bm25 }),
        ScorerKind::External => {
            external = exchange::import_scores(&required(&a.scores, "scores")?, &samples)?;
            Box::new(external.clone())
        }
    };
    let ranked = pipeline::rank_all(&samples, scorer.as_ref(), workers)?;
    jsonl::write(&a.out, &ranked)?;
    eprintln!("ranked {} samples with {}", ranked.len(), scorer.name());
    Ok(())
}

fn evaluate(a: EvalArgs, config: &RunConfig) -> Result<()> {
    let lists: Vec<RankedList> = jsonl::read(&a.ranked)?;
    let ks = if a.k.is_empty() { config.eval.ks.clone() } else { a.k };
    let (lo, hi) = match a.thresholds[..] {
        [] => (config.eval.theta_low, config.eval.theta_high),
        [lo, hi] => (lo, hi),
        _ => bail!("--thresholds takes two values, e.g. 0.1,0.4"),
    };
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        bail!("thresholds must satisfy 0 <= low <= high <= 1");
    }
    let report = eval::evaluate(&lists, &ks, lo, hi)?;
    let table = report::render_table(&report, &a.scorer);
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        jsonl::write(&out.join("report.jsonl"), [&ReportRecord { scorer: &a.scorer, report: &report }])?;
        jsonl::write_with(&out.join("report.txt"), |w| std::io::Write::write_all(w, table.as_bytes()))?;
        report::write_histograms(&out.join("histograms.csv"), &report.distribution)?;
    }
    print!("{table}");
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let samples = load_dataset(&a.dataset)?;
    let records = exchange::export(&samples, a.blind);
    jsonl::write(&a.out, &records)?;
    eprintln!("exported {} candidates from {} samples", records.len(), samples.len());
    Ok(())
}

fn import(a: ImportArgs) -> Result<()> {
    let samples = load_dataset(&a.dataset)?;
    let scorer = exchange::import_scores(&a.scores, &samples)?;
    println!("{} scores cover all {} samples", scorer.len(), samples.len());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let samples = load_dataset(&a.dataset)?;
    print!("{}", DatasetStats::from_samples(&samples).render(a.fold_partial));
    Ok(())
}
