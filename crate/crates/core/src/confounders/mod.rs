//! Typed confounder generators and sample assembly.
//!
//! Each generator returns [`Draft`]s (text, label, provenance). Assembly runs
//! the enabled generators in a fixed order, drops drafts whose folded text
//! collides with the valid follow-up or an earlier candidate, shuffles with
//! the sample's own generator and assigns candidate ids by final position.

mod paraphrase;
mod pool;

pub use paraphrase::{ImportedParaphrases, ParaphraseChain, ParaphraseProvider, RewriteRule, RuleParaphraser};
pub use pool::{PoolQuestion, QuestionPool};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Candidate, DialogContext, Label, Origin, Sample, SampleSkeleton};
use crate::entity::{EntityCatalog, EntityMention, EntityType, NameLexicon};
use crate::phonetics::{self, HomophoneError, HomophoneSource};
use crate::seed;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    HistoryDuplicate,
    Paraphrase,
    IrrelevantEntity,
    PartialEntity,
    IrrelevantContext,
    AsrError,
    RandomQuestion,
}

impl GeneratorKind {
    /// Generation order.
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::HistoryDuplicate,
        GeneratorKind::Paraphrase,
        GeneratorKind::IrrelevantEntity,
        GeneratorKind::PartialEntity,
        GeneratorKind::IrrelevantContext,
        GeneratorKind::AsrError,
        GeneratorKind::RandomQuestion,
    ];

    pub fn label(self) -> Label {
        match self {
            GeneratorKind::HistoryDuplicate => Label::HistoryDuplicate,
            GeneratorKind::Paraphrase => Label::Paraphrase,
            GeneratorKind::IrrelevantEntity => Label::IrrelevantEntity,
            GeneratorKind::PartialEntity => Label::PartialEntity,
            GeneratorKind::IrrelevantContext => Label::IrrelevantContext,
            GeneratorKind::AsrError => Label::AsrError,
            GeneratorKind::RandomQuestion => Label::RandomQuestion,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.label().as_str()
    }

    pub fn needs_catalog(self) -> bool {
        matches!(
            self,
            GeneratorKind::IrrelevantEntity
                | GeneratorKind::PartialEntity
                | GeneratorKind::IrrelevantContext
                | GeneratorKind::AsrError
        )
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GeneratorKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown generator `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicatePolicy {
    CurrentOnly,
    AllContextQuestions,
}

/// Which context questions the entity-swap generators rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityTargets {
    CurrentOnly,
    AllContext,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub enabled: BTreeSet<GeneratorKind>,
    pub random_question_count: usize,
    pub max_entity_swaps_per_sample: usize,
    pub duplicate_policy: DuplicatePolicy,
    pub entity_targets: EntityTargets,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            enabled: GeneratorKind::ALL.into_iter().collect(),
            random_question_count: 3,
            max_entity_swaps_per_sample: 4,
            duplicate_policy: DuplicatePolicy::AllContextQuestions,
            entity_targets: EntityTargets::CurrentOnly,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn is_enabled(&self, kind: GeneratorKind) -> bool {
        self.enabled.contains(&kind)
    }

    /// Checks that every enabled generator has what it needs.
    pub fn check(&self, res: &Resources<'_>) -> Result<(), ConfigError> {
        for &kind in &self.enabled {
            if kind.needs_catalog() && res.catalog.is_none_or(EntityCatalog::is_empty) {
                return Err(ConfigError::MissingResource { generator: kind, resource: "entity catalog" });
            }
        }
        if self.is_enabled(GeneratorKind::PartialEntity) && res.names.is_none_or(NameLexicon::is_empty) {
            return Err(ConfigError::MissingResource { generator: GeneratorKind::PartialEntity, resource: "name lexicon" });
        }
        if self.is_enabled(GeneratorKind::Paraphrase) && res.paraphraser.is_none() {
            return Err(ConfigError::MissingResource { generator: GeneratorKind::Paraphrase, resource: "paraphrase provider" });
        }
        if self.is_enabled(GeneratorKind::AsrError) && res.homophones.is_none() {
            return Err(ConfigError::MissingResource { generator: GeneratorKind::AsrError, resource: "homophone source" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("generator `{generator}` is enabled but no {resource} is available")]
    MissingResource { generator: GeneratorKind, resource: &'static str },
}

/// Shared read-only inputs of the generators.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub catalog: Option<&'a EntityCatalog>,
    pub names: Option<&'a NameLexicon>,
    pub paraphraser: Option<&'a (dyn ParaphraseProvider + Sync)>,
    pub homophones: Option<&'a (dyn HomophoneSource + Sync)>,
    pub pool: &'a QuestionPool,
}

/// A generated confounder before dedup and id assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draft {
    pub text: String,
    pub label: Label,
    pub origin: Option<Origin>,
}

impl Draft {
    fn new(text: String, label: Label) -> Self {
        Draft { text, label, origin: None }
    }

    fn rewritten(text: String, label: Label, source: &str, span: [usize; 2]) -> Self {
        Draft { text, label, origin: Some(Origin { source_question: source.into(), span: Some(span), source_conversation: None }) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditAction {
    Emitted,
    Skipped,
    Deduped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub sample_id: String,
    pub generator: String,
    pub action: AuditAction,
    pub reason: String,
}

// ---------------------------------------------------------------------------
// Individual generators

/// Paraphrase of the current question. The paraphrase must differ from the
/// question and keep every entity mention verbatim.
pub fn gen_paraphrase(
    question: &str,
    mentions: &[EntityMention],
    provider: &(impl ParaphraseProvider + ?Sized),
) -> Result<Draft, &'static str> {
    if question.trim().is_empty() {
        return Err("empty question");
    }
    let p = provider.paraphrase(question).ok_or("provider has no paraphrase")?;
    let p = text::normalize_whitespace(&p);
    if text::fold_key(&p).is_empty() {
        return Err("empty paraphrase");
    }
    if text::fold_key(&p) == text::fold_key(question) {
        return Err("paraphrase equals question");
    }
    if mentions.iter().any(|m| !p.contains(m.text.as_str())) {
        return Err("paraphrase drops an entity mention");
    }
    Ok(Draft::new(p, Label::Paraphrase))
}

/// Swaps each mention (up to `cap`) for a different catalog entity of the same type.
pub fn gen_irrelevant_entity<R: Rng + ?Sized>(
    question: &str,
    mentions: &[EntityMention],
    catalog: &EntityCatalog,
    rng: &mut R,
    cap: usize,
) -> Vec<Result<Draft, String>> {
    mentions
        .iter()
        .take(cap)
        .map(|m| {
            let entry = catalog.sample_replacement(m.entity_type, &m.text, rng).map_err(|e| e.to_string())?;
            Ok(Draft::rewritten(
                text::splice(question, m.bytes.clone(), &entry.surface),
                Label::IrrelevantEntity,
                question,
                [m.span.start, m.span.end],
            ))
        })
        .collect()
}

/// Replaces one token of a multi-token mention with a random name token.
/// Person mentions pick any position (first names for position 0, last names
/// elsewhere); other types replace their last token with a last name.
pub fn gen_partial_entity<R: Rng + ?Sized>(
    question: &str,
    mention: &EntityMention,
    names: &NameLexicon,
    rng: &mut R,
) -> Result<Draft, &'static str> {
    let n = mention.tokens.len();
    if n < 2 {
        return Err("single-token mention");
    }
    let pos = if mention.entity_type == EntityType::Person { rng.gen_range(0..n) } else { n - 1 };
    let list = if pos == 0 { &names.first_names } else { &names.last_names };
    let original = &mention.tokens[pos];
    let eligible: Vec<&String> = list.iter().filter(|w| *w != original).collect();
    if eligible.is_empty() {
        return Err("no name token to substitute");
    }
    let pick = eligible[rng.gen_range(0..eligible.len())];
    let tokens = text::tokenize(question);
    let tok = &tokens[mention.span.start + pos];
    let replacement = text::match_case(&question[tok.range()], pick);
    let at = mention.span.start + pos;
    Ok(Draft::rewritten(text::splice(question, tok.range(), &replacement), Label::PartialEntity, question, [at, at + 1]))
}

/// Puts the current entity into a same-type question from another conversation.
pub fn gen_irrelevant_context<R: Rng + ?Sized>(
    mention: &EntityMention,
    pool: &QuestionPool,
    conversation_id: &str,
    rng: &mut R,
) -> Result<Draft, &'static str> {
    let (qi, mi) = pool.pick_same_type(mention.entity_type, conversation_id, rng).ok_or("no same-type question in pool")?;
    let q = pool.question(qi);
    let m = &q.mentions[mi];
    Ok(Draft {
        text: text::splice(&q.text, m.bytes.clone(), &mention.text),
        label: Label::IrrelevantContext,
        origin: Some(Origin {
            source_question: q.text.clone(),
            span: Some([m.span.start, m.span.end]),
            source_conversation: Some(pool.conversation_id(q.conversation).into()),
        }),
    })
}

/// `k` questions from other conversations, as-is.
pub fn gen_random_questions<R: Rng + ?Sized>(
    pool: &QuestionPool,
    conversation_id: &str,
    rng: &mut R,
    k: usize,
) -> Vec<Draft> {
    pool.pick_random(conversation_id, k, rng)
        .into_iter()
        .map(|qi| {
            let q = pool.question(qi);
            Draft {
                text: q.text.clone(),
                label: Label::RandomQuestion,
                origin: Some(Origin {
                    source_question: q.text.clone(),
                    span: None,
                    source_conversation: Some(pool.conversation_id(q.conversation).into()),
                }),
            }
        })
        .collect()
}

/// One candidate per mention token that has an acceptable homophone, each
/// replacing only that token.
pub fn gen_asr_error(
    question: &str,
    mention: &EntityMention,
    source: &(impl HomophoneSource + ?Sized),
) -> Result<Vec<Draft>, HomophoneError> {
    let tokens = text::tokenize(question);
    let mut out = Vec::new();
    for ti in mention.span.clone() {
        let tok = &tokens[ti];
        let found = source.homophones(&tok.text)?;
        if let Some(h) = found.iter().find(|h| phonetics::accept_homophone(&tok.text, h)) {
            let replacement = text::match_case(&question[tok.range()], h.trim());
            out.push(Draft::rewritten(
                text::splice(question, tok.range(), &replacement),
                Label::AsrError,
                question,
                [ti, ti + 1],
            ));
        }
    }
    Ok(out)
}

/// Context questions copied verbatim.
pub fn gen_history_duplicates(context: &DialogContext, policy: DuplicatePolicy) -> Vec<Draft> {
    let qs: Vec<&str> = match policy {
        DuplicatePolicy::CurrentOnly => alloc::vec![context.current_q.as_str()],
        DuplicatePolicy::AllContextQuestions => context.questions().collect(),
    };
    qs.into_iter().map(|q| Draft::new(q.into(), Label::HistoryDuplicate)).collect()
}

// ---------------------------------------------------------------------------
// Assembly

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembled {
    pub sample: Sample,
    pub audit: Vec<AuditRecord>,
}

struct Audit<'a> {
    sample_id: &'a str,
    records: Vec<AuditRecord>,
}

impl Audit<'_> {
    fn log(&mut self, kind: GeneratorKind, action: AuditAction, reason: impl Into<String>) {
        self.records.push(AuditRecord {
            sample_id: self.sample_id.into(),
            generator: kind.as_str().into(),
            action,
            reason: reason.into(),
        });
    }
}

/// Builds a complete sample: the valid follow-up plus all enabled confounders,
/// deduplicated by folded text and shuffled.
pub fn assemble_sample(skeleton: &SampleSkeleton, res: &Resources<'_>, config: &GeneratorConfig) -> Assembled {
    let sample_seed = seed::derive(config.seed, &skeleton.sample_id);
    let rng_for = |kind: GeneratorKind| seed::rng_from(seed::derive(sample_seed, kind.as_str()));
    let mut audit = Audit { sample_id: &skeleton.sample_id, records: Vec::new() };
    let mut drafts: Vec<(GeneratorKind, Draft)> = Vec::new();

    let ctx = &skeleton.context;
    let find = |q: &str| res.catalog.map(|c| c.find_entities(q)).unwrap_or_default();
    let current_mentions = find(&ctx.current_q);
    let mut targets: Vec<(&str, Vec<EntityMention>)> = alloc::vec![(ctx.current_q.as_str(), current_mentions.clone())];
    if config.entity_targets == EntityTargets::AllContext {
        targets.extend(ctx.history.iter().map(|p| (p.q.as_str(), find(&p.q))));
    }
    let no_mentions = targets.iter().all(|(_, ms)| ms.is_empty());

    for kind in GeneratorKind::ALL {
        if !config.is_enabled(kind) {
            continue;
        }
        let mut rng = rng_for(kind);
        // random questions over-draw so collisions with earlier candidates do not eat the quota
        let mut taken: BTreeSet<String> = BTreeSet::new();
        if kind == GeneratorKind::RandomQuestion {
            taken.extend(drafts.iter().map(|(_, d)| text::fold_key(&d.text)));
            taken.insert(text::fold_key(&skeleton.valid_text));
        }
        let mut emit = |d: Draft| drafts.push((kind, d));
        match kind {
            GeneratorKind::HistoryDuplicate => {
                gen_history_duplicates(ctx, config.duplicate_policy).into_iter().for_each(&mut emit);
            }
            GeneratorKind::Paraphrase => match res.paraphraser {
                Some(p) => match gen_paraphrase(&ctx.current_q, &current_mentions, p) {
                    Ok(d) => emit(d),
                    Err(why) => audit.log(kind, AuditAction::Skipped, why),
                },
                None => audit.log(kind, AuditAction::Skipped, "no paraphrase provider"),
            },
            GeneratorKind::IrrelevantEntity => {
                let Some(catalog) = res.catalog else {
                    audit.log(kind, AuditAction::Skipped, "no catalog");
                    continue;
                };
                if no_mentions {
                    audit.log(kind, AuditAction::Skipped, "no entity mention");
                }
                let mut budget = config.max_entity_swaps_per_sample;
                for (q, ms) in &targets {
                    for r in gen_irrelevant_entity(q, ms, catalog, &mut rng, budget) {
                        budget -= 1;
                        match r {
                            Ok(d) => emit(d),
                            Err(why) => audit.log(kind, AuditAction::Skipped, why),
                        }
                    }
                }
            }
            GeneratorKind::PartialEntity => {
                let Some(names) = res.names else {
                    audit.log(kind, AuditAction::Skipped, "no name lexicon");
                    continue;
                };
                if no_mentions {
                    audit.log(kind, AuditAction::Skipped, "no entity mention");
                }
                let mut budget = config.max_entity_swaps_per_sample;
                for (q, ms) in &targets {
                    for m in ms {
                        if budget == 0 {
                            break;
                        }
                        match gen_partial_entity(q, m, names, &mut rng) {
                            Ok(d) => {
                                budget -= 1;
                                emit(d);
                            }
                            Err(why) => audit.log(kind, AuditAction::Skipped, why),
                        }
                    }
                }
            }
            GeneratorKind::IrrelevantContext => match current_mentions.first() {
                Some(m) => match gen_irrelevant_context(m, res.pool, &skeleton.conversation_id, &mut rng) {
                    Ok(d) => emit(d),
                    Err(why) => audit.log(kind, AuditAction::Skipped, why),
                },
                None => audit.log(kind, AuditAction::Skipped, "no entity in current question"),
            },
            GeneratorKind::AsrError => {
                let Some(source) = res.homophones else {
                    audit.log(kind, AuditAction::Skipped, "no homophone source");
                    continue;
                };
                if no_mentions {
                    audit.log(kind, AuditAction::Skipped, "no entity mention");
                }
                for (q, ms) in &targets {
                    for m in ms {
                        match gen_asr_error(q, m, source) {
                            Ok(ds) if ds.is_empty() => {
                                audit.log(kind, AuditAction::Skipped, format!("no homophone for `{}`", m.text))
                            }
                            Ok(ds) => ds.into_iter().for_each(&mut emit),
                            Err(e) => audit.log(kind, AuditAction::Skipped, e.to_string()),
                        }
                    }
                }
            }
            GeneratorKind::RandomQuestion => {
                let k = config.random_question_count;
                let ds: Vec<Draft> = gen_random_questions(res.pool, &skeleton.conversation_id, &mut rng, k + taken.len())
                    .into_iter()
                    .filter(|d| taken.insert(text::fold_key(&d.text)))
                    .take(k)
                    .collect();
                if ds.len() < k {
                    log::warn!("{}: pool gave {} of {k} random questions", skeleton.sample_id, ds.len());
                    audit.log(kind, AuditAction::Skipped, format!("pool gave {} of {k}", ds.len()));
                }
                ds.into_iter().for_each(&mut emit);
            }
        }
    }

    // Dedup by folded text; the valid follow-up always survives.
    let valid_key = text::fold_key(&skeleton.valid_text);
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    seen.insert(valid_key.clone(), ());
    let mut kept = alloc::vec![Draft::new(skeleton.valid_text.clone(), Label::Valid)];
    for (kind, d) in drafts {
        let key = text::fold_key(&d.text);
        if key.is_empty() {
            audit.log(kind, AuditAction::Skipped, "empty text");
        } else if key == valid_key {
            audit.log(kind, AuditAction::Deduped, "equals valid follow-up");
        } else if seen.insert(key, ()).is_some() {
            audit.log(kind, AuditAction::Deduped, "duplicate of earlier candidate");
        } else {
            audit.log(kind, AuditAction::Emitted, "");
            kept.push(d);
        }
    }

    let no_confounders = kept.len() == 1;
    if no_confounders {
        log::warn!("{}: no confounders generated", skeleton.sample_id);
    }
    let mut permutation: Vec<usize> = (0..kept.len()).collect();
    permutation.shuffle(&mut seed::rng_from(seed::derive(sample_seed, "shuffle")));
    let width = digits(kept.len().saturating_sub(1)).max(2);
    let mut slots: Vec<Option<Draft>> = kept.into_iter().map(Some).collect();
    let candidates = permutation
        .iter()
        .enumerate()
        .map(|(pos, &src)| {
            let d = slots[src].take().expect("permutation is a bijection");
            Candidate { candidate_id: format!("c{pos:0width$}"), text: d.text, label: d.label, origin: d.origin }
        })
        .collect();

    Assembled {
        sample: Sample {
            sample_id: skeleton.sample_id.clone(),
            conversation_id: skeleton.conversation_id.clone(),
            context: skeleton.context.clone(),
            candidates,
            seed: sample_seed,
            permutation,
            no_confounders,
        },
        audit: audit.records,
    }
}

fn digits(mut n: usize) -> usize {
    let mut d = 1;
    while n >= 10 {
        n /= 10;
        d += 1;
    }
    d
}

/// True when `candidate` equals `source` outside the token range `span`
/// (prefix and suffix tokens identical, folded).
pub fn differs_only_in_span(source: &str, candidate: &str, span: [usize; 2]) -> bool {
    let s = text::token_strings(source);
    let c = text::token_strings(candidate);
    let [start, end] = span;
    if start > end || end > s.len() {
        return false;
    }
    let suffix = s.len() - end;
    c.len() >= start + suffix && s[..start] == c[..start] && s[end..] == c[c.len() - suffix..]
}
