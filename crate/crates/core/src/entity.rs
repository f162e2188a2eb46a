//! Entity catalog and gazetteer mention detection.
//!
//! The catalog serves twice: it is the dictionary the recognizer matches
//! against, and the pool replacement entities are drawn from. Matching is
//! greedy left to right over shared-tokenizer tokens, taking the longest
//! catalog surface that starts at each position, so mentions never overlap.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::text::{self, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityType {
    Person,
    Org,
    Location,
    Event,
    Work,
    Misc,
}

impl EntityType {
    pub const ALL: [EntityType; 6] =
        [EntityType::Person, EntityType::Org, EntityType::Location, EntityType::Event, EntityType::Work, EntityType::Misc];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Person => "PERSON",
            EntityType::Org => "ORG",
            EntityType::Location => "LOCATION",
            EntityType::Event => "EVENT",
            EntityType::Work => "WORK",
            EntityType::Misc => "MISC",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CatalogError::UnknownType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown entity type `{0}`")]
    UnknownType(String),
    #[error("expected `surface<TAB>type`")]
    MissingType,
    #[error("surface has no tokens")]
    EmptySurface,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityEntry {
    pub surface: String,
    pub entity_type: EntityType,
    pub tokens: Vec<String>,
}

impl EntityEntry {
    pub fn new(surface: &str, entity_type: EntityType) -> Result<Self, CatalogError> {
        let surface = text::normalize_whitespace(surface);
        let tokens = text::token_strings(&surface);
        if tokens.is_empty() {
            return Err(CatalogError::EmptySurface);
        }
        Ok(EntityEntry { surface, entity_type, tokens })
    }
}

/// Parses one `surface<TAB>type` line. Blank lines and `#` comments give `Ok(None)`.
pub fn parse_catalog_line(line: &str) -> Result<Option<EntityEntry>, CatalogError> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let (surface, ty) = line.rsplit_once('\t').ok_or(CatalogError::MissingType)?;
    let ty: EntityType = ty.parse()?;
    EntityEntry::new(surface, ty).map(Some)
}

/// A catalog line that was rejected while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: usize,
    pub error: CatalogError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityCatalog {
    entries: Vec<EntityEntry>,
    seen: BTreeSet<String>,
    by_type: BTreeMap<EntityType, Vec<usize>>,
    // first token -> entry indices, longest surface first
    by_first_token: BTreeMap<String, Vec<usize>>,
}

impl EntityCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a catalog from file contents, collecting rejected lines instead
    /// of failing on them.
    pub fn parse(contents: &str) -> (Self, Vec<RejectedLine>) {
        let mut catalog = EntityCatalog::new();
        let mut rejected = Vec::new();
        for (i, line) in contents.lines().enumerate() {
            match parse_catalog_line(line) {
                Ok(Some(entry)) => {
                    catalog.insert(entry);
                }
                Ok(None) => {}
                Err(error) => rejected.push(RejectedLine { line: i + 1, error }),
            }
        }
        (catalog, rejected)
    }

    /// Adds an entry. Returns `false` if the surface (case-folded) is already
    /// present; the first occurrence wins.
    pub fn insert(&mut self, entry: EntityEntry) -> bool {
        let key = entry.tokens.join(" ");
        if !self.seen.insert(key) {
            return false;
        }
        let idx = self.entries.len();
        self.by_type.entry(entry.entity_type).or_default().push(idx);
        let bucket = self.by_first_token.entry(entry.tokens[0].clone()).or_default();
        bucket.push(idx);
        let entries = &self.entries;
        let len_of = |i: usize| if i == idx { entry.tokens.len() } else { entries[i].tokens.len() };
        // stable: equal lengths keep insertion order
        bucket.sort_by_key(|&a| core::cmp::Reverse(len_of(a)));
        self.entries.push(entry);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EntityEntry] {
        &self.entries
    }

    pub fn of_type(&self, ty: EntityType) -> impl Iterator<Item = &EntityEntry> {
        self.by_type.get(&ty).into_iter().flatten().map(|&i| &self.entries[i])
    }

    pub fn count_of_type(&self, ty: EntityType) -> usize {
        self.by_type.get(&ty).map_or(0, Vec::len)
    }

    /// Finds non-overlapping catalog mentions in `question`, sorted by span start.
    pub fn find_entities(&self, question: &str) -> Vec<EntityMention> {
        let tokens = text::tokenize(question);
        self.find_in_tokens(question, &tokens)
    }

    pub fn find_in_tokens(&self, question: &str, tokens: &[Token]) -> Vec<EntityMention> {
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self.by_first_token.get(&tokens[i].text).and_then(|bucket| {
                bucket.iter().copied().find(|&e| {
                    let want = &self.entries[e].tokens;
                    i + want.len() <= tokens.len()
                        && want.iter().zip(&tokens[i..]).all(|(w, t)| *w == t.text)
                })
            });
            match hit {
                Some(e) => {
                    let entry = &self.entries[e];
                    let n = entry.tokens.len();
                    mentions.push(EntityMention {
                        span: i..i + n,
                        bytes: tokens[i].start..tokens[i + n - 1].end,
                        entity_type: entry.entity_type,
                        tokens: entry.tokens.clone(),
                        text: question[tokens[i].start..tokens[i + n - 1].end].to_string(),
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        mentions
    }

    /// Draws a same-type entry whose surface differs (case-folded) from
    /// `exclude`. Fails when the type has fewer than two entries or no
    /// eligible one.
    pub fn sample_replacement<R: Rng + ?Sized>(
        &self,
        entity_type: EntityType,
        exclude: &str,
        rng: &mut R,
    ) -> Result<&EntityEntry, ReplacementSkip> {
        let Some(bucket) = self.by_type.get(&entity_type).filter(|b| b.len() >= 2) else {
            return Err(ReplacementSkip::TooFewOfType(entity_type));
        };
        let exclude = text::fold_key(exclude);
        let eligible: Vec<usize> =
            bucket.iter().copied().filter(|&i| self.entries[i].tokens.join(" ") != exclude).collect();
        if eligible.is_empty() {
            return Err(ReplacementSkip::NoEligible(entity_type));
        }
        Ok(&self.entries[eligible[rng.gen_range(0..eligible.len())]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ReplacementSkip {
    #[error("fewer than two catalog entries of type {0}")]
    TooFewOfType(EntityType),
    #[error("no {0} entry differs from the excluded surface")]
    NoEligible(EntityType),
}

/// A catalog hit inside a question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    /// Token index range.
    pub span: Range<usize>,
    /// Byte range in the question text.
    pub bytes: Range<usize>,
    pub entity_type: EntityType,
    /// Matched (folded) tokens, equal to the catalog entry's tokens.
    pub tokens: Vec<String>,
    /// The mention as written in the question.
    pub text: String,
}

/// First and last name tokens used by the partial-entity generator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameLexicon {
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
}

impl NameLexicon {
    /// Builds from one-token-per-line lists; tokens are folded, sorted and deduplicated.
    pub fn from_lists(first: &str, last: &str) -> Self {
        NameLexicon { first_names: Self::collect(first), last_names: Self::collect(last) }
    }

    fn collect(list: &str) -> Vec<String> {
        let set: BTreeSet<String> = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.chars().flat_map(char::to_lowercase).collect())
            .collect();
        set.into_iter().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.first_names.is_empty() && self.last_names.is_empty()
    }
}
