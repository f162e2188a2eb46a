//! Phonetic keys and similar-sounding token lookup for simulated ASR errors.
//!
//! The key is a small metaphone-style consonant skeleton:
//!
//! 1. map the leading letter: `c` becomes `k` before `a`/`o`/`u`/a consonant
//!    and `s` before `e`/`i`/`y`; `q` becomes `k`; `x` becomes `ks`; `ph` becomes `f`
//! 2. drop `w`, `y`, `h` unless word-initial
//! 3. collapse doubled letters
//! 4. drop vowels except a word-initial one
//! 5. uppercase
//!
//! Unlike Soundex the first letter is not kept verbatim, so `kurt` and `curt`
//! share the key `KRT`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhoneticKey(pub String);

impl PhoneticKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PhoneticKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Latin letters with diacritics fold to their base letter.
fn fold_diacritic(c: char) -> char {
    match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => 'a',
        'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => 'c',
        'ď' | 'đ' => 'd',
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => 'e',
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => 'g',
        'ĥ' | 'ħ' => 'h',
        'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => 'i',
        'ĵ' => 'j',
        'ķ' => 'k',
        'ĺ' | 'ļ' | 'ľ' | 'ŀ' | 'ł' => 'l',
        'ñ' | 'ń' | 'ņ' | 'ň' => 'n',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => 'o',
        'ŕ' | 'ŗ' | 'ř' => 'r',
        'ś' | 'ŝ' | 'ş' | 'š' => 's',
        'ţ' | 'ť' | 'ŧ' => 't',
        'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => 'u',
        'ŵ' => 'w',
        'ý' | 'ÿ' | 'ŷ' => 'y',
        'ź' | 'ż' | 'ž' => 'z',
        other => other,
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Computes the phonetic key of a token. Only letters are considered; a token
/// without letters has an empty key.
pub fn phonetic_key(token: &str) -> PhoneticKey {
    let letters: Vec<char> =
        token.chars().flat_map(char::to_lowercase).map(fold_diacritic).filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return PhoneticKey(String::new());
    }

    // 1. leading letter
    let mut word: Vec<char> = Vec::with_capacity(letters.len() + 1);
    let rest = match (letters[0], letters.get(1).copied()) {
        ('c', Some('e' | 'i' | 'y')) => {
            word.push('s');
            1
        }
        ('c', _) | ('q', _) => {
            word.push('k');
            1
        }
        ('x', _) => {
            word.extend(['k', 's']);
            1
        }
        ('p', Some('h')) => {
            word.push('f');
            2
        }
        (c, _) => {
            word.push(c);
            1
        }
    };
    word.extend_from_slice(&letters[rest..]);

    // 2. w, y, h survive only in first position
    let word: Vec<char> =
        word.iter().enumerate().filter(|&(i, c)| i == 0 || !matches!(c, 'w' | 'y' | 'h')).map(|(_, &c)| c).collect();

    // 3. doubled letters
    let mut collapsed: Vec<char> = Vec::with_capacity(word.len());
    for c in word {
        if collapsed.last() != Some(&c) {
            collapsed.push(c);
        }
    }

    // 4 + 5
    let key = collapsed
        .iter()
        .enumerate()
        .filter(|&(i, &c)| i == 0 || !is_vowel(c))
        .flat_map(|(_, c)| c.to_uppercase())
        .collect();
    PhoneticKey(key)
}

/// Levenshtein distance over characters.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn fold(token: &str) -> String {
    token.trim().chars().flat_map(char::to_lowercase).collect()
}

/// Filter applied to every homophone candidate, local or remote: a single
/// token, spelled differently from the original (case-folded), with the same
/// non-empty phonetic key.
pub fn accept_homophone(original: &str, candidate: &str) -> bool {
    let toks = text::tokenize(candidate);
    if toks.len() != 1 || candidate.trim().contains(char::is_whitespace) {
        return false;
    }
    let original = fold(original);
    let cand = fold(candidate);
    if cand == original {
        return false;
    }
    let key = phonetic_key(&original);
    !key.is_empty() && key == phonetic_key(&cand)
}

/// Vocabulary grouped by phonetic key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhoneticLexicon {
    index: BTreeMap<PhoneticKey, BTreeSet<String>>,
    size: usize,
}

impl PhoneticLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Self::new();
        for w in words {
            lex.insert(w.as_ref());
        }
        lex
    }

    /// Adds a single-token word. Words with no letters or more than one token are ignored.
    pub fn insert(&mut self, word: &str) -> bool {
        let word = fold(word);
        if word.is_empty() || text::tokenize(&word).len() != 1 {
            return false;
        }
        let key = phonetic_key(&word);
        if key.is_empty() {
            return false;
        }
        let added = self.index.entry(key).or_default().insert(word);
        self.size += usize::from(added);
        added
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn words_with_key(&self, key: &PhoneticKey) -> impl Iterator<Item = &str> {
        self.index.get(key).into_iter().flatten().map(String::as_str)
    }

    /// Words with the same key as `token`, spelled differently and within
    /// `max_edit` character edits, sorted by (distance, spelling).
    pub fn homophones(&self, token: &str, max_edit: usize) -> Vec<String> {
        let token = fold(token);
        let key = phonetic_key(&token);
        if key.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<(usize, &String)> = self
            .index
            .get(&key)
            .into_iter()
            .flatten()
            .filter(|w| **w != token)
            .map(|w| (edit_distance(w, &token), w))
            .filter(|&(d, _)| d <= max_edit)
            .collect();
        hits.sort();
        hits.into_iter().map(|(_, w)| w.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomophoneError {
    #[error("homophone service unavailable: {0}")]
    Unavailable(String),
    #[error("malformed homophone response: {0}")]
    Malformed(String),
}

/// Anything that can propose similar-sounding replacements for a token.
pub trait HomophoneSource {
    fn homophones(&self, token: &str) -> Result<Vec<String>, HomophoneError>;
}

/// Local lookup against a [`PhoneticLexicon`].
#[derive(Debug, Clone)]
pub struct LocalHomophones {
    pub lexicon: PhoneticLexicon,
    pub max_edit: usize,
}

impl LocalHomophones {
    pub const DEFAULT_MAX_EDIT: usize = 2;

    pub fn new(lexicon: PhoneticLexicon) -> Self {
        LocalHomophones { lexicon, max_edit: Self::DEFAULT_MAX_EDIT }
    }
}

impl HomophoneSource for LocalHomophones {
    fn homophones(&self, token: &str) -> Result<Vec<String>, HomophoneError> {
        Ok(self.lexicon.homophones(token, self.max_edit))
    }
}

impl<T: HomophoneSource + ?Sized> HomophoneSource for &T {
    fn homophones(&self, token: &str) -> Result<Vec<String>, HomophoneError> {
        (**self).homophones(token)
    }
}
