//! Shared tokenizer.
//!
//! Tokens are case-folded runs of alphanumeric characters. An apostrophe or
//! hyphen stays inside a token when it sits between two alphanumerics
//! (`don't`, `jean-paul`), everything else is a boundary and punctuation never
//! becomes a token. A trailing possessive `'s` is split off as its own token so
//! that `Gödel's` still matches the entity `Gödel`.
//!
//! Every token keeps the byte range it came from, which is what lets the
//! generators splice replacements into the original text without disturbing
//! casing or punctuation elsewhere in the question.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

/// A case-folded token and the byte range it occupies in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02bc}')
}

fn is_joiner(c: char) -> bool {
    is_apostrophe(c) || matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

fn fold_into(out: &mut String, c: char) {
    if is_apostrophe(c) {
        out.push('\'');
    } else if matches!(c, '\u{2010}' | '\u{2011}') {
        out.push('-');
    } else {
        out.extend(c.to_lowercase());
    }
}

/// Splits `text` into case-folded tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_joiner(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        push_token(&mut tokens, text, start, end);
        i = j;
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    let raw = &text[start..end];
    let mut folded = String::with_capacity(raw.len());
    for c in raw.chars() {
        fold_into(&mut folded, c);
    }
    // Possessive clitic: "gödel's" -> "gödel" + "'s".
    if folded.len() > 2 && folded.ends_with("'s") {
        let mut it = raw.char_indices().rev();
        let (s_at, _) = it.next().expect("non-empty token");
        let (apos_at, apos) = it.next().expect("token longer than two chars");
        if is_apostrophe(apos) {
            folded.truncate(folded.len() - 2);
            tokens.push(Token { text: folded, start, end: start + apos_at });
            tokens.push(Token { text: String::from("'s"), start: start + apos_at, end: start + s_at + 1 });
            return;
        }
    }
    tokens.push(Token { text: folded, start, end });
}

/// Folded token strings only.
pub fn token_strings(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Case-folded, punctuation-free comparison key: tokens joined by single spaces.
pub fn fold_key(text: &str) -> String {
    let mut key = String::with_capacity(text.len());
    for (i, tok) in tokenize(text).into_iter().enumerate() {
        if i > 0 {
            key.push(' ');
        }
        key.push_str(&tok.text);
    }
    key
}

/// Collapses runs of whitespace to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, part) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

/// Returns the prefix of `text` that ends with its `max_tokens`-th token.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> &str {
    let tokens = tokenize(text);
    if tokens.len() <= max_tokens {
        return text;
    }
    if max_tokens == 0 {
        return "";
    }
    &text[..tokens[max_tokens - 1].end]
}

/// Replaces a byte range of `text`.
pub fn splice(text: &str, range: Range<usize>, replacement: &str) -> String {
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..range.start]);
    out.push_str(replacement);
    out.push_str(&text[range.end..]);
    out
}

/// Re-cases `word` after the shape of `model`: all caps, capitalized, or lower.
pub fn match_case(model: &str, word: &str) -> String {
    let letters: Vec<char> = model.chars().filter(|c| c.is_alphabetic()).collect();
    let all_upper = letters.len() > 1 && letters.iter().all(|c| c.is_uppercase());
    if all_upper {
        return word.chars().flat_map(char::to_uppercase).collect();
    }
    let capitalized = model.chars().next().is_some_and(char::is_uppercase);
    let mut out = String::with_capacity(word.len());
    for (i, c) in word.chars().enumerate() {
        if i == 0 && capitalized {
            out.extend(c.to_uppercase());
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}
