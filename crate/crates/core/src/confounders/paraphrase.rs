//! Paraphrase providers.
//!
//! Two kinds: paraphrases produced elsewhere and imported keyed by question,
//! and a small set of deterministic rewrite templates. Templates match whole
//! questions token by token; `{slot}` captures one or more tokens and is
//! copied into the output exactly as written in the source, so entity
//! mentions survive verbatim.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::text::{self, Token};

pub trait ParaphraseProvider {
    /// A paraphrase of `question`, or `None` when the provider has nothing.
    fn paraphrase(&self, question: &str) -> Option<String>;
}

/// Externally generated paraphrases keyed by the folded question.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportedParaphrases {
    table: BTreeMap<String, String>,
}

impl ImportedParaphrases {
    pub fn new() -> Self {
        Self::default()
    }

    /// First paraphrase for a question wins.
    pub fn insert(&mut self, question: &str, paraphrase: &str) -> bool {
        let key = text::fold_key(question);
        if key.is_empty() || self.table.contains_key(&key) {
            return false;
        }
        self.table.insert(key, text::normalize_whitespace(paraphrase));
        true
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl ParaphraseProvider for ImportedParaphrases {
    fn paraphrase(&self, question: &str) -> Option<String> {
        self.table.get(&text::fold_key(question)).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Word(String),
    Slot(String),
}

/// One rewrite template, e.g. `when was {x} born` -> `What year was {x} born`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pattern: Vec<Part>,
    output: String,
}

impl RewriteRule {
    pub fn new(pattern: &str, output: &str) -> Self {
        let pattern = pattern
            .split_whitespace()
            .map(|w| match w.strip_prefix('{').and_then(|w| w.strip_suffix('}')) {
                Some(name) => Part::Slot(name.into()),
                None => Part::Word(w.chars().flat_map(char::to_lowercase).collect()),
            })
            .collect();
        RewriteRule { pattern, output: output.into() }
    }

    pub fn apply(&self, question: &str) -> Option<String> {
        let tokens = text::tokenize(question);
        let mut bindings = Vec::new();
        if !match_parts(&self.pattern, &tokens, &mut bindings) {
            return None;
        }
        let mut out = self.output.clone();
        for (name, from, to) in bindings {
            let value = &question[tokens[from].start..tokens[to - 1].end];
            out = out.replace(&alloc::format!("{{{name}}}"), value);
        }
        if question.trim_end().ends_with('?') {
            out.push('?');
        }
        Some(out)
    }
}

fn match_parts<'p>(parts: &'p [Part], tokens: &[Token], bindings: &mut Vec<(&'p str, usize, usize)>) -> bool {
    fn go<'p>(parts: &'p [Part], tokens: &[Token], at: usize, bindings: &mut Vec<(&'p str, usize, usize)>) -> bool {
        let Some((head, rest)) = parts.split_first() else {
            return at == tokens.len();
        };
        match head {
            Part::Word(w) => tokens.get(at).is_some_and(|t| t.text == *w) && go(rest, tokens, at + 1, bindings),
            Part::Slot(name) => {
                for end in at + 1..=tokens.len() {
                    bindings.push((name.as_str(), at, end));
                    if go(rest, tokens, end, bindings) {
                        return true;
                    }
                    bindings.pop();
                }
                false
            }
        }
    }
    go(parts, tokens, 0, bindings)
}

/// Ordered rewrite templates; the first that matches wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleParaphraser {
    rules: Vec<RewriteRule>,
}

impl RuleParaphraser {
    pub fn new(rules: Vec<RewriteRule>) -> Self {
        RuleParaphraser { rules }
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }
}

impl Default for RuleParaphraser {
    fn default() -> Self {
        const RULES: &[(&str, &str)] = &[
            ("when was {x} born", "What year was {x} born"),
            ("what year was {x} born", "When was {x} born"),
            ("where was {x} born", "What is the birthplace of {x}"),
            ("what is the birthplace of {x}", "Where was {x} born"),
            ("how old is {x}", "What is the age of {x}"),
            ("what is the age of {x}", "How old is {x}"),
            ("where did {x} go to school", "Which school did {x} attend"),
            ("which school did {x} attend", "Where did {x} go to school"),
            ("when did {x} die", "What year did {x} die"),
            ("what year did {x} die", "When did {x} die"),
            ("who wrote {x}", "Who is the author of {x}"),
            ("who is the author of {x}", "Who wrote {x}"),
            ("did {x} win {y}", "Was {y} won by {x}"),
            ("what was {x} 's {y} like", "What was the {y} of {x} like"),
            ("what is {x} 's {y}", "What is the {y} of {x}"),
            ("what was {x} 's {y}", "What was the {y} of {x}"),
            ("what were {x} 's {y}", "What were the {y} of {x}"),
        ];
        RuleParaphraser::new(RULES.iter().map(|(p, o)| RewriteRule::new(p, o)).collect())
    }
}

impl ParaphraseProvider for RuleParaphraser {
    fn paraphrase(&self, question: &str) -> Option<String> {
        self.rules.iter().find_map(|r| r.apply(question))
    }
}

/// Tries each provider in turn.
#[derive(Default)]
pub struct ParaphraseChain {
    providers: Vec<Box<dyn ParaphraseProvider + Send + Sync>>,
}

impl ParaphraseChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, provider: impl ParaphraseProvider + Send + Sync + 'static) -> Self {
        self.providers.push(Box::new(provider));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }
}

impl ParaphraseProvider for ParaphraseChain {
    fn paraphrase(&self, question: &str) -> Option<String> {
        self.providers.iter().find_map(|p| p.paraphrase(question))
    }
}
