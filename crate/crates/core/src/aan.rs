//! Choosing "a" or "an" from the word that follows.
//!
//! Decisions come from a character trie of lowercase prefixes; the longest
//! prefix of the word that carries a rule wins. Short all-caps tokens that
//! cannot be pronounced as a word ("NIH", "FBI") are read letter by letter,
//! so only the name of their first letter matters.
//!
//! Rule file: one `prefix<TAB>a|an` per line, `#` comments allowed. The
//! line with an empty prefix sets the default and is mandatory.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Indefinite {
    A,
    An,
}

impl Indefinite {
    pub fn as_str(self) -> &'static str {
        match self {
            Indefinite::A => "a",
            Indefinite::An => "an",
        }
    }

    /// Surface form, capitalized when it opens a sentence.
    pub fn surface(self, sentence_initial: bool) -> &'static str {
        match (self, sentence_initial) {
            (Indefinite::A, false) => "a",
            (Indefinite::A, true) => "A",
            (Indefinite::An, false) => "an",
            (Indefinite::An, true) => "An",
        }
    }
}

impl fmt::Display for Indefinite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct TrieNode {
    decision: Option<Indefinite>,
    children: BTreeMap<char, TrieNode>,
}

/// Why a word got its article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    /// Longest rule prefix that matched (possibly empty: the default).
    Prefix(String),
    /// Spelled-out acronym; the first letter's name decided.
    Acronym(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AAnTrie {
    root: TrieNode,
}

const AN_LETTER_NAMES: &[char] = &['A', 'E', 'F', 'H', 'I', 'L', 'M', 'N', 'O', 'R', 'S', 'X'];

fn is_vowel(c: char) -> bool {
    matches!(c, 'A' | 'E' | 'I' | 'O' | 'U')
}

/// All-caps token of 2 to 5 letters.
pub fn is_acronym(word: &str) -> bool {
    let n = word.chars().count();
    (2..=5).contains(&n) && word.chars().all(|c| c.is_ascii_uppercase())
}

/// An acronym reads as a word when it is at least four letters long,
/// contains a vowel, and never runs three consonants or three vowels in a
/// row ("NATO", "NASA", "OPEC"). Anything else is spelled out ("NIH", "FBI").
pub fn is_pronounceable(acronym: &str) -> bool {
    let chars: Vec<char> = acronym.chars().collect();
    if chars.len() < 4 || !chars.iter().any(|&c| is_vowel(c)) {
        return false;
    }
    chars.windows(3).all(|w| {
        let v: Vec<bool> = w.iter().map(|&c| is_vowel(c)).collect();
        !(v[0] == v[1] && v[1] == v[2])
    })
}

pub fn letter_name_article(letter: char) -> Indefinite {
    if AN_LETTER_NAMES.contains(&letter.to_ascii_uppercase()) {
        Indefinite::An
    } else {
        Indefinite::A
    }
}

impl AAnTrie {
    pub fn insert(&mut self, prefix: &str, decision: Indefinite) {
        let mut node = &mut self.root;
        for c in prefix.chars() {
            node = node.children.entry(c).or_default();
        }
        node.decision = Some(decision);
    }

    /// Longest rule prefix of `word` (lowercased) and its decision.
    pub fn longest_match(&self, word: &str) -> (String, Indefinite) {
        let lower = word.to_lowercase();
        let mut node = &self.root;
        let mut best = (0, self.root.decision.expect("root carries the default rule"));
        for (i, c) in lower.char_indices() {
            match node.children.get(&c) {
                Some(child) => {
                    node = child;
                    if let Some(d) = node.decision {
                        best = (i + c.len_utf8(), d);
                    }
                }
                None => break,
            }
        }
        (lower[..best.0].to_string(), best.1)
    }

    pub fn explain(&self, word: &str) -> (Indefinite, Reason) {
        if is_acronym(word) && !is_pronounceable(word) {
            let first = word.chars().next().expect("acronyms are non-empty");
            return (letter_name_article(first), Reason::Acronym(first));
        }
        let (prefix, decision) = self.longest_match(word);
        (decision, Reason::Prefix(prefix))
    }

    pub fn select(&self, following_word: &str) -> Indefinite {
        self.explain(following_word).0
    }

    /// The rule set bundled with the library.
    pub fn shipped() -> &'static AAnTrie {
        static SHIPPED: LazyLock<AAnTrie> =
            LazyLock::new(|| load_rules(include_str!("../resources/aan_rules.tsv")).expect("bundled rules parse"));
        &SHIPPED
    }
}

pub fn select_a_an(trie: &AAnTrie, following_word: &str) -> Indefinite {
    trie.select(following_word)
}

/// Parses a rule file. Later lines override earlier lines with the same prefix.
pub fn load_rules(text: &str) -> Result<AAnTrie, ParseError> {
    let mut trie = AAnTrie { root: TrieNode::default() };
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let (prefix, decision) =
            raw.split_once('\t').ok_or_else(|| ParseError::new(n, "rule", "expected prefix<TAB>a|an"))?;
        let decision = match decision.trim() {
            "a" => Indefinite::A,
            "an" => Indefinite::An,
            other => return Err(ParseError::new(n, "decision", format!("expected `a` or `an`, found {other:?}"))),
        };
        if prefix.chars().any(char::is_whitespace) {
            return Err(ParseError::new(n, "prefix", format!("prefix contains whitespace: {prefix:?}")));
        }
        trie.insert(&prefix.to_lowercase(), decision);
    }
    if trie.root.decision.is_none() {
        return Err(ParseError::new(0, "default", "no default rule (line with an empty prefix)"));
    }
    Ok(trie)
}
