//! Tokenization, article-anchored noun-phrase extraction, article stripping
//! and the instance database format.
//!
//! A database record is one line:
//!
//! ```text
//! (("losses" "for") ("the" "fiscal" "year") ("ending" "Oct"))
//! ```
//!
//! i.e. two left-context tokens, the article slot followed by premodifiers
//! and the head, and two right-context tokens. `???` (unquoted) in the
//! article slot marks an unlabeled query. An optional trailing integer
//! records the document offset of the article slot.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, Result};
use crate::features::{is_punctuation, is_verb_form};
use crate::label::ArticleLabel;
use crate::sexpr::{self, write_quoted, Sexp};

/// Context filler outside the document.
pub const SENTINEL: &str = "*NULL*";
/// Marks an article slot whose content is to be decided.
pub const PLACEHOLDER: &str = "???";

const MAX_PREMODIFIERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// 0-based position in the document.
    pub index: usize,
    /// Whether whitespace separated this token from the previous one in the source.
    pub space_before: bool,
}

impl Token {
    pub fn new(surface: impl Into<String>, index: usize) -> Self {
        Token { surface: surface.into(), index, space_before: index > 0 }
    }
}

const ABBREVIATIONS: &[&str] = &[
    "apr.", "aug.", "ave.", "bros.", "co.", "corp.", "dec.", "dept.", "dr.", "e.g.", "etc.", "feb.", "gen.", "gov.",
    "i.e.", "inc.", "jan.", "jr.", "jul.", "jun.", "lt.", "ltd.", "mar.", "messrs.", "mr.", "mrs.", "ms.", "mt.",
    "no.", "nov.", "oct.", "prof.", "rep.", "rev.", "sen.", "sep.", "sept.", "sr.", "st.", "vs.",
];

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Initialisms such as "U.S." or "p.m.": letters separated by periods.
    let body = &lower[..lower.len() - 1];
    body.contains('.') && body.split('.').all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic))
}

const LEADING_SPLIT: &[char] = &['"', '(', '[', '`'];
const TRAILING_SPLIT: &[char] = &[',', '"', ':', ';', '?', '!', ')', ']'];

/// Splits whitespace-delimited chunks further: leading quotes and brackets
/// and trailing `.`, `,`, `"`, `:`, `;`, `?`, `!` and closing brackets
/// become tokens of their own. A final period stays attached to known
/// abbreviations ("Inc.") unless the chunk ends the document.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chunks: Vec<&str> = text.split_whitespace().collect();
    let mut tokens = Vec::new();
    for (ci, chunk) in chunks.iter().enumerate() {
        let last_chunk = ci + 1 == chunks.len();
        let mut space = ci > 0;
        let mut core: &str = chunk;
        let push = |tokens: &mut Vec<Token>, s: &str, space: &mut bool| {
            let index = tokens.len();
            tokens.push(Token { surface: s.to_string(), index, space_before: *space });
            *space = false;
        };
        while core.chars().count() > 1 && core.starts_with(LEADING_SPLIT) {
            let c = core.chars().next().unwrap();
            push(&mut tokens, &core[..c.len_utf8()], &mut space);
            core = &core[c.len_utf8()..];
        }
        let mut trailing: Vec<&str> = Vec::new();
        loop {
            if core.chars().count() <= 1 || is_punctuation(core) {
                break;
            }
            let c = core.chars().last().unwrap();
            let cut = core.len() - c.len_utf8();
            if TRAILING_SPLIT.contains(&c) || (c == '.' && (last_chunk || !is_abbreviation(core))) {
                trailing.push(&core[cut..]);
                core = &core[..cut];
            } else {
                break;
            }
        }
        push(&mut tokens, core, &mut space);
        for t in trailing.into_iter().rev() {
            push(&mut tokens, t, &mut space);
        }
    }
    tokens
}

/// Joins tokens back into text, one space wherever the source had whitespace.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && t.space_before {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

/// Rewrites `text` with the surfaces of `replacement`, which must be a
/// re-spelling of `tokenize(text)` token for token. Whitespace and line
/// breaks are kept as they were.
///
/// # Panics
///
/// If `replacement` has a different length from the tokenization of `text`.
pub fn respell(text: &str, replacement: &[Token]) -> String {
    let original = tokenize(text);
    assert_eq!(original.len(), replacement.len(), "replacement must align with the text's tokens");
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (old, new) in original.iter().zip(replacement) {
        let at = cursor + text[cursor..].find(&old.surface).expect("tokens are substrings in order");
        out.push_str(&text[cursor..at]);
        out.push_str(&new.surface);
        cursor = at + old.surface.len();
    }
    out.push_str(&text[cursor..]);
    out
}

fn is_terminator(s: &str) -> bool {
    matches!(s, "." | "!" | "?")
}

fn is_quote_or_bracket(s: &str) -> bool {
    matches!(s, "\"" | "'" | "`" | "``" | "''" | "(" | ")" | "[" | "]")
}

/// Whether position `i` starts a sentence: it is the first token, or only
/// quotes and brackets separate it from a `.`, `!` or `?`.
pub fn is_sentence_start<S: AsRef<str>>(tokens: &[S], i: usize) -> bool {
    let mut j = i;
    while j > 0 {
        let prev = tokens[j - 1].as_ref();
        if is_terminator(prev) {
            return true;
        }
        if !is_quote_or_bracket(prev) {
            return false;
        }
        j -= 1;
    }
    true
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.surface
    }
}

/// Splits a token sequence into sentences. A closing quote or bracket glued
/// to a sentence terminator stays with that sentence.
pub fn split_sentences(tokens: &[Token]) -> Vec<&[Token]> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < tokens.len() {
        if is_terminator(&tokens[i].surface) {
            let mut end = i + 1;
            while end < tokens.len() && !tokens[end].space_before && is_quote_or_bracket(&tokens[end].surface) {
                end += 1;
            }
            out.push(&tokens[start..end]);
            start = end;
            i = end;
        } else {
            i += 1;
        }
    }
    if start < tokens.len() {
        out.push(&tokens[start..]);
    }
    out
}

/// Lowercase "a", "an", "the", or the placeholder.
pub fn is_anchor_surface(s: &str) -> bool {
    s == PLACEHOLDER || ArticleLabel::from_surface(s).is_some()
}

/// One article decision: its context, the article slot and the core noun phrase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NounPhraseInstance {
    pub left: [String; 2],
    /// Original article surface, or [`PLACEHOLDER`] for an unlabeled query.
    pub article: String,
    pub premodifiers: Vec<String>,
    pub head: String,
    pub right: [String; 2],
    pub source_position: Option<usize>,
}

impl NounPhraseInstance {
    /// `None` for a placeholder query.
    pub fn label(&self) -> Option<ArticleLabel> {
        ArticleLabel::from_surface(&self.article)
    }

    pub fn is_placeholder(&self) -> bool {
        self.article == PLACEHOLDER
    }

    /// Lowercased head surface; the key trees are stored under.
    pub fn head_key(&self) -> String {
        self.head.to_lowercase()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub instances: Vec<NounPhraseInstance>,
    /// Anchors with no following token.
    pub skipped: usize,
}

const STOP_WORDS: &[&str] = &[
    // prepositions
    "about",
    "above",
    "across",
    "after",
    "against",
    "ago",
    "along",
    "among",
    "around",
    "as",
    "at",
    "before",
    "behind",
    "below",
    "beneath",
    "beside",
    "between",
    "beyond",
    "by",
    "despite",
    "down",
    "during",
    "except",
    "for",
    "from",
    "in",
    "inside",
    "into",
    "like",
    "near",
    "of",
    "off",
    "on",
    "onto",
    "out",
    "outside",
    "over",
    "per",
    "since",
    "than",
    "through",
    "throughout",
    "till",
    "to",
    "toward",
    "towards",
    "under",
    "until",
    "up",
    "upon",
    "via",
    "with",
    "within",
    "without",
    // conjunctions and relatives
    "although",
    "and",
    "because",
    "but",
    "how",
    "if",
    "nor",
    "or",
    "so",
    "that",
    "though",
    "what",
    "when",
    "where",
    "whereas",
    "whether",
    "which",
    "while",
    "who",
    "whom",
    "whose",
    "why",
    "yet",
    // determiners and pronouns
    "all",
    "any",
    "both",
    "each",
    "either",
    "every",
    "he",
    "her",
    "him",
    "his",
    "i",
    "it",
    "its",
    "me",
    "my",
    "neither",
    "no",
    "our",
    "she",
    "some",
    "their",
    "them",
    "these",
    "they",
    "this",
    "those",
    "us",
    "we",
    "you",
    "your",
    // auxiliaries, copulas, modals, reporting verbs
    "am",
    "are",
    "be",
    "been",
    "being",
    "can",
    "could",
    "did",
    "do",
    "does",
    "had",
    "has",
    "have",
    "is",
    "may",
    "might",
    "must",
    "said",
    "say",
    "says",
    "shall",
    "should",
    "was",
    "were",
    "will",
    "would",
    // adverbs that cannot sit inside a core noun phrase
    "also",
    "not",
    "now",
    "then",
    "there",
    "too",
    "very",
];

fn is_stop_word(lower: &str) -> bool {
    STOP_WORDS.contains(&lower)
}

/// Whether `tokens[j]` ends a noun phrase that already has at least one word.
fn ends_phrase(tokens: &[&str], j: usize) -> bool {
    let t = tokens[j];
    let lower = t.to_lowercase();
    if is_anchor_surface(t) || is_punctuation(t) || is_stop_word(&lower) || is_verb_form(t) {
        return true;
    }
    let next = tokens.get(j + 1).copied();
    // A word directly before an article takes it as an object: a verb.
    if next.is_some_and(is_anchor_surface) {
        return true;
    }
    // "-ing" words continue the phrase only before another lowercase noun-ish word.
    if lower.len() > 4 && lower.ends_with("ing") {
        let continues = next.is_some_and(|n| {
            n.chars().next().is_some_and(char::is_lowercase)
                && !is_punctuation(n)
                && !is_stop_word(n)
                && !is_verb_form(n)
                && !is_anchor_surface(n)
        });
        return !continues;
    }
    false
}

fn context(tokens: &[&str], i: isize) -> String {
    if i < 0 || i as usize >= tokens.len() {
        SENTINEL.to_string()
    } else {
        tokens[i as usize].to_string()
    }
}

/// Extracts one instance per article or placeholder token.
///
/// The token right after the anchor always joins the phrase; further tokens
/// join until [`ends_phrase`] says stop or four premodifiers have been taken.
/// The last joined token is the head. Context outside the document is
/// filled with [`SENTINEL`].
pub fn extract_instances<S: AsRef<str>>(tokens: &[S]) -> Extraction {
    let words: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut out = Extraction::default();
    for (i, &w) in words.iter().enumerate() {
        if !is_anchor_surface(w) {
            continue;
        }
        if i + 1 >= words.len() {
            out.skipped += 1;
            continue;
        }
        let mut end = i + 2;
        while end < words.len() && end - (i + 1) <= MAX_PREMODIFIERS && !ends_phrase(&words, end) {
            end += 1;
        }
        let head_pos = end - 1;
        let i = i as isize;
        let h = head_pos as isize;
        out.instances.push(NounPhraseInstance {
            left: [context(&words, i - 2), context(&words, i - 1)],
            article: w.to_string(),
            premodifiers: words[i as usize + 1..head_pos].iter().map(|s| s.to_string()).collect(),
            head: words[head_pos].to_string(),
            right: [context(&words, h + 1), context(&words, h + 2)],
            source_position: Some(i as usize),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSlot {
    pub position: usize,
    pub label: ArticleLabel,
    pub surface: String,
}

/// Text with its articles replaced by placeholders, plus what was removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrippedDocument {
    pub tokens: Vec<Token>,
    pub gold: Vec<GoldSlot>,
}

impl StrippedDocument {
    /// Puts the gold surfaces back; the inverse of [`strip_articles`].
    pub fn unstrip(&self) -> Vec<Token> {
        let mut tokens = self.tokens.clone();
        for g in &self.gold {
            tokens[g.position].surface = g.surface.clone();
        }
        tokens
    }
}

pub fn strip_articles(tokens: &[Token]) -> StrippedDocument {
    let mut out = Vec::with_capacity(tokens.len());
    let mut gold = Vec::new();
    for t in tokens {
        let mut t = t.clone();
        if let Some(label) = ArticleLabel::from_surface(&t.surface) {
            gold.push(GoldSlot {
                position: t.index,
                label,
                surface: std::mem::replace(&mut t.surface, PLACEHOLDER.to_string()),
            });
        }
        out.push(t);
    }
    StrippedDocument { tokens: out, gold }
}

// ---------------------------------------------------------------------------
// Database format

fn write_token_list(out: &mut String, tokens: &[&str]) {
    out.push('(');
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write_quoted(out, t);
    }
    out.push(')');
}

/// One database line, without the newline.
pub fn format_record(instance: &NounPhraseInstance) -> String {
    let mut out = String::from("(");
    write_token_list(&mut out, &[&instance.left[0], &instance.left[1]]);
    out.push_str(" (");
    if instance.is_placeholder() {
        out.push_str(PLACEHOLDER);
    } else {
        write_quoted(&mut out, &instance.article);
    }
    for p in &instance.premodifiers {
        out.push(' ');
        write_quoted(&mut out, p);
    }
    out.push(' ');
    write_quoted(&mut out, &instance.head);
    out.push_str(") ");
    write_token_list(&mut out, &[&instance.right[0], &instance.right[1]]);
    if let Some(pos) = instance.source_position {
        let _ = write!(out, " {pos}");
    }
    out.push(')');
    out
}

pub fn write_db(instances: &[NounPhraseInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&format_record(inst));
        out.push('\n');
    }
    out
}

fn pair(expr: &Sexp, line: usize, field: &str) -> Result<[String; 2], ParseError> {
    let items = expr.as_list().ok_or_else(|| ParseError::new(line, field, "expected a list of two quoted tokens"))?;
    if items.len() != 2 {
        return Err(ParseError::new(line, field, format!("expected 2 tokens, found {}", items.len())));
    }
    let get = |e: &Sexp| {
        e.as_str()
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .ok_or_else(|| ParseError::new(line, field, "expected a non-empty quoted token"))
    };
    Ok([get(&items[0])?, get(&items[1])?])
}

/// Parses one database line; `line` is used for error reporting.
pub fn parse_record(text: &str, line: usize) -> Result<NounPhraseInstance, ParseError> {
    let expr = sexpr::parse(text).map_err(|e| ParseError::new(line, "record", e.to_string()))?;
    let items = expr.as_list().ok_or_else(|| ParseError::new(line, "record", "expected a parenthesized record"))?;
    if !(3..=4).contains(&items.len()) {
        return Err(ParseError::new(line, "record", format!("expected 3 or 4 elements, found {}", items.len())));
    }
    let left = pair(&items[0], line, "left")?;
    let right = pair(&items[2], line, "right")?;
    let phrase = items[1].as_list().ok_or_else(|| ParseError::new(line, "phrase", "expected a list"))?;
    if phrase.len() < 2 {
        return Err(ParseError::new(line, "phrase", "expected an article slot and a head"));
    }
    let article = match &phrase[0] {
        Sexp::Atom(a) if a == PLACEHOLDER => PLACEHOLDER.to_string(),
        Sexp::Str(s) if is_anchor_surface(s) => s.clone(),
        other => {
            return Err(ParseError::new(line, "article", format!("expected a/an/the or {PLACEHOLDER}, found {other}")))
        }
    };
    let mut words = Vec::with_capacity(phrase.len() - 1);
    for w in &phrase[1..] {
        match w.as_str() {
            Some(s) if !s.is_empty() => words.push(s.to_string()),
            _ => return Err(ParseError::new(line, "phrase", format!("expected a quoted token, found {w}"))),
        }
    }
    let head = words.pop().expect("phrase has at least one word");
    let source_position = match items.get(3) {
        None => None,
        Some(e) => Some(
            e.as_atom()
                .and_then(|a| a.parse::<usize>().ok())
                .ok_or_else(|| ParseError::new(line, "position", format!("expected an integer, found {e}")))?,
        ),
    };
    Ok(NounPhraseInstance { left, article, premodifiers: words, head, right, source_position })
}

/// Reads a database; blank lines and `;` comment lines are skipped.
pub fn read_db(text: &str) -> Result<Vec<NounPhraseInstance>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        out.push(parse_record(trimmed, i + 1)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Stripped text and gold sidecar

/// Stripped-text file: space-separated tokens, one sentence per line.
pub fn write_stripped_text(tokens: &[Token]) -> String {
    let mut out = String::new();
    for sentence in split_sentences(tokens) {
        let line: Vec<&str> = sentence.iter().map(|t| t.surface.as_str()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a stripped-text file back into one token sequence.
pub fn read_stripped_text(text: &str) -> Vec<Token> {
    text.split_whitespace().enumerate().map(|(i, s)| Token::new(s, i)).collect()
}

/// Gold sidecar: `position<TAB>label<TAB>surface` per slot.
pub fn write_gold(gold: &[GoldSlot]) -> String {
    let mut out = String::new();
    for g in gold {
        let _ = writeln!(out, "{}\t{}\t{}", g.position, g.label, g.surface);
    }
    out
}

pub fn read_gold(text: &str) -> Result<Vec<GoldSlot>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(ParseError::new(n, "gold", format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let position = fields[0]
            .parse()
            .map_err(|_| ParseError::new(n, "position", format!("not an integer: {:?}", fields[0])))?;
        let label = fields[1].parse().map_err(|e: String| ParseError::new(n, "label", e))?;
        out.push(GoldSlot { position, label, surface: fields[2].to_string() });
    }
    Ok(out)
}
