//! Binary features over noun-phrase instances and the feature → instance index.
//!
//! A feature is a `(slot, kind, value)` triple. Lexical features test the
//! lowercased word in a slot; abstract features test a coarse word class
//! assigned by [`morph_analyze`] from suffix rules and small lexicons, so no
//! part-of-speech tagger is needed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_anchor_surface, NounPhraseInstance, SENTINEL};
use crate::label::{ArticleLabel, LabelDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Left2,
    Left1,
    Premod,
    Head,
    Right1,
    Right2,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::Left2, Slot::Left1, Slot::Premod, Slot::Head, Slot::Right1, Slot::Right2];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Left2 => "LEFT2",
            Slot::Left1 => "LEFT1",
            Slot::Premod => "PREMOD",
            Slot::Head => "HEAD",
            Slot::Right1 => "RIGHT1",
            Slot::Right2 => "RIGHT2",
        }
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slot::ALL.into_iter().find(|slot| slot.as_str() == s).ok_or_else(|| format!("unknown slot `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    Lexical,
    Abstract,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Lexical => "LEXICAL",
            FeatureKind::Abstract => "ABSTRACT",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LEXICAL" => Ok(FeatureKind::Lexical),
            "ABSTRACT" => Ok(FeatureKind::Abstract),
            other => Err(format!("unknown feature kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AbstractTag {
    Plural,
    PastTenseVerb,
    SuperlativeAdj,
    MassNoun,
    Number,
    Capitalized,
    Punctuation,
    Sentinel,
}

impl AbstractTag {
    pub const ALL: [AbstractTag; 8] = [
        AbstractTag::Plural,
        AbstractTag::PastTenseVerb,
        AbstractTag::SuperlativeAdj,
        AbstractTag::MassNoun,
        AbstractTag::Number,
        AbstractTag::Capitalized,
        AbstractTag::Punctuation,
        AbstractTag::Sentinel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AbstractTag::Plural => "PLURAL",
            AbstractTag::PastTenseVerb => "PAST_TENSE_VERB",
            AbstractTag::SuperlativeAdj => "SUPERLATIVE_ADJ",
            AbstractTag::MassNoun => "MASS_NOUN",
            AbstractTag::Number => "NUMBER",
            AbstractTag::Capitalized => "CAPITALIZED",
            AbstractTag::Punctuation => "PUNCTUATION",
            AbstractTag::Sentinel => "SENTINEL",
        }
    }
}

/// A binary predicate over an instance. Ordering is slot, then kind, then
/// value, and is the tie-break order used by the tree builder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId {
    pub slot: Slot,
    pub kind: FeatureKind,
    pub value: String,
}

impl FeatureId {
    pub fn lexical(slot: Slot, word: &str) -> Self {
        FeatureId { slot, kind: FeatureKind::Lexical, value: word.to_lowercase() }
    }

    pub fn abstract_tag(slot: Slot, tag: AbstractTag) -> Self {
        FeatureId { slot, kind: FeatureKind::Abstract, value: tag.as_str().to_string() }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}={}", self.slot.as_str(), self.kind.as_str(), self.value)
    }
}

fn lexicon(src: &'static str) -> HashSet<&'static str> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
}

static MASS_NOUNS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| lexicon(include_str!("../resources/mass_nouns.txt")));
static IRREGULAR_VERBS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| lexicon(include_str!("../resources/irregular_verbs.txt")));
static THIRD_PERSON_VERBS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| lexicon(include_str!("../resources/third_person_verbs.txt")));

const NOT_PAST_ED: &[&str] = &[
    "bed", "bleed", "breed", "creed", "deed", "feed", "fred", "greed", "hundred", "indeed", "kindred", "need",
    "proceed", "red", "reed", "seed", "shed", "sled", "speed", "steed", "succeed", "weed",
];

const NOT_SUPERLATIVE_EST: &[&str] = &[
    "arrest",
    "attest",
    "behest",
    "bequest",
    "chest",
    "conquest",
    "contest",
    "crest",
    "detest",
    "digest",
    "divest",
    "earnest",
    "forest",
    "guest",
    "harvest",
    "honest",
    "inquest",
    "interest",
    "invest",
    "manifest",
    "midwest",
    "modest",
    "nest",
    "northwest",
    "pest",
    "protest",
    "quest",
    "request",
    "rest",
    "southwest",
    "suggest",
    "tempest",
    "test",
    "unrest",
    "vest",
    "west",
    "zest",
];

const NOT_PLURAL_S: &[&str] = &[
    "always",
    "as",
    "besides",
    "does",
    "goes",
    "has",
    "hers",
    "his",
    "its",
    "news",
    "ours",
    "perhaps",
    "series",
    "sometimes",
    "species",
    "theirs",
    "thus",
    "towards",
    "was",
    "whereas",
    "yes",
    "yours",
];

const SUPERLATIVE_WORDS: &[&str] = &["best", "least", "most", "worst"];

pub fn is_punctuation(surface: &str) -> bool {
    !surface.is_empty() && !surface.chars().any(char::is_alphanumeric)
}

pub fn is_number(surface: &str) -> bool {
    surface.chars().any(|c| c.is_ascii_digit()) && surface.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

/// True for words whose form marks them as a finite or participial verb:
/// past tense, known third-person forms, or known irregular forms.
pub fn is_verb_form(surface: &str) -> bool {
    let lower = surface.to_lowercase();
    is_past_tense(&lower) || THIRD_PERSON_VERBS.contains(lower.as_str())
}

fn is_past_tense(lower: &str) -> bool {
    if IRREGULAR_VERBS.contains(lower) {
        return true;
    }
    lower.len() >= 4
        && lower.ends_with("ed")
        && lower.chars().all(|c| c.is_alphabetic() || c == '-')
        && !NOT_PAST_ED.contains(&lower)
}

fn is_plural(lower: &str) -> bool {
    lower.len() >= 3
        && lower.ends_with('s')
        && !lower.ends_with("ss")
        && !lower.ends_with("us")
        && !lower.ends_with("is")
        && !lower.ends_with("'s")
        && lower.chars().all(|c| c.is_alphabetic() || c == '-')
        && !NOT_PLURAL_S.contains(&lower)
        && !MASS_NOUNS.contains(lower)
        && !THIRD_PERSON_VERBS.contains(lower)
}

fn is_superlative(lower: &str) -> bool {
    SUPERLATIVE_WORDS.contains(&lower)
        || (lower.len() >= 5
            && lower.ends_with("est")
            && lower.chars().all(char::is_alphabetic)
            && !NOT_SUPERLATIVE_EST.contains(&lower))
}

/// Abstract tags of a word that is not in sentence-initial position.
pub fn morph_analyze(surface: &str) -> BTreeSet<AbstractTag> {
    morph_analyze_at(surface, false)
}

/// Abstract tags of a word; `sentence_initial` suppresses CAPITALIZED.
pub fn morph_analyze_at(surface: &str, sentence_initial: bool) -> BTreeSet<AbstractTag> {
    let mut tags = BTreeSet::new();
    if surface == SENTINEL {
        tags.insert(AbstractTag::Sentinel);
        return tags;
    }
    if is_punctuation(surface) {
        tags.insert(AbstractTag::Punctuation);
        return tags;
    }
    if is_number(surface) {
        tags.insert(AbstractTag::Number);
        return tags;
    }
    let lower = surface.to_lowercase();
    if is_plural(&lower) {
        tags.insert(AbstractTag::Plural);
    }
    if is_past_tense(&lower) {
        tags.insert(AbstractTag::PastTenseVerb);
    }
    if is_superlative(&lower) {
        tags.insert(AbstractTag::SuperlativeAdj);
    }
    if MASS_NOUNS.contains(lower.as_str()) {
        tags.insert(AbstractTag::MassNoun);
    }
    if !sentence_initial && surface.chars().next().is_some_and(char::is_uppercase) {
        tags.insert(AbstractTag::Capitalized);
    }
    tags
}

/// Lexical value for a context word. Articles and placeholders collapse to
/// `???`: at apply time every neighbouring article has been removed.
fn context_value(surface: &str) -> String {
    if is_anchor_surface(surface) {
        crate::corpus::PLACEHOLDER.to_string()
    } else {
        surface.to_lowercase()
    }
}

fn is_terminator(surface: &str) -> bool {
    matches!(surface, "." | "!" | "?")
}

fn add_word(out: &mut BTreeSet<FeatureId>, slot: Slot, surface: &str, sentence_initial: bool) {
    if surface != SENTINEL {
        out.insert(FeatureId { slot, kind: FeatureKind::Lexical, value: context_value(surface) });
    }
    if is_anchor_surface(surface) {
        return;
    }
    for tag in morph_analyze_at(surface, sentence_initial) {
        out.insert(FeatureId::abstract_tag(slot, tag));
    }
}

/// The feature set of an instance.
pub fn featurize(instance: &NounPhraseInstance) -> BTreeSet<FeatureId> {
    let mut out = BTreeSet::new();
    let [l2, l1] = &instance.left;
    let [r1, r2] = &instance.right;
    add_word(&mut out, Slot::Left2, l2, false);
    add_word(&mut out, Slot::Left1, l1, l2 == SENTINEL || is_terminator(l2));
    for premod in &instance.premodifiers {
        add_word(&mut out, Slot::Premod, premod, false);
    }
    out.insert(FeatureId::lexical(Slot::Head, &instance.head));
    for tag in morph_analyze(&instance.head) {
        out.insert(FeatureId::abstract_tag(Slot::Head, tag));
    }
    add_word(&mut out, Slot::Right1, r1, false);
    add_word(&mut out, Slot::Right2, r2, is_terminator(r1));
    out
}

/// Lexical features seen more than `min_occurrences - 1` times across a
/// database; the rest are too rare to tell apart from noise.
pub fn admitted_lexical<'a>(
    feature_sets: impl IntoIterator<Item = &'a BTreeSet<FeatureId>>,
    min_occurrences: usize,
) -> HashSet<FeatureId> {
    let mut counts: HashMap<&FeatureId, usize> = HashMap::new();
    for set in feature_sets {
        for f in set.iter().filter(|f| f.kind == FeatureKind::Lexical) {
            *counts.entry(f).or_default() += 1;
        }
    }
    counts.into_iter().filter(|&(_, n)| n >= min_occurrences).map(|(f, _)| f.clone()).collect()
}

/// Per-feature statistics within an index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureEntry {
    pub dist: LabelDistribution,
    /// Ids (positions in the indexed example slice) of instances carrying the feature.
    pub instances: Vec<usize>,
}

impl FeatureEntry {
    pub fn count(&self) -> u64 {
        self.dist.total()
    }
}

/// Inverted index from feature to the instances that carry it, with label counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureIndex<K: Ord = FeatureId> {
    pub entries: BTreeMap<K, FeatureEntry>,
    pub totals: LabelDistribution,
}

impl<K: Ord> Default for FeatureIndex<K> {
    fn default() -> Self {
        FeatureIndex { entries: BTreeMap::new(), totals: LabelDistribution::default() }
    }
}

impl<K: Ord + Clone> FeatureIndex<K> {
    /// Indexes the rows selected by `ids`; each row is a feature list and a label.
    pub fn build<'a, F>(ids: impl IntoIterator<Item = usize>, row: F) -> Self
    where
        K: 'a,
        F: Fn(usize) -> (&'a [K], ArticleLabel),
    {
        let mut index = FeatureIndex::default();
        for id in ids {
            let (features, label) = row(id);
            index.totals.add(label);
            for f in features {
                let entry = index.entries.entry(f.clone()).or_default();
                entry.dist.add(label);
                entry.instances.push(id);
            }
        }
        index
    }

    pub fn get(&self, feature: &K) -> Option<&FeatureEntry> {
        self.entries.get(feature)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only features carried by at least `min_count` instances.
    pub fn prune(mut self, min_count: u64) -> Self {
        self.entries.retain(|_, e| e.count() >= min_count);
        self
    }
}

/// A labeled feature set, the unit the tree builder trains on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    /// Sorted and deduplicated.
    pub features: Vec<FeatureId>,
    pub label: ArticleLabel,
}

impl Example {
    pub fn new(features: impl IntoIterator<Item = FeatureId>, label: ArticleLabel) -> Self {
        let set: BTreeSet<FeatureId> = features.into_iter().collect();
        Example { features: set.into_iter().collect(), label }
    }

    pub fn from_instance(instance: &NounPhraseInstance) -> Option<Self> {
        Some(Example { features: featurize(instance).into_iter().collect(), label: instance.label()? })
    }

    pub fn has(&self, feature: &FeatureId) -> bool {
        self.features.binary_search(feature).is_ok()
    }
}

/// Index over every example; instance ids are positions in `examples`.
pub fn build_index(examples: &[Example]) -> FeatureIndex {
    FeatureIndex::build(0..examples.len(), |i| (examples[i].features.as_slice(), examples[i].label))
}

/// Drops features with fewer than `min_count` instances.
///
/// # Panics
///
/// If `min_count` is zero.
pub fn prune_features(index: FeatureIndex, min_count: u64) -> FeatureIndex {
    assert!(min_count >= 1, "min_count must be at least 1");
    index.prune(min_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(word: &str) -> Vec<AbstractTag> {
        morph_analyze(word).into_iter().collect()
    }

    #[test]
    fn morph_examples() {
        assert_eq!(tags("employs"), vec![]);
        assert_eq!(tags("plants"), vec![AbstractTag::Plural]);
        assert_eq!(tags("1985"), vec![AbstractTag::Number]);
        assert_eq!(tags("16,000"), vec![AbstractTag::Number]);
        assert_eq!(tags("based"), vec![AbstractTag::PastTenseVerb]);
        assert_eq!(tags(SENTINEL), vec![AbstractTag::Sentinel]);
        assert_eq!(tags(","), vec![AbstractTag::Punctuation]);
    }

    #[test]
    fn morph_hand_list() {
        use AbstractTag::*;
        let expected: &[(&str, &[AbstractTag])] = &[
            ("plants", &[Plural]),
            ("losses", &[Plural]),
            ("fasteners", &[Plural]),
            ("nuts", &[Plural]),
            ("bolts", &[Plural]),
            ("closures", &[Plural]),
            ("earnings", &[Plural]),
            ("employees", &[Plural]),
            ("operations", &[Plural]),
            ("pressures", &[Plural]),
            ("people", &[]),
            ("business", &[]),
            ("status", &[]),
            ("analysis", &[]),
            ("its", &[]),
            ("was", &[]),
            ("employs", &[]),
            ("says", &[]),
            ("reflects", &[]),
            ("news", &[MassNoun]),
            ("based", &[PastTenseVerb]),
            ("reduced", &[PastTenseVerb]),
            ("declined", &[PastTenseVerb]),
            ("leased", &[PastTenseVerb]),
            ("said", &[PastTenseVerb]),
            ("took", &[PastTenseVerb]),
            ("written", &[PastTenseVerb]),
            ("need", &[]),
            ("hundred", &[]),
            ("red", &[]),
            ("largest", &[SuperlativeAdj]),
            ("latest", &[SuperlativeAdj]),
            ("biggest", &[SuperlativeAdj]),
            ("most", &[SuperlativeAdj]),
            ("least", &[SuperlativeAdj]),
            ("best", &[SuperlativeAdj]),
            ("interest", &[MassNoun]),
            ("forest", &[]),
            ("request", &[]),
            ("honest", &[]),
            ("equipment", &[MassNoun]),
            ("information", &[MassNoun]),
            ("steel", &[MassNoun]),
            ("price", &[]),
            ("year", &[]),
            ("1985", &[Number]),
            ("3.5", &[Number]),
            ("600", &[Number]),
            ("Comair", &[Capitalized]),
            ("Stelco", &[Capitalized]),
        ];
        assert_eq!(expected.len(), 50);
        for (word, want) in expected {
            assert_eq!(tags(word), want.to_vec(), "tags of {word:?}");
        }
    }

    #[test]
    fn capitalized_suppressed_sentence_initially() {
        assert!(morph_analyze_at("Comair", true).is_empty());
        assert_eq!(
            morph_analyze_at("Plants", false).into_iter().collect::<Vec<_>>(),
            vec![AbstractTag::Plural, AbstractTag::Capitalized]
        );
    }

    fn inst(left: [&str; 2], premods: &[&str], head: &str, right: [&str; 2]) -> NounPhraseInstance {
        NounPhraseInstance {
            left: left.map(String::from),
            article: "???".into(),
            premodifiers: premods.iter().map(|s| s.to_string()).collect(),
            head: head.into(),
            right: right.map(String::from),
            source_position: None,
        }
    }

    #[test]
    fn featurize_disclose_price() {
        let f = featurize(&inst(["to", "disclose"], &[], "price", [".", "Comair"]));
        assert!(f.contains(&FeatureId::lexical(Slot::Left1, "disclose")));
        assert!(f.contains(&FeatureId::lexical(Slot::Head, "price")));
        assert!(f.contains(&FeatureId::lexical(Slot::Right1, ".")));
        assert!(f.contains(&FeatureId::abstract_tag(Slot::Right1, AbstractTag::Punctuation)));
        // "Comair" opens a sentence, so it is not flagged as capitalized.
        assert!(!f.contains(&FeatureId::abstract_tag(Slot::Right2, AbstractTag::Capitalized)));
    }

    #[test]
    fn featurize_minimal_instance() {
        let f = featurize(&inst([SENTINEL, SENTINEL], &[], "price", [SENTINEL, SENTINEL]));
        let mut want: BTreeSet<FeatureId> = [Slot::Left2, Slot::Left1, Slot::Right1, Slot::Right2]
            .into_iter()
            .map(|s| FeatureId::abstract_tag(s, AbstractTag::Sentinel))
            .collect();
        want.insert(FeatureId::lexical(Slot::Head, "price"));
        assert_eq!(f, want);
    }

    #[test]
    fn featurize_premodifier_bag() {
        let f = featurize(&inst(["1985", "."], &["new", "dividend"], "rate", ["is", "payable"]));
        assert!(f.contains(&FeatureId::lexical(Slot::Premod, "new")));
        assert!(f.contains(&FeatureId::lexical(Slot::Premod, "dividend")));
    }

    #[test]
    fn context_articles_collapse_to_placeholder() {
        let f = featurize(&inst(["It", "said"], &["reduced"], "dividend", ["reflects", "the"]));
        assert!(f.contains(&FeatureId::lexical(Slot::Right2, "???")));
        assert!(!f.contains(&FeatureId::lexical(Slot::Right2, "the")));
    }

    #[test]
    fn index_counts() {
        let president = FeatureId::lexical(Slot::Head, "president");
        let examples = vec![
            Example::new([president.clone()], ArticleLabel::The),
            Example::new([president.clone()], ArticleLabel::AAn),
        ];
        let index = build_index(&examples);
        let entry = index.get(&president).unwrap();
        assert_eq!(entry.count(), 2);
        assert_eq!(entry.dist, LabelDistribution::new(1, 1));
        assert_eq!(entry.instances, vec![0, 1]);

        let empty = build_index(&[]);
        assert!(empty.is_empty());
        assert_eq!(empty.totals.total(), 0);
    }

    #[test]
    fn prune_boundary() {
        let f = FeatureId::lexical(Slot::Left1, "triple");
        let g = FeatureId::lexical(Slot::Left1, "ago");
        let mut examples = vec![Example::new([f.clone()], ArticleLabel::The); 3];
        examples.extend(vec![Example::new([g.clone()], ArticleLabel::AAn); 4]);
        let index = build_index(&examples);
        let pruned = prune_features(index.clone(), 4);
        assert!(pruned.get(&f).is_none());
        assert!(pruned.get(&g).is_some());
        assert_eq!(prune_features(index.clone(), 1), index);
    }
}
