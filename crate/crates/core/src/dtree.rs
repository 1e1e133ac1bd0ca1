//! Binary decision trees over [`FeatureId`] questions.
//!
//! At every node the builder picks the feature whose split minimizes the
//! weighted child entropy `p·H(q1) + (1−p)·H(q2)`, where `p` is the fraction
//! of node instances carrying the feature and `q1`/`q2` are the THE
//! fractions with and without it. Only the feature's own counts are needed:
//! the complement follows by subtraction from the node totals, so rare
//! lexical features are cheap to score.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::features::{Example, FeatureId, FeatureIndex, FeatureKind, Slot};
use crate::label::{ArticleLabel, LabelDistribution};
use crate::sexpr::{self, write_quoted, Sexp};

/// Minimum entropy reduction, in bits, for a split to be taken.
pub const GAIN_FLOOR: f64 = 1e-9;

fn plogp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Scores closer than this are ties, settled by the smaller key.
pub const SCORE_TIE: f64 = 1e-12;

/// Binary entropy in bits of a THE fraction `q`, with `0·log 0 = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    plogp(q) + plogp(1.0 - q)
}

/// Entropy in bits of a label distribution.
pub fn entropy(dist: LabelDistribution) -> Result<f64> {
    dist.q().map(binary_entropy).ok_or(Error::EmptyDistribution)
}

/// The three numbers that determine a split's score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStatistics {
    /// Fraction of node instances carrying the feature.
    pub p: f64,
    /// THE fraction among instances with the feature.
    pub q1: f64,
    /// THE fraction among instances without it.
    pub q2: f64,
}

impl SplitStatistics {
    /// Statistics from node and feature counts. An empty side gets `q = 0`;
    /// its weight is zero so the value does not matter.
    pub fn from_counts(node: LabelDistribution, feature: LabelDistribution) -> Result<Self> {
        let complement = node.checked_sub(&feature).ok_or(Error::FeatureExceedsNode {
            node_the: node.count_the,
            node_a_an: node.count_a_an,
            feature_the: feature.count_the,
            feature_a_an: feature.count_a_an,
        })?;
        let n = node.total();
        if n == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(SplitStatistics {
            p: feature.total() as f64 / n as f64,
            q1: feature.q().unwrap_or(0.0),
            q2: complement.q().unwrap_or(0.0),
        })
    }
}

/// Weighted child entropy of a split.
pub fn split_score(stats: SplitStatistics) -> f64 {
    let present = if stats.p > 0.0 { stats.p * binary_entropy(stats.q1) } else { 0.0 };
    let absent = if stats.p < 1.0 { (1.0 - stats.p) * binary_entropy(stats.q2) } else { 0.0 };
    present + absent
}

/// Split score from the node's and the feature's label counts alone.
pub fn sparse_split_score(node: LabelDistribution, feature: LabelDistribution) -> Result<f64> {
    SplitStatistics::from_counts(node, feature).map(split_score)
}

/// The best split in an index already restricted to a node's instances:
/// lowest score, then lowest key, and only if it beats the node's entropy
/// by at least [`GAIN_FLOOR`].
pub fn best_split<K: Ord + Clone>(index: &FeatureIndex<K>) -> Option<(K, f64)> {
    let parent = entropy(index.totals).ok()?;
    let mut best: Option<(&K, f64)> = None;
    for (key, entry) in &index.entries {
        let Ok(score) = sparse_split_score(index.totals, entry.dist) else {
            continue;
        };
        if score >= parent - GAIN_FLOOR {
            continue;
        }
        // Keys iterate in ascending order, so only a clear improvement
        // displaces the smaller key. Mirrored counts such as 3/1 and 1/3
        // score equal in exact arithmetic but can differ in the last bit.
        if best.is_none_or(|(_, s)| score < s - SCORE_TIE) {
            best = Some((key, score));
        }
    }
    best.map(|(k, s)| (k.clone(), s))
}

pub fn choose_split<K: Ord + Clone>(index: &FeatureIndex<K>) -> Option<K> {
    best_split(index).map(|(k, _)| k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Stop when the majority label reaches this fraction of a node.
    pub purity: f64,
    /// Features carried by fewer node instances are not considered.
    pub min_feature_count: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { purity: 0.98, min_feature_count: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecisionTree {
    Leaf { dist: LabelDistribution, label: ArticleLabel },
    Node { feature: FeatureId, present: Box<DecisionTree>, absent: Box<DecisionTree> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ArticleLabel,
    /// Majority fraction of the reached leaf.
    pub confidence: f64,
}

impl DecisionTree {
    pub fn leaf(dist: LabelDistribution) -> Self {
        DecisionTree::Leaf { dist, label: dist.majority() }
    }

    /// Walks down taking the present branch whenever `has` says the feature holds.
    pub fn predict_with(&self, mut has: impl FnMut(&FeatureId) -> bool) -> Prediction {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf { dist, label } => {
                    let confidence = if dist.total() == 0 { 0.5 } else { dist.majority_fraction() };
                    return Prediction { label: *label, confidence };
                }
                DecisionTree::Node { feature, present, absent } => {
                    node = if has(feature) { present } else { absent };
                }
            }
        }
    }

    pub fn predict(&self, features: &BTreeSet<FeatureId>) -> Prediction {
        self.predict_with(|f| features.contains(f))
    }

    /// Number of internal nodes.
    pub fn question_count(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Node { present, absent, .. } => 1 + present.question_count() + absent.question_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 1,
            DecisionTree::Node { present, absent, .. } => present.leaf_count() + absent.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Node { present, absent, .. } => 1 + present.depth().max(absent.depth()),
        }
    }

    /// Single-line `(node FEATURE (present ...) (absent ...))` / `(leaf THE 67 33)`.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    pub fn write_sexpr(&self, out: &mut String) {
        match self {
            DecisionTree::Leaf { dist, label } => {
                let _ = write!(out, "(leaf {} {} {})", label, dist.count_the, dist.count_a_an);
            }
            DecisionTree::Node { feature, present, absent } => {
                let _ = write!(out, "(node ({} {} ", feature.slot.as_str(), feature.kind.as_str());
                write_quoted(out, &feature.value);
                out.push_str(") (present ");
                present.write_sexpr(out);
                out.push_str(") (absent ");
                absent.write_sexpr(out);
                out.push_str("))");
            }
        }
    }

    pub fn parse(text: &str, line: usize) -> Result<Self, ParseError> {
        let expr = sexpr::parse(text).map_err(|e| ParseError::new(line, "tree", e.to_string()))?;
        Self::from_sexp(&expr, line)
    }

    pub fn from_sexp(expr: &Sexp, line: usize) -> Result<Self, ParseError> {
        let err = |field: &str, msg: String| ParseError::new(line, field, msg);
        let items = expr.as_list().ok_or_else(|| err("tree", format!("expected a list, found {expr}")))?;
        match items.first().and_then(Sexp::as_atom) {
            Some("leaf") => {
                if items.len() != 4 {
                    return Err(err("leaf", "expected (leaf LABEL n_the n_a_an)".into()));
                }
                let label: ArticleLabel = items[1]
                    .as_atom()
                    .ok_or_else(|| err("leaf", "expected a label".into()))?
                    .parse()
                    .map_err(|e: String| err("leaf", e))?;
                let count = |e: &Sexp| {
                    e.as_atom()
                        .and_then(|a| a.parse::<u64>().ok())
                        .ok_or_else(|| err("leaf", format!("expected a count, found {e}")))
                };
                let dist = LabelDistribution::new(count(&items[2])?, count(&items[3])?);
                if dist.majority() != label {
                    return Err(err(
                        "leaf",
                        format!("label {label} is not the majority of ({}, {})", dist.count_the, dist.count_a_an),
                    ));
                }
                Ok(DecisionTree::Leaf { dist, label })
            }
            Some("node") => {
                if items.len() != 4 {
                    return Err(err("node", "expected (node FEATURE (present ...) (absent ...))".into()));
                }
                let f = items[1]
                    .as_list()
                    .filter(|f| f.len() == 3)
                    .ok_or_else(|| err("feature", "expected (SLOT KIND \"value\")".into()))?;
                let slot: Slot = f[0].as_atom().unwrap_or_default().parse().map_err(|e: String| err("feature", e))?;
                let kind: FeatureKind =
                    f[1].as_atom().unwrap_or_default().parse().map_err(|e: String| err("feature", e))?;
                let value = f[2].as_str().ok_or_else(|| err("feature", "expected a quoted value".into()))?.to_string();
                let branch = |e: &Sexp, name: &str| -> Result<DecisionTree, ParseError> {
                    let b = e
                        .as_list()
                        .filter(|b| b.len() == 2 && b[0].as_atom() == Some(name))
                        .ok_or_else(|| err(name, format!("expected ({name} TREE)")))?;
                    DecisionTree::from_sexp(&b[1], line)
                };
                Ok(DecisionTree::Node {
                    feature: FeatureId { slot, kind, value },
                    present: Box::new(branch(&items[2], "present")?),
                    absent: Box::new(branch(&items[3], "absent")?),
                })
            }
            _ => Err(err("tree", "expected `leaf` or `node`".into())),
        }
    }
}

struct Grower<'a> {
    rows: Vec<Vec<u32>>,
    labels: Vec<ArticleLabel>,
    vocab: Vec<&'a FeatureId>,
    config: TreeConfig,
}

impl Grower<'_> {
    fn grow(&self, ids: &[usize]) -> DecisionTree {
        let dist = LabelDistribution::from_labels(ids.iter().map(|&i| &self.labels[i]));
        if dist.total() == 0 || dist.majority_fraction() >= self.config.purity {
            return DecisionTree::leaf(dist);
        }
        let index = FeatureIndex::<u32>::build(ids.iter().copied(), |i| (self.rows[i].as_slice(), self.labels[i]))
            .prune(self.config.min_feature_count);
        let Some(feature) = choose_split(&index) else {
            return DecisionTree::leaf(dist);
        };
        let present = &index.entries[&feature].instances;
        let mut absent = Vec::with_capacity(ids.len() - present.len());
        let mut p = present.iter().peekable();
        for &id in ids {
            if p.peek() == Some(&&id) {
                p.next();
            } else {
                absent.push(id);
            }
        }
        let child = |branch: &[usize]| {
            if branch.is_empty() {
                DecisionTree::leaf(dist)
            } else {
                self.grow(branch)
            }
        };
        DecisionTree::Node {
            feature: self.vocab[feature as usize].clone(),
            present: Box::new(child(present)),
            absent: Box::new(child(&absent)),
        }
    }
}

/// Grows a tree on labeled examples.
///
/// Recursion stops when the majority label reaches `config.purity`, when no
/// feature with at least `config.min_feature_count` node instances reduces
/// entropy by [`GAIN_FLOOR`], or when a branch would be empty (it then
/// becomes a leaf with the parent's distribution). An empty input gives a
/// THE leaf with no counts.
pub fn train_tree(examples: &[Example], config: &TreeConfig) -> DecisionTree {
    let vocab_set: BTreeSet<&FeatureId> = examples.iter().flat_map(|e| e.features.iter()).collect();
    let vocab: Vec<&FeatureId> = vocab_set.into_iter().collect();
    let ids: HashMap<&FeatureId, u32> = vocab.iter().enumerate().map(|(i, f)| (*f, i as u32)).collect();
    let rows = examples
        .iter()
        .map(|e| {
            let mut row: Vec<u32> = e.features.iter().map(|f| ids[f]).collect();
            row.sort_unstable();
            row.dedup();
            row
        })
        .collect();
    let grower = Grower { rows, labels: examples.iter().map(|e| e.label).collect(), vocab, config: *config };
    let all: Vec<usize> = (0..examples.len()).collect();
    grower.grow(&all)
}
