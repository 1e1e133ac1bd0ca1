//! One decision tree per frequent head noun, with "the" as the fallback.
//!
//! Model file layout (one s-expression per line, streamable):
//!
//! ```text
//! ;; artsel forest
//! (forest (version 1) (min-head-count 25) (min-feature-count 4) (purity 0.98) (min-lexical 2) (max-trees none) (prior 672 328) (trees 2))
//! (tree "president" 1420 (node (RIGHT1 LEXICAL "ago") (present (leaf A_AN 0 40)) (absent (leaf THE 700 10))))
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::corpus::NounPhraseInstance;
use crate::dtree::{train_tree, DecisionTree, TreeConfig};
use crate::error::{ParseError, Result};
use crate::features::{admitted_lexical, featurize, Example, FeatureId, FeatureKind};
use crate::label::{ArticleLabel, LabelDistribution};
use crate::sexpr::{self, write_quoted, Sexp};

pub const FALLBACK: ArticleLabel = ArticleLabel::The;
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// Heads with fewer training instances get no tree.
    pub min_head_count: usize,
    /// Keep only the most frequent heads.
    pub max_trees: Option<usize>,
    /// A lexical feature must occur this often in the database to be used.
    pub min_lexical_occurrences: usize,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { min_head_count: 25, max_trees: None, min_lexical_occurrences: 2, tree: TreeConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadModel {
    /// Training instances with this head.
    pub instances: usize,
    pub tree: DecisionTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeForest {
    /// Keyed by lowercased head surface.
    pub trees: BTreeMap<String, HeadModel>,
    /// Label counts over the whole training set; the fallback's confidence.
    pub prior: LabelDistribution,
    pub config: ForestConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: ArticleLabel,
    pub confidence: f64,
    /// Whether a head tree made the decision.
    pub covered: bool,
}

/// Anything that can decide the article for an instance.
pub trait ArticleClassifier {
    fn classify(&self, instance: &NounPhraseInstance) -> Classification;
}

struct HeadGroup<'a> {
    key: String,
    examples: Vec<&'a BTreeSet<FeatureId>>,
    labels: Vec<ArticleLabel>,
}

impl TreeForest {
    /// A forest with no trees: everything falls back to "the".
    pub fn fallback_only(prior: LabelDistribution, config: ForestConfig) -> Self {
        TreeForest { trees: BTreeMap::new(), prior, config }
    }

    pub fn prior_confidence(&self) -> f64 {
        self.prior.q().unwrap_or(0.5)
    }

    pub fn is_covered(&self, instance: &NounPhraseInstance) -> bool {
        self.trees.contains_key(&instance.head_key())
    }

    pub fn total_questions(&self) -> usize {
        self.trees.values().map(|m| m.tree.question_count()).sum()
    }

    pub fn coverage(&self, instances: &[NounPhraseInstance]) -> CoverageReport {
        coverage(self, instances)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(";; artsel forest\n");
        let c = &self.config;
        let max_trees = c.max_trees.map_or("none".to_string(), |m| m.to_string());
        let _ = writeln!(
            out,
            "(forest (version {FORMAT_VERSION}) (min-head-count {}) (min-feature-count {}) (purity {}) (min-lexical {}) (max-trees {}) (prior {} {}) (trees {}))",
            c.min_head_count,
            c.tree.min_feature_count,
            c.tree.purity,
            c.min_lexical_occurrences,
            max_trees,
            self.prior.count_the,
            self.prior.count_a_an,
            self.trees.len()
        );
        for (key, model) in &self.trees {
            out.push_str("(tree ");
            write_quoted(&mut out, key);
            let _ = write!(out, " {} ", model.instances);
            model.tree.write_sexpr(&mut out);
            out.push_str(")\n");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        Self::read(text.as_bytes()).map_err(|e| match e {
            crate::Error::Parse(p) => p,
            other => ParseError::new(0, "forest", other.to_string()),
        })
    }

    /// Streams a model file line by line.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut header: Option<(ForestConfig, LabelDistribution, usize)> = None;
        let mut trees = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(';') {
                continue;
            }
            let expr = sexpr::parse(trimmed).map_err(|e| ParseError::new(n, "forest", e.to_string()))?;
            let items = expr.as_list().unwrap_or_default();
            match items.first().and_then(Sexp::as_atom) {
                Some("forest") if header.is_none() => header = Some(parse_header(&items[1..], n)?),
                Some("tree") if header.is_some() => {
                    if items.len() != 4 {
                        return Err(ParseError::new(n, "tree", "expected (tree \"head\" count TREE)").into());
                    }
                    let key =
                        items[1].as_str().ok_or_else(|| ParseError::new(n, "head", "expected a quoted head key"))?;
                    let instances = items[2]
                        .as_atom()
                        .and_then(|a| a.parse().ok())
                        .ok_or_else(|| ParseError::new(n, "count", "expected an instance count"))?;
                    let tree = DecisionTree::from_sexp(&items[3], n)?;
                    trees.insert(key.to_string(), HeadModel { instances, tree });
                }
                _ => {
                    let what =
                        if header.is_none() { "expected the (forest ...) header" } else { "expected (tree ...)" };
                    return Err(ParseError::new(n, "forest", what).into());
                }
            }
        }
        let (config, prior, expected) = header.ok_or_else(|| ParseError::new(0, "forest", "missing header"))?;
        if trees.len() != expected {
            return Err(ParseError::new(
                0,
                "forest",
                format!("header announces {expected} trees, found {}", trees.len()),
            )
            .into());
        }
        Ok(TreeForest { trees, prior, config })
    }
}

fn parse_header(fields: &[Sexp], line: usize) -> Result<(ForestConfig, LabelDistribution, usize), ParseError> {
    let mut config = ForestConfig::default();
    let mut prior = None;
    let mut trees = None;
    let mut version = None;
    for field in fields {
        let err = |msg: String| ParseError::new(line, "header", msg);
        let items = field.as_list().ok_or_else(|| err(format!("expected (name value), found {field}")))?;
        let name = items.first().and_then(Sexp::as_atom).unwrap_or_default();
        let num = |i: usize| -> Result<u64, ParseError> {
            items
                .get(i)
                .and_then(Sexp::as_atom)
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| err(format!("bad value for {name}")))
        };
        match name {
            "version" => version = Some(num(1)?),
            "min-head-count" => config.min_head_count = num(1)? as usize,
            "min-feature-count" => config.tree.min_feature_count = num(1)?,
            "min-lexical" => config.min_lexical_occurrences = num(1)? as usize,
            "purity" => {
                config.tree.purity = items
                    .get(1)
                    .and_then(Sexp::as_atom)
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| err("bad value for purity".into()))?
            }
            "max-trees" => {
                config.max_trees = match items.get(1).and_then(Sexp::as_atom) {
                    Some("none") => None,
                    _ => Some(num(1)? as usize),
                }
            }
            "prior" => prior = Some(LabelDistribution::new(num(1)?, num(2)?)),
            "trees" => trees = Some(num(1)? as usize),
            other => return Err(err(format!("unknown header field `{other}`"))),
        }
    }
    match version {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(ParseError::new(line, "version", format!("unsupported version {v}"))),
        None => return Err(ParseError::new(line, "version", "missing")),
    }
    Ok((
        config,
        prior.ok_or_else(|| ParseError::new(line, "prior", "missing"))?,
        trees.ok_or_else(|| ParseError::new(line, "trees", "missing"))?,
    ))
}

impl ArticleClassifier for TreeForest {
    fn classify(&self, instance: &NounPhraseInstance) -> Classification {
        match self.trees.get(&instance.head_key()) {
            Some(model) => {
                let features = featurize(instance);
                let p = model.tree.predict(&features);
                Classification { label: p.label, confidence: p.confidence, covered: true }
            }
            None => Classification { label: FALLBACK, confidence: self.prior_confidence(), covered: false },
        }
    }
}

/// Trains one tree per head noun with at least `min_head_count` labeled
/// instances, most frequent first, up to `max_trees`. Unlabeled
/// (placeholder) instances are ignored.
pub fn train_forest(database: &[NounPhraseInstance], config: &ForestConfig) -> TreeForest {
    let labeled: Vec<(&NounPhraseInstance, ArticleLabel)> =
        database.iter().filter_map(|i| i.label().map(|l| (i, l))).collect();
    let prior = LabelDistribution::from_labels(labeled.iter().map(|(_, l)| l));

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (inst, _) in &labeled {
        *counts.entry(inst.head_key()).or_default() += 1;
    }
    let mut heads: Vec<(String, usize)> =
        counts.into_iter().filter(|&(_, n)| n >= config.min_head_count.max(1)).collect();
    heads.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if let Some(max) = config.max_trees {
        heads.truncate(max);
    }
    if heads.is_empty() {
        return TreeForest::fallback_only(prior, *config);
    }

    let feature_sets: Vec<BTreeSet<FeatureId>> = labeled.iter().map(|(i, _)| featurize(i)).collect();
    let admitted: HashSet<FeatureId> = admitted_lexical(&feature_sets, config.min_lexical_occurrences);

    let slot_of: BTreeMap<&str, usize> = heads.iter().enumerate().map(|(i, (k, _))| (k.as_str(), i)).collect();
    let mut groups: Vec<HeadGroup> =
        heads.iter().map(|(k, _)| HeadGroup { key: k.clone(), examples: Vec::new(), labels: Vec::new() }).collect();
    for ((inst, label), features) in labeled.iter().zip(&feature_sets) {
        if let Some(&g) = slot_of.get(inst.head_key().as_str()) {
            groups[g].examples.push(features);
            groups[g].labels.push(*label);
        }
    }

    let train_group = |g: &HeadGroup| -> (String, HeadModel) {
        let examples: Vec<Example> = g
            .examples
            .iter()
            .zip(&g.labels)
            .map(|(features, &label)| Example {
                features: features
                    .iter()
                    .filter(|f| f.kind != FeatureKind::Lexical || admitted.contains(*f))
                    .cloned()
                    .collect(),
                label,
            })
            .collect();
        let tree = train_tree(&examples, &config.tree);
        (g.key.clone(), HeadModel { instances: examples.len(), tree })
    };

    #[cfg(feature = "parallel")]
    let trained: Vec<(String, HeadModel)> = {
        use rayon::prelude::*;
        groups.par_iter().map(train_group).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trained: Vec<(String, HeadModel)> = groups.iter().map(train_group).collect();

    TreeForest { trees: trained.into_iter().collect(), prior, config: *config }
}

/// Exact counts behind a coverage evaluation; the fractions are derived.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCounts {
    pub covered_total: u64,
    pub covered_correct: u64,
    pub fallback_total: u64,
    pub fallback_correct: u64,
}

impl CoverageCounts {
    pub fn record(&mut self, covered: bool, correct: bool) {
        if covered {
            self.covered_total += 1;
            self.covered_correct += correct as u64;
        } else {
            self.fallback_total += 1;
            self.fallback_correct += correct as u64;
        }
    }

    pub fn total(&self) -> u64 {
        self.covered_total + self.fallback_total
    }

    pub fn report(&self) -> CoverageReport {
        let frac = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        CoverageReport {
            counts: *self,
            covered_fraction: frac(self.covered_total, self.total()),
            covered_accuracy: frac(self.covered_correct, self.covered_total),
            fallback_accuracy: frac(self.fallback_correct, self.fallback_total),
            overall_accuracy: frac(self.covered_correct + self.fallback_correct, self.total()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub counts: CoverageCounts,
    pub covered_fraction: f64,
    pub covered_accuracy: f64,
    pub fallback_accuracy: f64,
    pub overall_accuracy: f64,
}

/// Splits accuracy on labeled instances into the tree-covered part and the
/// fallback part. Unlabeled instances are ignored.
pub fn coverage(classifier: &TreeForest, instances: &[NounPhraseInstance]) -> CoverageReport {
    let mut counts = CoverageCounts::default();
    for inst in instances {
        let Some(gold) = inst.label() else { continue };
        let c = classifier.classify(inst);
        counts.record(c.covered, c.label == gold);
    }
    counts.report()
}
