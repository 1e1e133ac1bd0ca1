//! Scoring: the strip-and-restore protocol, baselines, held-out experiments
//! and learning curves.
//!
//! Scoring is unforgiving: a slot counts as a success only when the restored
//! article is the one the author wrote, even where the other article would
//! have been acceptable.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aan::AAnTrie;
use crate::corpus::{extract_instances, is_sentence_start, NounPhraseInstance, StrippedDocument, Token, PLACEHOLDER};
use crate::dtree::{train_tree, TreeConfig};
use crate::error::{Error, Result};
use crate::features::Example;
use crate::forest::{train_forest, ArticleClassifier, CoverageCounts, CoverageReport, ForestConfig, FALLBACK};
use crate::label::{ArticleLabel, LabelDistribution};

/// Gold-vs-predicted label counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub the_as_the: u64,
    pub the_as_a_an: u64,
    pub a_an_as_the: u64,
    pub a_an_as_a_an: u64,
}

impl Confusion {
    pub fn record(&mut self, gold: ArticleLabel, predicted: ArticleLabel) {
        use ArticleLabel::*;
        match (gold, predicted) {
            (The, The) => self.the_as_the += 1,
            (The, AAn) => self.the_as_a_an += 1,
            (AAn, The) => self.a_an_as_the += 1,
            (AAn, AAn) => self.a_an_as_a_an += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.the_as_the + self.the_as_a_an + self.a_an_as_the + self.a_an_as_a_an
    }

    pub fn correct(&self) -> u64 {
        self.the_as_the + self.a_an_as_a_an
    }
}

/// Settings an evaluation was run with, carried in its report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub train_size: Option<usize>,
    pub test_size: Option<usize>,
    pub forest: Option<ForestConfig>,
    pub trees: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub total: u64,
    /// Exact matches with the author's article.
    pub successes: u64,
    pub accuracy: f64,
    /// Matches on the THE vs A_AN class alone ("a" for "an" still counts).
    pub class_successes: u64,
    pub class_accuracy: f64,
    pub confusion: Confusion,
    pub coverage: Option<CoverageReport>,
    pub meta: ExperimentMeta,
}

fn fraction(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl EvaluationReport {
    fn new(confusion: Confusion, successes: u64) -> Self {
        let total = confusion.total();
        EvaluationReport {
            total,
            successes,
            accuracy: fraction(successes, total),
            class_successes: confusion.correct(),
            class_accuracy: fraction(confusion.correct(), total),
            confusion,
            coverage: None,
            meta: ExperimentMeta::default(),
        }
    }

    /// One JSON object, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "articles scored      {}", self.total);
        let _ = writeln!(out, "successes            {}", self.successes);
        let _ = writeln!(out, "accuracy             {}", percent(self.accuracy));
        let _ = writeln!(out, "class accuracy       {}", percent(self.class_accuracy));
        let c = &self.confusion;
        let _ = writeln!(
            out,
            "confusion            THE->THE {}  THE->A_AN {}  A_AN->THE {}  A_AN->A_AN {}",
            c.the_as_the, c.the_as_a_an, c.a_an_as_the, c.a_an_as_a_an
        );
        if let Some(cov) = &self.coverage {
            let _ = writeln!(
                out,
                "coverage             {} ({} of {} instances have a tree)",
                percent(cov.covered_fraction),
                cov.counts.covered_total,
                cov.counts.total()
            );
            let part = |n: u64, acc: f64| if n == 0 { "n/a".to_string() } else { percent(acc) };
            let _ = writeln!(out, "  covered accuracy   {}", part(cov.counts.covered_total, cov.covered_accuracy));
            let _ = writeln!(out, "  fallback accuracy  {}", part(cov.counts.fallback_total, cov.fallback_accuracy));
            let _ = writeln!(out, "  overall accuracy   {}", percent(cov.overall_accuracy));
        }
        let m = &self.meta;
        let mut meta = Vec::new();
        if let Some(s) = m.seed {
            meta.push(format!("seed {s}"));
        }
        if let Some(f) = m.train_fraction {
            meta.push(format!("train fraction {f}"));
        }
        if let (Some(tr), Some(te)) = (m.train_size, m.test_size) {
            meta.push(format!("train/test {tr}/{te}"));
        }
        if let Some(t) = m.trees {
            meta.push(format!("trees {t}"));
        }
        if let Some(f) = &m.forest {
            meta.push(format!(
                "min head count {}  min feature count {}  purity {}",
                f.min_head_count, f.tree.min_feature_count, f.tree.purity
            ));
        }
        if !meta.is_empty() {
            let _ = writeln!(out, "{}", meta.join("  "));
        }
        out
    }
}

/// Formats a fraction as a percentage with one decimal.
pub fn percent(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

/// Exact-match accuracy of label predictions.
pub fn score(predictions: &[ArticleLabel], gold: &[ArticleLabel]) -> Result<EvaluationReport> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    let mut confusion = Confusion::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        confusion.record(g, p);
    }
    Ok(EvaluationReport::new(confusion, confusion.correct()))
}

/// Number of training items when `n` items are split at `fraction`.
pub fn train_count(n: usize, fraction: f64) -> usize {
    // The epsilon absorbs representation error, e.g. 1420 * 0.9.
    (((n as f64) * fraction) + 1e-9).floor().min(n as f64) as usize
}

fn shuffled_ids(n: usize, seed: u64) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub forest: ForestConfig,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        ExperimentConfig { train_fraction: 0.9, seed, forest: ForestConfig::default() }
    }
}

/// Evaluates a classifier on labeled instances, keeping coverage counts.
pub fn evaluate<C: ArticleClassifier + ?Sized>(classifier: &C, instances: &[NounPhraseInstance]) -> EvaluationReport {
    let mut confusion = Confusion::default();
    let mut counts = CoverageCounts::default();
    for inst in instances {
        let Some(gold) = inst.label() else { continue };
        let c = classifier.classify(inst);
        confusion.record(gold, c.label);
        counts.record(c.covered, c.label == gold);
    }
    let mut report = EvaluationReport::new(confusion, confusion.correct());
    report.coverage = Some(counts.report());
    report
}

/// Seeded shuffle, train a forest on the first `train_fraction`, score the rest.
pub fn run_experiment(database: &[NounPhraseInstance], config: &ExperimentConfig) -> Result<EvaluationReport> {
    let labeled: Vec<&NounPhraseInstance> = database.iter().filter(|i| i.label().is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::Empty("database"));
    }
    if !(0.0..=1.0).contains(&config.train_fraction) {
        return Err(Error::InvalidArgument(format!("train fraction {} outside [0, 1]", config.train_fraction)));
    }
    let ids = shuffled_ids(labeled.len(), config.seed);
    let n_train = train_count(labeled.len(), config.train_fraction);
    if n_train == labeled.len() {
        return Err(Error::Empty("test set"));
    }
    let train: Vec<NounPhraseInstance> = ids[..n_train].iter().map(|&i| labeled[i].clone()).collect();
    let test: Vec<NounPhraseInstance> = ids[n_train..].iter().map(|&i| labeled[i].clone()).collect();
    let forest = train_forest(&train, &config.forest);
    let mut report = evaluate(&forest, &test);
    report.meta = ExperimentMeta {
        seed: Some(config.seed),
        train_fraction: Some(config.train_fraction),
        train_size: Some(train.len()),
        test_size: Some(test.len()),
        forest: Some(config.forest),
        trees: Some(forest.trees.len()),
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningCurvePoint {
    pub training_instances: usize,
    /// Questions (internal nodes) in the tree.
    pub tree_size: usize,
    pub test_accuracy: f64,
}

/// `0, n/10, 2n/10, ..., 9n/10` for `n` instances: the full training pool
/// at a 90/10 split, in ten steps.
pub fn default_curve_sizes(n: usize) -> Vec<usize> {
    let step = n / 10;
    (0..10).map(|k| k * step).collect()
}

/// Test accuracy of trees trained on nested prefixes of one shuffled
/// training pool, all scored on the same held-out split. Size 0 means
/// always guessing "the".
pub fn learning_curve(
    instances: &[NounPhraseInstance],
    sizes: &[usize],
    seed: u64,
    test_fraction: f64,
    config: &TreeConfig,
) -> Result<Vec<LearningCurvePoint>> {
    let examples: Vec<Example> = instances.iter().filter_map(Example::from_instance).collect();
    if examples.is_empty() {
        return Err(Error::Empty("instance set"));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sizes must be ascending".into()));
    }
    let ids = shuffled_ids(examples.len(), seed);
    let n_test = examples.len() - train_count(examples.len(), 1.0 - test_fraction);
    if n_test == 0 {
        return Err(Error::Empty("test set"));
    }
    let (test_ids, pool_ids) = ids.split_at(n_test);
    if let Some(&too_big) = sizes.iter().find(|&&s| s > pool_ids.len()) {
        return Err(Error::InvalidArgument(format!(
            "size {too_big} exceeds the {} available training instances",
            pool_ids.len()
        )));
    }
    let test: Vec<&Example> = test_ids.iter().map(|&i| &examples[i]).collect();
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let (tree_size, correct) = if size == 0 {
            (0, test.iter().filter(|e| e.label == FALLBACK).count())
        } else {
            let train: Vec<Example> = pool_ids[..size].iter().map(|&i| examples[i].clone()).collect();
            let tree = train_tree(&train, config);
            let correct = test.iter().filter(|e| tree.predict_with(|f| e.has(f)).label == e.label).count();
            (tree.question_count(), correct)
        };
        points.push(LearningCurvePoint {
            training_instances: size,
            tree_size,
            test_accuracy: correct as f64 / test.len() as f64,
        });
    }
    Ok(points)
}

/// Plot data: `training_instances<TAB>test_accuracy<TAB>tree_size` per line,
/// after a `#` header.
pub fn curve_to_text(points: &[LearningCurvePoint]) -> String {
    let mut out = String::from("# training_instances\ttest_accuracy\ttree_size\n");
    for p in points {
        let _ = writeln!(out, "{}\t{:.6}\t{}", p.training_instances, p.test_accuracy, p.tree_size);
    }
    out
}

/// Expected accuracy of a rule that is always right on the `coverage`
/// fraction of noun phrases it fires on, with "the" guessed for the rest.
///
/// `_rule_label` is the article the rule emits; it does not enter the
/// arithmetic, only the residual THE fraction does.
pub fn rule_value(coverage: f64, _rule_label: ArticleLabel, residual_the_fraction: f64) -> f64 {
    coverage + (1.0 - coverage) * residual_the_fraction
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable {
    pub total: usize,
    pub always_the: f64,
    /// Accuracy of one seeded run of fair coin flips.
    pub random_simulated: f64,
    /// Expected accuracy of coin flips.
    pub random_expected: f64,
    pub seed: u64,
}

impl BaselineTable {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<26}{:>8}", "", "machine");
        let _ = writeln!(
            out,
            "{:<26}{:>8}   (simulated {}, seed {})",
            "random",
            percent(self.random_expected),
            percent(self.random_simulated),
            self.seed
        );
        let _ = writeln!(out, "{:<26}{:>8}", "always guess \"the\"", percent(self.always_the));
        let _ = writeln!(out, "({} articles)", self.total);
        out
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("baselines serialize")
    }
}

/// Coin-flip and always-"the" accuracies on a gold label sequence.
pub fn baselines(gold: &[ArticleLabel], seed: u64) -> Result<BaselineTable> {
    if gold.is_empty() {
        return Err(Error::Empty("gold label set"));
    }
    let dist = LabelDistribution::from_labels(gold);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flips: Vec<ArticleLabel> =
        gold.iter().map(|_| if rng.gen::<bool>() { ArticleLabel::The } else { ArticleLabel::AAn }).collect();
    let random = score(&flips, gold)?;
    Ok(BaselineTable {
        total: gold.len(),
        always_the: dist.count_the as f64 / gold.len() as f64,
        random_simulated: random.accuracy,
        random_expected: 0.5,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    pub position: usize,
    pub head: Option<String>,
    pub covered: bool,
    pub label: ArticleLabel,
    pub confidence: f64,
    pub surface: String,
}

impl SlotDecision {
    /// `position<TAB>head<TAB>covered|fallback<TAB>label<TAB>confidence<TAB>surface`.
    pub fn trace_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{}",
            self.position,
            self.head.as_deref().unwrap_or("-"),
            if self.covered { "covered" } else { "fallback" },
            self.label,
            self.confidence,
            self.surface
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restoration {
    pub tokens: Vec<Token>,
    pub decisions: Vec<SlotDecision>,
    /// Present when the stripped document carried gold articles.
    pub report: Option<EvaluationReport>,
}

fn next_word(tokens: &[Token], position: usize) -> Option<&str> {
    tokens[position + 1..].iter().map(|t| t.surface.as_str()).find(|s| s.chars().any(char::is_alphanumeric))
}

fn realize(label: ArticleLabel, tokens: &[Token], position: usize, trie: &AAnTrie) -> String {
    let initial = is_sentence_start(tokens, position);
    match label {
        ArticleLabel::The => if initial { "The" } else { "the" }.to_string(),
        ArticleLabel::AAn => {
            let article = next_word(tokens, position).map_or(crate::aan::Indefinite::A, |w| trie.select(w));
            article.surface(initial).to_string()
        }
    }
}

/// Fills every placeholder: the classifier picks the label, the trie picks
/// "a" or "an", and sentence-initial slots are capitalized. With gold
/// attached, each slot is scored against the author's surface
/// (case-insensitively; "a" for "an" is a failure).
pub fn restore_document<C: ArticleClassifier + ?Sized>(
    stripped: &StrippedDocument,
    classifier: &C,
    trie: &AAnTrie,
) -> Restoration {
    let mut tokens = stripped.tokens.clone();
    let extraction = extract_instances(&stripped.tokens);
    let mut decisions = Vec::new();
    let mut instances = extraction.instances.iter().filter(|i| i.is_placeholder()).peekable();
    for position in 0..tokens.len() {
        if tokens[position].surface != PLACEHOLDER {
            continue;
        }
        let instance = instances.next_if(|i| i.source_position == Some(position));
        let (c, head) = match instance {
            Some(inst) => (classifier.classify(inst), Some(inst.head.clone())),
            // A placeholder with nothing after it: no phrase to classify.
            None => (crate::forest::Classification { label: FALLBACK, confidence: 0.0, covered: false }, None),
        };
        let surface = realize(c.label, &tokens, position, trie);
        tokens[position].surface = surface.clone();
        decisions.push(SlotDecision {
            position,
            head,
            covered: c.covered,
            label: c.label,
            confidence: c.confidence,
            surface,
        });
    }

    let report = (!stripped.gold.is_empty()).then(|| {
        let mut confusion = Confusion::default();
        let mut counts = CoverageCounts::default();
        let mut successes = 0;
        for g in &stripped.gold {
            let decision = decisions.iter().find(|d| d.position == g.position);
            let (label, surface, covered) = match decision {
                Some(d) => (d.label, d.surface.as_str(), d.covered),
                None => (FALLBACK, "", false),
            };
            let hit = surface.eq_ignore_ascii_case(&g.surface);
            successes += hit as u64;
            confusion.record(g.label, label);
            counts.record(covered, hit);
        }
        let mut report = EvaluationReport::new(confusion, successes);
        report.coverage = Some(counts.report());
        report
    });

    Restoration { tokens, decisions, report }
}

/// Strips, restores and scores a labeled document in one go.
pub fn strip_and_restore<C: ArticleClassifier + ?Sized>(
    tokens: &[Token],
    classifier: &C,
    trie: &AAnTrie,
) -> Restoration {
    restore_document(&crate::corpus::strip_articles(tokens), classifier, trie)
}
