//! Browser demo: split-score explorer, a/an explainer and a learning curve
//! on a synthetic corpus. Every export returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use artsel::aan::{AAnTrie, Reason};
use artsel::dtree::{entropy, sparse_split_score, TreeConfig};
use artsel::eval::{default_curve_sizes, learning_curve, LearningCurvePoint};
use artsel::synthetic::rule_corpus;
use artsel::LabelDistribution;

#[derive(Serialize)]
struct SplitPoint {
    feature_the: u64,
    feature_a_an: u64,
    score: f64,
}

#[derive(Serialize)]
struct SplitCurve {
    parent: f64,
    points: Vec<SplitPoint>,
}

#[derive(Serialize)]
struct Explanation {
    word: String,
    article: &'static str,
    reason: String,
}

#[derive(Serialize)]
struct Curve {
    instances: usize,
    points: Vec<LearningCurvePoint>,
}

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo values serialize")
}

fn failure(error: impl ToString) -> String {
    json(&Failure { error: error.to_string() })
}

/// Split scores of every way a feature on `feature_size` instances can
/// divide a node of `node_the` THE and `node_a_an` A_AN instances.
pub fn split_curve_json(node_the: u64, node_a_an: u64, feature_size: u64) -> String {
    let node = LabelDistribution::new(node_the, node_a_an);
    let parent = match entropy(node) {
        Ok(h) => h,
        Err(e) => return failure(e),
    };
    if feature_size > node.total() {
        return failure(format!("a feature cannot cover {feature_size} of {} instances", node.total()));
    }
    let lo = feature_size.saturating_sub(node_a_an);
    let hi = feature_size.min(node_the);
    let points = (lo..=hi)
        .map(|t| {
            let feature = LabelDistribution::new(t, feature_size - t);
            SplitPoint {
                feature_the: t,
                feature_a_an: feature_size - t,
                score: sparse_split_score(node, feature).expect("feature fits the node"),
            }
        })
        .collect();
    json(&SplitCurve { parent, points })
}

/// Which indefinite article `word` takes, and why.
pub fn explain_article_json(word: &str) -> String {
    let word = word.trim();
    if word.is_empty() {
        return failure("type a word");
    }
    let (article, reason) = AAnTrie::shipped().explain(word);
    let reason = match reason {
        Reason::Prefix(p) if p.is_empty() => "no rule matched; default".to_string(),
        Reason::Prefix(p) => format!("longest matching rule prefix \"{p}\""),
        Reason::Acronym(c) => format!("spelled out; the letter name of {c} decides"),
    };
    json(&Explanation { word: word.to_string(), article: article.as_str(), reason })
}

/// Learning curve for one head of a seeded corpus where "ago" after the
/// phrase or "had" before it means "a".
pub fn synthetic_curve_json(seed: u64, instances: usize, purity: f64) -> String {
    if !(20..=5000).contains(&instances) {
        return failure("instances must be between 20 and 5000");
    }
    if !(0.5..=1.0).contains(&purity) {
        return failure("purity must be between 0.5 and 1");
    }
    let db = rule_corpus(1, instances, seed);
    let sizes = default_curve_sizes(db.len());
    let config = TreeConfig { purity, ..TreeConfig::default() };
    match learning_curve(&db, &sizes, seed, 0.1, &config) {
        Ok(points) => json(&Curve { instances: db.len(), points }),
        Err(e) => failure(e),
    }
}

#[wasm_bindgen]
pub fn split_curve(node_the: u32, node_a_an: u32, feature_size: u32) -> String {
    split_curve_json(node_the.into(), node_a_an.into(), feature_size.into())
}

#[wasm_bindgen]
pub fn explain_article(word: &str) -> String {
    explain_article_json(word)
}

#[wasm_bindgen]
pub fn synthetic_curve(seed: u32, instances: u32, purity: f64) -> String {
    synthetic_curve_json(seed.into(), instances as usize, purity)
}
