//! Seeded labeled corpora with a known answer, for tests and demos.
//!
//! In a [`rule_corpus`] the article is "a" exactly when the word after the
//! phrase is "ago" or the word before it is "had"; every other context word
//! is noise. A tree learner should find both questions and nothing else.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::NounPhraseInstance;

pub const HEADS: &[&str] = &["year", "company", "price", "share", "month", "plant", "deal", "market"];

const NOISE: &[&str] = &[
    "said", "for", "in", "of", "with", "from", "by", "to", "on", "at", "and", "but", "was", "is", "will", "new",
    "since", "after", "before", "during", "about", "into", "over", "under", "near", "while", "when", ",", ".",
];

const PREMODIFIERS: &[&str] = &["big", "small", "new", "old", "local", "major"];

fn noise(rng: &mut ChaCha8Rng) -> String {
    NOISE.choose(rng).expect("noise vocabulary is non-empty").to_string()
}

/// `per_head` instances for each of `heads` heads (at most [`HEADS`]),
/// with the "ago"/"had" cues each present about a quarter of the time.
pub fn rule_corpus(heads: usize, per_head: usize, seed: u64) -> Vec<NounPhraseInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(heads * per_head);
    for head in HEADS.iter().take(heads) {
        for _ in 0..per_head {
            let ago = rng.gen_bool(0.25);
            let had = rng.gen_bool(0.25);
            let premodifiers = if rng.gen_bool(0.3) {
                vec![PREMODIFIERS.choose(&mut rng).expect("non-empty").to_string()]
            } else {
                Vec::new()
            };
            let article = if ago || had { "a" } else { "the" };
            out.push(NounPhraseInstance {
                left: [noise(&mut rng), if had { "had".into() } else { noise(&mut rng) }],
                article: article.into(),
                premodifiers,
                head: head.to_string(),
                right: [if ago { "ago".into() } else { noise(&mut rng) }, noise(&mut rng)],
                source_position: None,
            });
        }
    }
    out
}

/// Exactly `the` instances of "the" and `a_an` of "a", in seeded order,
/// with noise contexts.
pub fn label_sample(the: usize, a_an: usize, seed: u64) -> Vec<NounPhraseInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut articles: Vec<&str> = std::iter::repeat_n("the", the).chain(std::iter::repeat_n("a", a_an)).collect();
    articles.shuffle(&mut rng);
    articles
        .into_iter()
        .map(|article| NounPhraseInstance {
            left: [noise(&mut rng), noise(&mut rng)],
            article: article.into(),
            premodifiers: Vec::new(),
            head: HEADS.choose(&mut rng).expect("non-empty").to_string(),
            right: [noise(&mut rng), noise(&mut rng)],
            source_position: None,
        })
        .collect()
}
