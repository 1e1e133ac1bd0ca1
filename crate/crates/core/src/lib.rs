//! Article selection for English postediting.
//!
//! Given text whose articles have been removed (or replaced by `???`
//! placeholders), decide for every slot between "the" and "a/an", realize
//! "a" vs "an" from the pronunciation of the following word, and score the
//! result against the original text.
//!
//! The pipeline is split into small modules:
//!
//! * [`corpus`] tokenizes text, extracts article-anchored core noun phrases,
//!   strips articles and reads/writes the instance database.
//! * [`features`] turns instances into binary lexical and abstract features
//!   and indexes them.
//! * [`dtree`] grows entropy-split decision trees over those features.
//! * [`forest`] keeps one tree per frequent head noun, with "the" as the
//!   fallback for everything else.
//! * [`aan`] is the prefix trie that picks "a" or "an".
//! * [`eval`] implements the strip-and-restore protocol, baselines and
//!   learning curves.

pub mod aan;
pub mod corpus;
pub mod dtree;
pub mod eval;
pub mod features;
pub mod forest;
pub mod label;
pub mod sexpr;
pub mod synthetic;

mod error;
mod io;

pub use error::{Error, ParseError, Result};
pub use io::write_atomic;
pub use label::{ArticleLabel, LabelDistribution};
