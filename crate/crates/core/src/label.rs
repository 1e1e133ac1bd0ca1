use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The binary article decision: definite "the" or indefinite "a"/"an".
///
/// The indefinite surface form is chosen later by [`crate::aan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArticleLabel {
    #[serde(rename = "THE")]
    The,
    #[serde(rename = "A_AN")]
    AAn,
}

impl ArticleLabel {
    /// Label of an article surface ("the", "A", "an", ...), case-insensitive.
    pub fn from_surface(surface: &str) -> Option<Self> {
        if surface.eq_ignore_ascii_case("the") {
            Some(ArticleLabel::The)
        } else if surface.eq_ignore_ascii_case("a") || surface.eq_ignore_ascii_case("an") {
            Some(ArticleLabel::AAn)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArticleLabel::The => "THE",
            ArticleLabel::AAn => "A_AN",
        }
    }
}

impl fmt::Display for ArticleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArticleLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "THE" => Ok(ArticleLabel::The),
            "A_AN" => Ok(ArticleLabel::AAn),
            other => Err(format!("unknown label `{other}`, expected THE or A_AN")),
        }
    }
}

/// Counts of THE and A_AN labels at a node or under a feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub count_the: u64,
    pub count_a_an: u64,
}

impl LabelDistribution {
    pub const fn new(count_the: u64, count_a_an: u64) -> Self {
        LabelDistribution { count_the, count_a_an }
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a ArticleLabel>) -> Self {
        let mut dist = LabelDistribution::default();
        for &label in labels {
            dist.add(label);
        }
        dist
    }

    pub fn add(&mut self, label: ArticleLabel) {
        match label {
            ArticleLabel::The => self.count_the += 1,
            ArticleLabel::AAn => self.count_a_an += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.count_the + self.count_a_an
    }

    pub fn count(&self, label: ArticleLabel) -> u64 {
        match label {
            ArticleLabel::The => self.count_the,
            ArticleLabel::AAn => self.count_a_an,
        }
    }

    /// Fraction of THE labels; `None` for an empty distribution.
    pub fn q(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.count_the as f64 / total as f64)
    }

    /// Majority label, ties going to THE.
    pub fn majority(&self) -> ArticleLabel {
        if self.count_a_an > self.count_the {
            ArticleLabel::AAn
        } else {
            ArticleLabel::The
        }
    }

    /// Fraction of the majority label; 0 for an empty distribution.
    pub fn majority_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.count(self.majority()) as f64 / total as f64
    }

    pub fn checked_sub(&self, other: &LabelDistribution) -> Option<LabelDistribution> {
        Some(LabelDistribution {
            count_the: self.count_the.checked_sub(other.count_the)?,
            count_a_an: self.count_a_an.checked_sub(other.count_a_an)?,
        })
    }
}

impl std::ops::AddAssign for LabelDistribution {
    fn add_assign(&mut self, rhs: Self) {
        self.count_the += rhs.count_the;
        self.count_a_an += rhs.count_a_an;
    }
}
