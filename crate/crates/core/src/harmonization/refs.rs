use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::schema::DataCard;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceStatus {
    Valid,
    Malformed,
    Missing,
}

static URLISH: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(https?://\S+|www\.[a-z0-9-]+\.\S+|doi:\s*10\.\d{4,}|10\.\d{4,}/\S+|[a-z0-9-]+\.(?:com|org|gov|edu|net|io|int)\b)").unwrap()
});
static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(1[7-9]\d\d|20\d\d)\b").unwrap());

/// A citation shape: carries a URL or DOI, or a year plus at least four
/// words (author / title / venue).
pub fn is_citation(reference: &str) -> bool {
    if URLISH.is_match(reference) {
        return true;
    }
    let words = reference.split_whitespace().filter(|w| w.chars().any(char::is_alphabetic)).count();
    YEAR.is_match(reference) && words >= 4
}

pub fn check_references(card: &DataCard) -> ReferenceStatus {
    let refs: Vec<&String> = card.references.iter().filter(|r| !r.trim().is_empty()).collect();
    if refs.is_empty() {
        ReferenceStatus::Missing
    } else if refs.iter().any(|r| is_citation(r)) {
        ReferenceStatus::Valid
    } else {
        ReferenceStatus::Malformed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert!(is_citation(
            "Cities & Neighborhoods. Walk Score www.walkscore.com/cities-and-neighborhoods/ (accessed 17 June 2018)."
        ));
        assert!(is_citation("Smith, J. & Lee, K. Urban heat. Nature Cities 2, 11-19 (2024)."));
        assert!(is_citation("doi:10.1038/s41586-020-2649-2"));
        assert!(!is_citation("see above"));
        assert!(!is_citation("2019"));
    }
}
