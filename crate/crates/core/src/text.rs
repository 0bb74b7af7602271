//! Small text utilities shared by the matchers, the reference providers and
//! the keyword index.

use once_cell::sync::Lazy;
use regex::Regex;
use std::collections::HashSet;

static DIGIT_GROUP: Lazy<Regex> = Lazy::new(|| Regex::new(r"(\d),(\d{3})").unwrap());

static STOPWORDS: Lazy<HashSet<&'static str>> = Lazy::new(|| {
    [
        "a", "an", "and", "are", "as", "at", "be", "been", "by", "for", "from", "has", "have",
        "in", "into", "is", "it", "its", "of", "on", "or", "that", "the", "their", "these",
        "this", "those", "to", "was", "were", "which", "with", "within", "we", "our", "used",
        "use", "uses", "using", "per", "each", "all", "also", "than", "such", "other", "over",
        "across", "between", "about", "both",
    ]
    .into_iter()
    .collect()
});

/// Lowercase alphanumeric tokens. Thousands separators inside numbers are
/// dropped first, so "1,609" is one token.
pub fn raw_tokens(text: &str) -> Vec<String> {
    let text = DIGIT_GROUP.replace_all(text, "$1$2");
    let text = DIGIT_GROUP.replace_all(&text, "$1$2");
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Crude plural folding: "cities" -> "city", "scores" -> "score".
pub fn stem(token: &str) -> String {
    let n = token.chars().count();
    if n > 4 && token.ends_with("ies") {
        format!("{}y", &token[..token.len() - 3])
    } else if n > 3 && token.ends_with('s') && !token.ends_with("ss") && !token.ends_with("us") {
        token[..token.len() - 1].to_string()
    } else {
        token.to_string()
    }
}

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(token)
}

/// Stemmed tokens with stopwords removed, in text order (duplicates kept).
pub fn content_tokens(text: &str) -> Vec<String> {
    raw_tokens(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .map(|t| stem(&t))
        .collect()
}

pub fn content_token_set(text: &str) -> HashSet<String> {
    content_tokens(text).into_iter().collect()
}

/// Lowercase, punctuation folded to spaces, whitespace collapsed.
pub fn normalize_label(label: &str) -> String {
    label
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized Levenshtein similarity over chars, in [0, 1].
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / max as f64
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.union(b).count();
    inter as f64 / union as f64
}

/// Largest char boundary `<= idx`.
pub fn floor_char_boundary(s: &str, idx: usize) -> usize {
    if idx >= s.len() {
        return s.len();
    }
    let mut i = idx;
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Smallest char boundary `>= idx`.
pub fn ceil_char_boundary(s: &str, idx: usize) -> usize {
    if idx >= s.len() {
        return s.len();
    }
    let mut i = idx;
    while !s.is_char_boundary(i) {
        i += 1;
    }
    i
}

/// Collapse runs of whitespace to single spaces and trim.
pub fn squash_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Comparable form of a URL: no scheme, no `www.`, no trailing slash,
/// lowercase.
pub fn normalize_url(url: &str) -> String {
    let u = url.trim().to_lowercase();
    let u = u.split_once("://").map_or(u.as_str(), |(_, rest)| rest);
    let u = u.strip_prefix("www.").unwrap_or(u);
    u.trim_end_matches(['/', '.', ')']).to_string()
}

/// Host part of a URL in the [`normalize_url`] form.
pub fn url_host(url: &str) -> String {
    normalize_url(url).split(['/', '?', '#']).next().unwrap_or("").to_string()
}
