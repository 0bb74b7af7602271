//! Geographic coverage to [`GeoScope`] through an alias gazetteer.
//!
//! The gazetteer is a tab-separated table, one alias per line (tabs shown
//! as spaces):
//!
//! ```text
//! # comment
//! kind      alias          code
//! country   United States  US
//! alias     USA            US
//! city      Seattle        US
//! region    California     US
//! global    Worldwide      -
//! ```
//!
//! `country` rows give the ISO 3166-1 alpha-2 code set; every other row must
//! point into it. Matching is case-insensitive over whole words, longest alias
//! first, except aliases of at most three capital letters ("US", "UK"), which
//! must match exactly so that the pronoun "us" is not a country.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};

const BUNDLED: &str = include_str!("../../data/gazetteer.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoLevel {
    Global,
    Country,
    Subnational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeoScope {
    /// `None` when unresolved.
    pub level: Option<GeoLevel>,
    pub country_codes: Vec<String>,
    pub region_text: Option<String>,
    pub unresolved: Option<String>,
}

impl GeoScope {
    pub fn unresolved(raw: &str) -> Self {
        GeoScope { level: None, country_codes: Vec::new(), region_text: None, unresolved: Some(raw.to_string()) }
    }

    pub fn is_resolved(&self) -> bool {
        self.level.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliasKind {
    Country,
    Alias,
    City,
    Region,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GazetteerError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    countries: HashMap<String, String>,
    /// Lowercased word sequence -> (kind, code).
    folded: HashMap<Vec<String>, (AliasKind, String)>,
    /// Exact-case short aliases.
    exact: HashMap<String, (AliasKind, String)>,
    max_words: usize,
}

fn words(s: &str) -> Vec<&str> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '.'))
        .map(|w| w.trim_matches(|c| c == '.' || c == '\''))
        .filter(|w| !w.is_empty())
        .collect()
}

fn is_exact_alias(alias: &str) -> bool {
    let letters: String = alias.chars().filter(|c| c.is_alphanumeric()).collect();
    letters.len() <= 3 && letters.chars().all(|c| c.is_ascii_uppercase())
}

impl Gazetteer {
    pub fn parse(tsv: &str) -> Result<Gazetteer, GazetteerError> {
        let mut g = Gazetteer {
            countries: HashMap::new(),
            folded: HashMap::new(),
            exact: HashMap::new(),
            max_words: 1,
        };
        let mut rows = Vec::new();
        for (i, line) in tsv.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| GazetteerError::Line { line: i + 1, message: message.to_string() };
            let cols: Vec<&str> = line.split('\t').collect();
            let [kind, alias, code] = cols[..] else {
                return Err(err("expected three tab-separated columns"));
            };
            let kind = match kind {
                "country" => AliasKind::Country,
                "alias" => AliasKind::Alias,
                "city" => AliasKind::City,
                "region" => AliasKind::Region,
                "global" => AliasKind::Global,
                _ => return Err(err("unknown kind")),
            };
            if kind == AliasKind::Country {
                g.countries.insert(code.to_string(), alias.to_string());
            }
            rows.push((i + 1, kind, alias.trim().to_string(), code.trim().to_string()));
        }
        for (line, kind, alias, code) in rows {
            if kind != AliasKind::Global && !g.countries.contains_key(&code) {
                return Err(GazetteerError::Line { line, message: format!("unknown country code {code}") });
            }
            if is_exact_alias(&alias) {
                g.exact.insert(alias.chars().filter(|c| c.is_alphanumeric()).collect(), (kind, code));
                continue;
            }
            let key: Vec<String> = words(&alias).iter().map(|w| w.to_lowercase()).collect();
            if key.is_empty() {
                continue;
            }
            g.max_words = g.max_words.max(key.len());
            g.folded.entry(key).or_insert((kind, code));
        }
        Ok(g)
    }

    pub fn bundled() -> &'static Gazetteer {
        static G: Lazy<Gazetteer> = Lazy::new(|| Gazetteer::parse(BUNDLED).expect("bundled gazetteer"));
        &G
    }

    pub fn is_country_code(&self, code: &str) -> bool {
        self.countries.contains_key(code)
    }

    pub fn country_name(&self, code: &str) -> Option<&str> {
        self.countries.get(code).map(String::as_str)
    }

    pub fn country_codes(&self) -> impl Iterator<Item = &str> {
        self.countries.keys().map(String::as_str)
    }

    /// All gazetteer hits in `text`, in text order, with the word span each
    /// covers.
    pub fn mentions(&self, text: &str) -> Vec<Mention> {
        let ws = words(text);
        let mut out = Vec::new();
        let mut i = 0;
        'outer: while i < ws.len() {
            for n in (1..=self.max_words.min(ws.len() - i)).rev() {
                let key: Vec<String> = ws[i..i + n].iter().map(|w| w.to_lowercase()).collect();
                if let Some((kind, code)) = self.folded.get(&key) {
                    out.push(Mention { kind: *kind, code: code.clone(), text: key.join(" "), words: i..i + n });
                    i += n;
                    continue 'outer;
                }
            }
            let bare: String = ws[i].chars().filter(|c| c.is_alphanumeric()).collect();
            if let Some((kind, code)) = self.exact.get(&bare) {
                out.push(Mention { kind: *kind, code: code.clone(), text: bare.to_lowercase(), words: i..i + 1 });
            }
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub kind: AliasKind,
    pub code: String,
    /// The matched words, lowercased.
    pub text: String,
    /// Word index range in the scanned text.
    pub words: std::ops::Range<usize>,
}

const SUBNATIONAL_CUES: &[&str] = &[
    "city", "cities", "citywide", "province", "provinces", "provincial", "county", "counties",
    "state", "states", "municipal", "municipality", "municipalities", "district", "districts",
    "neighborhood", "neighborhoods", "neighbourhood", "neighbourhoods", "metropolitan", "metro",
    "prefecture", "prefectures", "tract", "tracts", "borough", "boroughs", "region", "regions",
    "regional", "town", "towns", "village", "villages", "zip", "postcode", "ward", "wards",
    "subnational",
];

/// Resolve free-text geographic coverage.
pub fn normalize_geo(raw: &str, gazetteer: &Gazetteer) -> GeoScope {
    let mentions = gazetteer.mentions(raw);
    if mentions.iter().any(|m| m.kind == AliasKind::Global) {
        return GeoScope { level: Some(GeoLevel::Global), country_codes: Vec::new(), region_text: None, unresolved: None };
    }
    let codes: BTreeSet<String> = mentions.iter().map(|m| m.code.clone()).collect();
    if codes.is_empty() {
        return GeoScope::unresolved(raw);
    }
    let covered: HashSet<usize> = mentions.iter().flat_map(|m| m.words.clone()).collect();
    let cue = words(raw).iter().enumerate().any(|(i, w)| {
        !covered.contains(&i)
            && SUBNATIONAL_CUES.contains(&w.to_lowercase().as_str())
    });
    let local = mentions.iter().any(|m| matches!(m.kind, AliasKind::City | AliasKind::Region));
    if cue || local {
        GeoScope {
            level: Some(GeoLevel::Subnational),
            country_codes: codes.into_iter().collect(),
            region_text: Some(raw.trim().to_string()),
            unresolved: None,
        }
    } else {
        GeoScope {
            level: Some(GeoLevel::Country),
            country_codes: codes.into_iter().collect(),
            region_text: None,
            unresolved: None,
        }
    }
}
