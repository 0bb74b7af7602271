use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::harmonization::{CatalogEntry, GeoLevel};

/// Bin for entries whose value is missing, unparsed or unresolved.
pub const UNKNOWN: &str = "unknown";
const MULTIPLE: &str = "multiple";
const GLOBAL: &str = "global";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub entries: usize,
    /// One bin per entry: its single country code, `multiple`, `global` or
    /// `unknown`. Sums to `entries`.
    pub by_country: BTreeMap<String, usize>,
    /// Entries naming each country, so multi-country entries count once per
    /// country. Does not sum to `entries`.
    pub country_mentions: BTreeMap<String, usize>,
    pub by_category: BTreeMap<String, usize>,
    pub by_sub_category: BTreeMap<String, usize>,
    /// Keyed by collection year (the whole-year midpoint of the time range).
    pub by_collection_year: BTreeMap<String, usize>,
    /// Mean of publication year minus collection midpoint, negative gaps
    /// counted as zero. Absent when no entry has both.
    pub mean_publication_latency_years: Option<f64>,
    pub latency_sample: usize,
}

pub fn compute_stats<'a>(entries: impl IntoIterator<Item = &'a CatalogEntry>) -> CorpusStats {
    let mut s = CorpusStats::default();
    let mut gap_sum = 0.0;
    let bump = |m: &mut BTreeMap<String, usize>, k: &str| *m.entry(k.to_string()).or_default() += 1;
    for e in entries {
        s.entries += 1;
        let country = match (e.geo.level, e.geo.country_codes.as_slice()) {
            (Some(GeoLevel::Global), _) => GLOBAL,
            (_, []) => UNKNOWN,
            (_, [one]) => one.as_str(),
            _ => MULTIPLE,
        };
        bump(&mut s.by_country, country);
        for c in &e.geo.country_codes {
            bump(&mut s.country_mentions, c);
        }
        let cat = e.card.category.trim();
        bump(&mut s.by_category, if cat.is_empty() { UNKNOWN } else { cat });
        bump(&mut s.by_sub_category, e.card.sub_category.as_deref().map(str::trim).filter(|x| !x.is_empty()).unwrap_or(UNKNOWN));
        let mid = e.time.midpoint();
        match mid {
            Some(m) => bump(&mut s.by_collection_year, &(m.floor() as i64).to_string()),
            None => bump(&mut s.by_collection_year, UNKNOWN),
        }
        if let (Some(m), Some(p)) = (mid, e.source.publication_year) {
            gap_sum += (p as f64 - m).max(0.0);
            s.latency_sample += 1;
        }
    }
    if s.latency_sample > 0 {
        s.mean_publication_latency_years = Some(gap_sum / s.latency_sample as f64);
    }
    s
}
