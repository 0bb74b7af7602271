//! Data-card schema and the urban-data taxonomy.
//!
//! A [`DataCard`] is the unit everything downstream works on. Its JSON record
//! form uses the field names extraction prompts ask for (`Data_Name`,
//! `Data_summary`, `Sub-category`, ...), so a model's output array parses
//! straight into cards via [`DataCard::from_record`].

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;

use crate::text::normalize_label;

pub const TAXONOMY_VERSION: &str = "urban-taxonomy/1";

/// A field of a data card. Serialized with the record field names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CardField {
    #[serde(rename = "Data_Name")]
    Name,
    #[serde(rename = "Data_summary")]
    Summary,
    #[serde(rename = "Category")]
    Category,
    #[serde(rename = "Sub-category")]
    SubCategory,
    #[serde(rename = "Time_Coverage")]
    Time,
    #[serde(rename = "Geographic_Coverage")]
    Geo,
    #[serde(rename = "URL")]
    Url,
    #[serde(rename = "ref")]
    References,
    #[serde(rename = "Other_Information")]
    OtherInformation,
}

impl CardField {
    pub const ALL: [CardField; 9] = [
        CardField::Name,
        CardField::Summary,
        CardField::Category,
        CardField::SubCategory,
        CardField::Time,
        CardField::Geo,
        CardField::Url,
        CardField::References,
        CardField::OtherInformation,
    ];

    /// Fields whose failure drops the whole card.
    pub const REQUIRED: [CardField; 3] = [CardField::Name, CardField::Summary, CardField::Category];

    pub fn record_name(self) -> &'static str {
        match self {
            CardField::Name => "Data_Name",
            CardField::Summary => "Data_summary",
            CardField::Category => "Category",
            CardField::SubCategory => "Sub-category",
            CardField::Time => "Time_Coverage",
            CardField::Geo => "Geographic_Coverage",
            CardField::Url => "URL",
            CardField::References => "ref",
            CardField::OtherInformation => "Other_Information",
        }
    }

    pub fn is_required(self) -> bool {
        Self::REQUIRED.contains(&self)
    }

    /// Lenient lookup used when parsing model output: accepts record names,
    /// snake_case and a few common synonyms.
    pub fn from_loose_name(name: &str) -> Option<CardField> {
        let n = normalize_label(name).replace(' ', "_");
        Some(match n.as_str() {
            "data_name" | "name" | "dataset_name" => CardField::Name,
            "data_summary" | "summary" | "description" => CardField::Summary,
            "category" | "type" | "data_type" => CardField::Category,
            "sub_category" | "subcategory" | "sub_type" => CardField::SubCategory,
            "time_coverage" | "time" | "temporal_coverage" => CardField::Time,
            "geographic_coverage" | "geo" | "geography" | "spatial_coverage" | "location" => {
                CardField::Geo
            }
            "url" | "link" | "access_url" => CardField::Url,
            "ref" | "refs" | "reference" | "references" => CardField::References,
            "other_information" | "other" => CardField::OtherInformation,
            _ => return None,
        })
    }
}

impl fmt::Display for CardField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.record_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    #[default]
    Medium,
    Low,
}

impl Confidence {
    fn parse(s: &str) -> Confidence {
        match s.trim().to_lowercase().as_str() {
            "high" => Confidence::High,
            "low" => Confidence::Low,
            _ => Confidence::Medium,
        }
    }
}

/// A verbatim quote offered as support for one field, or for the whole card
/// when `field` is `None` (the consolidated `Other_Information` style).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSpan {
    pub field: Option<CardField>,
    pub quote: String,
    #[serde(default)]
    pub claimed_location: Option<String>,
    #[serde(default)]
    pub confidence: Confidence,
}

/// One dataset record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataCard {
    pub dataset_id: String,
    #[serde(rename = "Data_Name")]
    pub name: String,
    #[serde(rename = "Data_summary")]
    pub summary: String,
    #[serde(rename = "Category", default)]
    pub category: String,
    #[serde(rename = "Sub-category", default)]
    pub sub_category: Option<String>,
    #[serde(rename = "Time_Coverage", default)]
    pub time_coverage_raw: Option<String>,
    #[serde(rename = "Geographic_Coverage", default)]
    pub geographic_coverage_raw: Option<String>,
    #[serde(rename = "URL", default)]
    pub url: Option<String>,
    #[serde(rename = "ref", default)]
    pub references: Vec<String>,
    #[serde(rename = "Other_Information", default)]
    pub other_information: Option<String>,
    #[serde(default)]
    pub evidence: Vec<EvidenceSpan>,
}

/// Why a model-produced record could not become a card.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("record is not a JSON object")]
    NotAnObject,
    #[error("record is missing required field {0}")]
    Missing(CardField),
}

impl DataCard {
    /// Text value of a field, `None` when absent or empty.
    pub fn field_text(&self, field: CardField) -> Option<String> {
        let s = match field {
            CardField::Name => Some(self.name.clone()),
            CardField::Summary => Some(self.summary.clone()),
            CardField::Category => Some(self.category.clone()),
            CardField::SubCategory => self.sub_category.clone(),
            CardField::Time => self.time_coverage_raw.clone(),
            CardField::Geo => self.geographic_coverage_raw.clone(),
            CardField::Url => self.url.clone(),
            CardField::References => {
                if self.references.is_empty() {
                    None
                } else {
                    Some(self.references.join(" "))
                }
            }
            CardField::OtherInformation => self.other_information.clone(),
        };
        s.filter(|v| !v.trim().is_empty())
    }

    /// Clear a field's value. Required fields become empty strings.
    pub fn clear_field(&mut self, field: CardField) {
        match field {
            CardField::Name => self.name.clear(),
            CardField::Summary => self.summary.clear(),
            CardField::Category => self.category.clear(),
            CardField::SubCategory => self.sub_category = None,
            CardField::Time => self.time_coverage_raw = None,
            CardField::Geo => self.geographic_coverage_raw = None,
            CardField::Url => self.url = None,
            CardField::References => self.references.clear(),
            CardField::OtherInformation => self.other_information = None,
        }
    }

    /// Portal-eligible cards carry a URL or at least one reference.
    pub fn is_portal_eligible(&self) -> bool {
        self.field_text(CardField::Url).is_some() || !self.references.is_empty()
    }

    /// Parse one element of a model's output array.
    ///
    /// Missing `dataset_id` is filled from `fallback_id`. Placeholder values
    /// such as `"N/A"` or `null` become `None`. Evidence is accepted as an
    /// `evidence` array, an `Evidence` object keyed by field, or the
    /// consolidated `Evidence: ...; Location: ...; Confidence: ...` note in
    /// `Other_Information`.
    pub fn from_record(value: &Value, fallback_id: &str) -> Result<DataCard, RecordError> {
        let obj = value.as_object().ok_or(RecordError::NotAnObject)?;
        let get = |field: CardField| -> Option<&Value> {
            obj.iter()
                .find(|(k, _)| CardField::from_loose_name(k) == Some(field))
                .map(|(_, v)| v)
        };
        let text = |field: CardField| get(field).and_then(value_text);

        let name = text(CardField::Name).ok_or(RecordError::Missing(CardField::Name))?;
        let summary = text(CardField::Summary).ok_or(RecordError::Missing(CardField::Summary))?;
        let dataset_id = obj
            .get("dataset_id")
            .and_then(value_text)
            .unwrap_or_else(|| fallback_id.to_string());
        let references = match get(CardField::References) {
            Some(Value::Array(items)) => items.iter().filter_map(value_text).collect(),
            Some(v) => value_text(v).into_iter().collect(),
            None => Vec::new(),
        };
        let other_information = text(CardField::OtherInformation);

        let mut evidence = Vec::new();
        for (k, v) in obj {
            let key = normalize_label(k);
            if key == "evidence" || key == "evidences" {
                collect_evidence(v, None, &mut evidence);
            }
        }
        if let Some(note) = &other_information {
            evidence.extend(parse_evidence_note(note));
        }

        Ok(DataCard {
            dataset_id,
            name,
            summary,
            category: text(CardField::Category).unwrap_or_default(),
            sub_category: text(CardField::SubCategory),
            time_coverage_raw: text(CardField::Time),
            geographic_coverage_raw: text(CardField::Geo),
            url: text(CardField::Url),
            references,
            other_information,
            evidence,
        })
    }
}

fn value_text(v: &Value) -> Option<String> {
    let s = match v {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) => n.to_string(),
        Value::Array(items) => items
            .iter()
            .filter_map(value_text)
            .collect::<Vec<_>>()
            .join("; "),
        _ => return None,
    };
    let lowered = s.to_lowercase();
    if s.is_empty() || matches!(lowered.as_str(), "n/a" | "na" | "none" | "null" | "unknown" | "-") {
        None
    } else {
        Some(s)
    }
}

fn collect_evidence(v: &Value, field: Option<CardField>, out: &mut Vec<EvidenceSpan>) {
    match v {
        Value::String(s) if !s.trim().is_empty() => out.push(EvidenceSpan {
            field,
            quote: s.trim().to_string(),
            claimed_location: None,
            confidence: Confidence::Medium,
        }),
        Value::Array(items) => {
            for item in items {
                collect_evidence(item, field, out);
            }
        }
        Value::Object(map) => {
            let quote = map
                .iter()
                .find(|(k, _)| {
                    matches!(normalize_label(k).as_str(), "quote" | "text" | "span" | "evidence")
                })
                .and_then(|(_, v)| v.as_str());
            if let Some(quote) = quote.filter(|q| !q.trim().is_empty()) {
                let field = map
                    .iter()
                    .find(|(k, _)| normalize_label(k) == "field")
                    .and_then(|(_, v)| v.as_str())
                    .and_then(CardField::from_loose_name)
                    .or(field);
                let loc = map
                    .iter()
                    .find(|(k, _)| matches!(normalize_label(k).as_str(), "location" | "section"))
                    .and_then(|(_, v)| v.as_str())
                    .map(str::to_string);
                let conf = map
                    .iter()
                    .find(|(k, _)| normalize_label(k) == "confidence")
                    .and_then(|(_, v)| v.as_str())
                    .map(Confidence::parse)
                    .unwrap_or_default();
                out.push(EvidenceSpan {
                    field,
                    quote: quote.trim().to_string(),
                    claimed_location: loc,
                    confidence: conf,
                });
            } else {
                // keyed by field name: {"Time_Coverage": "...", ...}
                for (k, v) in map {
                    if let Some(f) = CardField::from_loose_name(k) {
                        collect_evidence(v, Some(f), out);
                    }
                }
            }
        }
        _ => {}
    }
}

/// Parse `Evidence: <quote>; Location: <loc>; Confidence: <level>`.
pub fn parse_evidence_note(note: &str) -> Option<EvidenceSpan> {
    let start = note.find("Evidence:")? + "Evidence:".len();
    let rest = &note[start..];
    let loc_at = rest.find("; Location:").or_else(|| rest.find(";Location:"));
    let conf_at = rest.find("; Confidence:").or_else(|| rest.find(";Confidence:"));
    let quote_end = [loc_at, conf_at].into_iter().flatten().min().unwrap_or(rest.len());
    let quote = rest[..quote_end].trim().to_string();
    if quote.is_empty() {
        return None;
    }
    let claimed_location = loc_at.map(|i| {
        let s = &rest[i..];
        let s = &s[s.find(':').unwrap() + 1..];
        let end = s.find("; Confidence:").or_else(|| s.find(";Confidence:")).unwrap_or(s.len());
        s[..end].trim().to_string()
    });
    let confidence = conf_at
        .map(|i| {
            let s = &rest[i..];
            Confidence::parse(&s[s.find(':').unwrap() + 1..])
        })
        .unwrap_or_default();
    Some(EvidenceSpan { field: None, quote, claimed_location, confidence })
}

/// One top-level category with its subcategories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub subcategories: Vec<String>,
}

/// The closed two-level classification of urban data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub version: String,
    pub categories: Vec<Category>,
}

const CANONICAL: [(&str, &[&str]); 4] = [
    (
        "Statistical infrastructure data",
        &[
            "Road networks and transportation infrastructure",
            "Building footprints and land-use maps",
            "Points of interest (POIs)",
            "Administrative boundaries and zoning maps",
            "Utility networks (electricity, water, and communication)",
        ],
    ),
    (
        "Human behavior data",
        &[
            "Human mobility traces (GPS, transit cards, ride-hailing)",
            "Socioeconomic activities (consumption, employment, and commerce)",
            "Social media interactions and online behavior",
            "Health and wellbeing data (hospitalization counts and survey-based measures)",
        ],
    ),
    (
        "Policy and survey data",
        &[
            "Population censuses and household surveys",
            "Statistical yearbooks and socioeconomic indicators",
            "Government reports and urban planning documents",
            "Policy texts and regulatory frameworks",
        ],
    ),
    (
        "Multimodal sensing data",
        &[
            "Satellite remote sensing imagery (optical, SAR, night-time lights)",
            "Aerial and drone imagery",
            "Ground-based sensors (air quality, temperature, and noise)",
            "Urban IoT devices (traffic, energy, water, environmental monitoring)",
            "City-wide camera networks and meteorological stations",
        ],
    ),
];

/// The built-in taxonomy: 4 categories, 18 subcategories.
pub fn canonical_taxonomy() -> Taxonomy {
    Taxonomy {
        version: TAXONOMY_VERSION.to_string(),
        categories: CANONICAL
            .iter()
            .map(|(name, subs)| Category {
                name: name.to_string(),
                subcategories: subs.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
    }
}

impl Taxonomy {
    /// Case- and punctuation-insensitive category lookup.
    pub fn category(&self, label: &str) -> Option<&Category> {
        let key = normalize_label(label);
        self.categories.iter().find(|c| normalize_label(&c.name) == key)
    }

    /// Case- and punctuation-insensitive subcategory lookup, returning the
    /// owning category and the canonical subcategory label.
    pub fn subcategory(&self, label: &str) -> Option<(&Category, &str)> {
        let key = normalize_label(label);
        self.categories.iter().find_map(|c| {
            c.subcategories
                .iter()
                .find(|s| normalize_label(s) == key)
                .map(|s| (c, s.as_str()))
        })
    }

    pub fn subcategory_count(&self) -> usize {
        self.categories.iter().map(|c| c.subcategories.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyField { field: CardField },
    MissingCategory,
    UnknownCategory { label: String },
    UnknownSubCategory { label: String },
    SubCategoryMismatch { category: String, sub_category: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyField { field } => write!(f, "empty required field {field}"),
            Violation::MissingCategory => write!(f, "missing category"),
            Violation::UnknownCategory { label } => write!(f, "unknown category {label:?}"),
            Violation::UnknownSubCategory { label } => write!(f, "unknown sub-category {label:?}"),
            Violation::SubCategoryMismatch { category, sub_category } => {
                write!(f, "sub-category {sub_category:?} does not belong to {category:?}")
            }
        }
    }
}

/// Check a card against the schema and the taxonomy, reporting every
/// violation found.
pub fn validate_card(card: &DataCard, taxonomy: &Taxonomy) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if card.name.trim().is_empty() {
        out.push(Violation::EmptyField { field: CardField::Name });
    }
    if card.summary.trim().is_empty() {
        out.push(Violation::EmptyField { field: CardField::Summary });
    }
    let category = if card.category.trim().is_empty() {
        out.push(Violation::MissingCategory);
        None
    } else {
        let c = taxonomy.category(&card.category);
        if c.is_none() {
            out.push(Violation::UnknownCategory { label: card.category.clone() });
        }
        c
    };
    if let Some(sub) = card.sub_category.as_deref().filter(|s| !s.trim().is_empty()) {
        match taxonomy.subcategory(sub) {
            None => out.push(Violation::UnknownSubCategory { label: sub.to_string() }),
            Some((owner, _)) => {
                if let Some(c) = category {
                    if c.name != owner.name {
                        out.push(Violation::SubCategoryMismatch {
                            category: c.name.clone(),
                            sub_category: sub.to_string(),
                        });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
