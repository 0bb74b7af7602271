//! Line-oriented structured text format.
//!
//! ```text
//! # Article title
//! journal: Nature Cities
//! year: 2025
//! ## Abstract
//! Abstract text...
//! ## Methods
//! Paragraph text...
//! [table] Table 1. Journals
//! Journal | #
//! Nature | 245
//!
//! [figure] Fig. 1. Caption text
//! [supplementary] Supplementary note
//! ```
//!
//! `key: value` lines are metadata only before the first `##` heading. A
//! table runs until the next blank line. Lines that match nothing else are
//! body text of the current section.

use super::{ArticleParts, Section, Table};
use crate::text::normalize_label;

pub(crate) fn parse(source: &str) -> ArticleParts {
    let mut parts = ArticleParts::default();
    let mut current: Option<usize> = None;
    let mut in_abstract = false;
    let mut table: Option<(String, Vec<String>)> = None;
    let mut seen_heading = false;

    let flush_table = |table: &mut Option<(String, Vec<String>)>, parts: &mut ArticleParts| {
        if let Some((caption, rows)) = table.take() {
            parts.tables.push(Table { caption, flattened_text: rows.join("\n") });
        }
    };

    for line in source.lines() {
        let trimmed = line.trim();
        if table.is_some() {
            if trimmed.is_empty() {
                flush_table(&mut table, &mut parts);
            } else {
                let cells: Vec<&str> = trimmed.split('|').map(str::trim).collect();
                table.as_mut().unwrap().1.push(cells.join(" | "));
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("## ") {
            seen_heading = true;
            if normalize_label(rest) == "abstract" {
                in_abstract = true;
                current = None;
            } else {
                in_abstract = false;
                parts.sections.push(Section { heading: rest.trim().to_string(), body: String::new() });
                current = Some(parts.sections.len() - 1);
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# ") {
            if parts.title.is_none() {
                parts.title = Some(rest.trim().to_string());
                continue;
            }
        }
        if let Some(rest) = trimmed.strip_prefix("[table]") {
            table = Some((rest.trim().to_string(), Vec::new()));
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("[figure]") {
            parts.figure_captions.push(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("[supplementary]") {
            parts.supplementary.push(rest.trim().to_string());
            continue;
        }
        if !seen_heading {
            if let Some((k, v)) = trimmed.split_once(':') {
                match k.trim().to_lowercase().as_str() {
                    "journal" => {
                        parts.journal = Some(v.trim().to_string());
                        continue;
                    }
                    "year" => {
                        if let Ok(y) = v.trim().parse() {
                            parts.year = Some(y);
                            continue;
                        }
                    }
                    _ => {}
                }
            }
        }
        let buf = if in_abstract {
            &mut parts.abstract_text
        } else {
            let i = match current {
                Some(i) => i,
                None => {
                    if trimmed.is_empty() {
                        continue;
                    }
                    parts.sections.push(Section { heading: "Body".into(), body: String::new() });
                    current = Some(parts.sections.len() - 1);
                    parts.sections.len() - 1
                }
            };
            &mut parts.sections[i].body
        };
        if trimmed.is_empty() {
            if !buf.is_empty() && !buf.ends_with("\n\n") {
                buf.push_str("\n\n");
            }
        } else {
            if !buf.is_empty() && !buf.ends_with('\n') {
                buf.push(' ');
            }
            buf.push_str(trimmed);
        }
    }
    flush_table(&mut table, &mut parts);
    parts
}

#[cfg(test)]
mod tests {
    use super::super::{parse_article, FormatHint};

    const DOC: &str = "# Walkability and moving\njournal: Nature\nyear: 2025\n## Abstract\nWe study movers.\n## Methods\nScores are on a scale of 1 to 100.\nSecond line.\n\nNew paragraph.\n[table] Table 1. Journals\nJournal | #\nNature|245\n\n[figure] Fig. 1. Map\n[supplementary] Data S1\n## Results\nDone.\n";

    #[test]
    fn parses_all_parts() {
        let a = parse_article(DOC.as_bytes(), FormatHint::StructuredText).unwrap();
        assert_eq!(a.title, "Walkability and moving");
        assert_eq!(a.journal, "Nature");
        assert_eq!(a.publication_year, Some(2025));
        assert_eq!(a.abstract_text, "We study movers.");
        assert_eq!(a.sections.len(), 2);
        assert_eq!(
            a.sections[0].body,
            "Scores are on a scale of 1 to 100. Second line.\n\nNew paragraph."
        );
        assert_eq!(a.tables[0].caption, "Table 1. Journals");
        assert_eq!(a.tables[0].flattened_text, "Journal | #\nNature | 245");
        assert_eq!(a.figure_captions, vec!["Fig. 1. Map"]);
        assert_eq!(a.supplementary, vec!["Data S1"]);
    }

    #[test]
    fn metadata_lines_after_headings_are_text() {
        let a = parse_article(b"# T\n## Notes\nyear: not a year\n", FormatHint::StructuredText).unwrap();
        assert_eq!(a.sections[0].body, "year: not a year");
    }
}
