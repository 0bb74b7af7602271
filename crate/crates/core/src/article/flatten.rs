//! Linearization of a parsed article into prompt text.
//!
//! Each block is wrapped in sentinel lines such as `[[SECTION: Methods]]` and
//! `[[END SECTION: Methods]]`. Byte offsets into this text are the coordinate
//! space for evidence localization.

use std::ops::Range;

use super::ParsedArticle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Title,
    Abstract,
    Section,
    Table,
    Figure,
    Supplementary,
}

impl BlockKind {
    fn tag(self) -> &'static str {
        match self {
            BlockKind::Title => "TITLE",
            BlockKind::Abstract => "ABSTRACT",
            BlockKind::Section => "SECTION",
            BlockKind::Table => "TABLE",
            BlockKind::Figure => "FIGURE",
            BlockKind::Supplementary => "SUPPLEMENTARY",
        }
    }

    fn from_tag(tag: &str) -> Option<BlockKind> {
        Some(match tag {
            "TITLE" => BlockKind::Title,
            "ABSTRACT" => BlockKind::Abstract,
            "SECTION" => BlockKind::Section,
            "TABLE" => BlockKind::Table,
            "FIGURE" => BlockKind::Figure,
            "SUPPLEMENTARY" => BlockKind::Supplementary,
            _ => return None,
        })
    }
}

/// One sentinel-delimited block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatBlock {
    pub kind: BlockKind,
    /// Section heading or table caption; empty for untitled blocks.
    pub label: String,
    /// Whole block including both sentinel lines.
    pub outer: Range<usize>,
    /// Content between the sentinel lines.
    pub body: Range<usize>,
}

/// Flattened text plus its block layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatText {
    pub text: String,
    pub blocks: Vec<FlatBlock>,
}

impl FlatText {
    /// Recover the block layout from flattened text.
    pub fn parse(text: &str) -> FlatText {
        let mut blocks = Vec::new();
        let mut open: Option<(BlockKind, String, usize, usize)> = None;
        let mut pos = 0;
        for line in text.split_inclusive('\n') {
            let start = pos;
            pos += line.len();
            let l = line.trim_end_matches('\n');
            if let Some(inner) = l.strip_prefix("[[").and_then(|s| s.strip_suffix("]]")) {
                if let Some(rest) = inner.strip_prefix("END ") {
                    let tag = rest.split(':').next().unwrap_or("");
                    if let Some((kind, label, o, b)) = open.take() {
                        if BlockKind::from_tag(tag) == Some(kind) {
                            blocks.push(FlatBlock { kind, label, outer: o..pos, body: b..start });
                            continue;
                        }
                        open = Some((kind, label, o, b));
                    }
                } else if open.is_none() {
                    let (tag, label) = match inner.split_once(": ") {
                        Some((t, l)) => (t, l.to_string()),
                        None => (inner, String::new()),
                    };
                    if let Some(kind) = BlockKind::from_tag(tag) {
                        open = Some((kind, label, start, pos));
                    }
                }
            }
        }
        FlatText { text: text.to_string(), blocks }
    }

    /// Block whose content contains `offset`.
    pub fn block_at(&self, offset: usize) -> Option<&FlatBlock> {
        self.blocks.iter().find(|b| b.outer.contains(&offset))
    }

    pub fn body(&self, block: &FlatBlock) -> &str {
        &self.text[block.body.clone()]
    }
}

fn push_block(out: &mut String, kind: BlockKind, label: &str, body: &str) {
    let head = if label.is_empty() {
        format!("[[{}]]\n", kind.tag())
    } else {
        format!("[[{}: {}]]\n", kind.tag(), one_line(label))
    };
    let tail = if label.is_empty() || kind != BlockKind::Section {
        format!("[[END {}]]\n", kind.tag())
    } else {
        format!("[[END {}: {}]]\n", kind.tag(), one_line(label))
    };
    out.push_str(&head);
    out.push_str(body.trim());
    out.push('\n');
    out.push_str(&tail);
    out.push('\n');
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Deterministic linearization with explicit section sentinels.
pub fn flatten_for_prompt(article: &ParsedArticle) -> String {
    let mut out = String::new();
    push_block(&mut out, BlockKind::Title, "", &article.title);
    if !article.abstract_text.is_empty() {
        push_block(&mut out, BlockKind::Abstract, "", &article.abstract_text);
    }
    for s in &article.sections {
        push_block(&mut out, BlockKind::Section, &s.heading, &s.body);
    }
    for t in &article.tables {
        push_block(&mut out, BlockKind::Table, &t.caption, &t.flattened_text);
    }
    for c in &article.figure_captions {
        push_block(&mut out, BlockKind::Figure, "", c);
    }
    for s in &article.supplementary {
        push_block(&mut out, BlockKind::Supplementary, "", s);
    }
    out
}

pub fn flatten_with_layout(article: &ParsedArticle) -> FlatText {
    FlatText::parse(&flatten_for_prompt(article))
}
