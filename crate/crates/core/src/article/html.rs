//! Generic HTML article parser.
//!
//! Walks the DOM once in document order. Headings open sections, `<table>`
//! and `<figure>` are lifted into their own fields, elements whose class or
//! id mentions "abstract" or "supplementary" route their text accordingly.
//! Any other markup contributes its text to the current section.

use ego_tree::NodeRef;
use scraper::{Html, Node};

use super::{ArticleParts, Section, Table};
use crate::text::{normalize_label, squash_whitespace};

const SKIP: &[&str] = &["script", "style", "noscript", "template", "svg", "math", "button", "nav"];
const BLOCKS: &[&str] = &[
    "p", "div", "section", "article", "li", "ul", "ol", "dl", "dt", "dd", "blockquote", "pre",
    "br", "hr", "header", "footer", "main", "aside", "figure", "figcaption", "h1", "h2", "h3",
    "h4", "h5", "h6", "table", "tr", "body",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Body,
    Abstract,
    Supplementary,
}

#[derive(Default)]
struct Walker {
    parts: ArticleParts,
    current: Option<usize>,
    supp_buf: String,
    doc_title: Option<String>,
    meta_title: Option<String>,
    pending_break: bool,
}

pub(crate) fn parse(source: &str) -> ArticleParts {
    let doc = Html::parse_document(source);
    let mut w = Walker::default();
    w.walk(doc.tree.root(), Mode::Body);
    w.flush_supplementary();
    if w.parts.title.is_none() {
        w.parts.title = w.meta_title.take().or(w.doc_title.take());
    }
    w.parts
}

fn text_of(node: NodeRef<'_, Node>) -> String {
    let mut out = String::new();
    collect_text(node, &mut out);
    squash_whitespace(&out)
}

fn collect_text(node: NodeRef<'_, Node>, out: &mut String) {
    for child in node.children() {
        match child.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) if SKIP.contains(&e.name()) => {}
            Node::Element(e) => {
                let block = BLOCKS.contains(&e.name()) || e.name() == "td" || e.name() == "th";
                if block {
                    out.push(' ');
                }
                collect_text(child, out);
                if block {
                    out.push(' ');
                }
            }
            _ => {}
        }
    }
}

fn marker(e: &scraper::node::Element) -> String {
    let mut s = String::new();
    if let Some(id) = e.id() {
        s.push_str(id);
        s.push(' ');
    }
    for c in e.classes() {
        s.push_str(c);
        s.push(' ');
    }
    s.to_lowercase()
}

/// Append `text` to `buf`, collapsing whitespace and inserting a paragraph
/// break when one is pending.
fn append(buf: &mut String, text: &str, pending_break: &mut bool) {
    let squashed = squash_whitespace(text);
    if squashed.is_empty() {
        return;
    }
    let leading_ws = text.starts_with(char::is_whitespace);
    if buf.is_empty() {
        buf.push_str(&squashed);
    } else if *pending_break {
        let trimmed = buf.trim_end().len();
        buf.truncate(trimmed);
        buf.push_str("\n\n");
        buf.push_str(&squashed);
    } else {
        if leading_ws && !buf.ends_with(char::is_whitespace) {
            buf.push(' ');
        }
        buf.push_str(&squashed);
    }
    if text.ends_with(char::is_whitespace) {
        buf.push(' ');
    }
    *pending_break = false;
}

impl Walker {
    fn walk(&mut self, node: NodeRef<'_, Node>, mode: Mode) {
        for child in node.children() {
            match child.value() {
                Node::Text(t) => self.push_text(t, mode),
                Node::Element(e) => self.element(child, e, mode),
                _ => {}
            }
        }
    }

    fn element(&mut self, node: NodeRef<'_, Node>, e: &scraper::node::Element, mode: Mode) {
        let name = e.name();
        if SKIP.contains(&name) {
            return;
        }
        match name {
            "head" => {
                self.head(node);
                return;
            }
            "table" => {
                self.table(node, None);
                self.pending_break = true;
                return;
            }
            "figure" => {
                self.figure(node, mode);
                self.pending_break = true;
                return;
            }
            "figcaption" => {
                self.parts.figure_captions.push(text_of(node));
                self.pending_break = true;
                return;
            }
            "h1" if self.parts.title.is_none() && mode == Mode::Body => {
                self.parts.title = Some(text_of(node));
                self.pending_break = true;
                return;
            }
            "h1" | "h2" | "h3" | "h4" | "h5" | "h6" => {
                self.heading(text_of(node), mode);
                return;
            }
            _ => {}
        }

        let m = marker(e);
        let inner_mode = if mode == Mode::Body && m.contains("abstract") {
            Mode::Abstract
        } else if mode != Mode::Supplementary && m.contains("supplementary") {
            self.flush_supplementary();
            Mode::Supplementary
        } else {
            mode
        };

        let saved = self.current;
        if name == "section" && inner_mode == Mode::Body {
            self.open_section(String::new());
        }
        let block = BLOCKS.contains(&name);
        if block {
            self.pending_break = true;
        }
        self.walk(node, inner_mode);
        if block {
            self.pending_break = true;
        }
        if inner_mode == Mode::Supplementary && mode != Mode::Supplementary {
            self.flush_supplementary();
        }
        if name == "section" && inner_mode == Mode::Body {
            self.current = saved;
        }
    }

    fn head(&mut self, node: NodeRef<'_, Node>) {
        for d in node.descendants() {
            if let Node::Element(e) = d.value() {
                match e.name() {
                    "title" => self.doc_title = Some(text_of(d)).filter(|t| !t.is_empty()),
                    "meta" => {
                        let key = e.attr("name").or(e.attr("property")).unwrap_or("").to_lowercase();
                        let content = e.attr("content").unwrap_or("").trim().to_string();
                        if content.is_empty() {
                            continue;
                        }
                        match key.as_str() {
                            "citation_title" | "dc.title" => self.meta_title = Some(content),
                            "citation_journal_title" | "prism.publicationname" => {
                                self.parts.journal = Some(content)
                            }
                            "citation_publication_date" | "citation_date" | "dc.date"
                            | "prism.publicationdate" => {
                                self.parts.year = content.get(..4).and_then(|y| y.parse().ok())
                            }
                            _ => {}
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    fn heading(&mut self, text: String, mode: Mode) {
        let key = normalize_label(&text);
        if mode == Mode::Abstract && key == "abstract" {
            return;
        }
        if mode == Mode::Supplementary {
            self.append_supp(&text);
            self.pending_break = true;
            return;
        }
        if key == "abstract" && mode == Mode::Body {
            // a bare "Abstract" heading: the section is routed to the abstract
            self.open_section(text);
            self.pending_break = true;
            return;
        }
        match self.current {
            Some(i) if self.parts.sections[i].heading.is_empty() && self.parts.sections[i].body.trim().is_empty() => {
                self.parts.sections[i].heading = text;
            }
            _ => self.open_section(text),
        }
        self.pending_break = true;
    }

    fn open_section(&mut self, heading: String) {
        self.parts.sections.push(Section { heading, body: String::new() });
        self.current = Some(self.parts.sections.len() - 1);
    }

    fn push_text(&mut self, text: &str, mode: Mode) {
        if text.trim().is_empty() {
            // keep word separation across inline elements
            if let Some(buf) = self.target_buf(mode, false) {
                if !buf.is_empty() && !buf.ends_with(char::is_whitespace) {
                    buf.push(' ');
                }
            }
            return;
        }
        let mut brk = self.pending_break;
        let buf = self.target_buf(mode, true).expect("target exists");
        append(buf, text, &mut brk);
        self.pending_break = brk;
    }

    fn target_buf(&mut self, mode: Mode, create: bool) -> Option<&mut String> {
        match mode {
            Mode::Abstract => Some(&mut self.parts.abstract_text),
            Mode::Supplementary => Some(&mut self.supp_buf),
            Mode::Body => {
                let routed_abstract = self
                    .current
                    .map(|i| normalize_label(&self.parts.sections[i].heading) == "abstract")
                    .unwrap_or(false);
                if routed_abstract {
                    return Some(&mut self.parts.abstract_text);
                }
                if self.current.is_none() {
                    if !create {
                        return None;
                    }
                    self.open_section("Body".to_string());
                }
                let i = self.current.unwrap();
                Some(&mut self.parts.sections[i].body)
            }
        }
    }

    fn append_supp(&mut self, text: &str) {
        let mut brk = self.pending_break;
        append(&mut self.supp_buf, text, &mut brk);
        self.pending_break = brk;
    }

    fn flush_supplementary(&mut self) {
        let s = self.supp_buf.trim().to_string();
        if !s.is_empty() {
            self.parts.supplementary.push(s);
        }
        self.supp_buf.clear();
    }

    fn figure(&mut self, node: NodeRef<'_, Node>, mode: Mode) {
        let has_table = node.descendants().any(|d| matches!(d.value(), Node::Element(e) if e.name() == "table"));
        let caption_node = node
            .children()
            .find(|c| matches!(c.value(), Node::Element(e) if e.name() == "figcaption"));
        let caption = caption_node.map(text_of).unwrap_or_default();
        if has_table {
            for d in node.children() {
                match d.value() {
                    Node::Element(e) if e.name() == "table" => self.table(d, Some(caption.clone())),
                    Node::Element(e) if e.name() == "figcaption" => {}
                    Node::Element(e) => self.element(d, e, mode),
                    Node::Text(t) => self.push_text(t, mode),
                    _ => {}
                }
            }
            return;
        }
        if !caption.is_empty() {
            self.parts.figure_captions.push(caption);
        }
        for d in node.children() {
            match d.value() {
                Node::Element(e) if e.name() == "figcaption" => {}
                Node::Element(e) => self.element(d, e, mode),
                Node::Text(t) => self.push_text(t, mode),
                _ => {}
            }
        }
    }

    fn table(&mut self, node: NodeRef<'_, Node>, outer_caption: Option<String>) {
        let mut caption = String::new();
        let mut rows = Vec::new();
        for d in node.descendants() {
            if let Node::Element(e) = d.value() {
                match e.name() {
                    "caption" => caption = text_of(d),
                    "tr" => {
                        let cells: Vec<String> = d
                            .children()
                            .filter(|c| matches!(c.value(), Node::Element(e) if e.name() == "td" || e.name() == "th"))
                            .map(text_of)
                            .collect();
                        if !cells.is_empty() {
                            rows.push(cells.join(" | "));
                        }
                    }
                    _ => {}
                }
            }
        }
        if caption.is_empty() {
            caption = outer_caption.unwrap_or_default();
        }
        self.parts.tables.push(Table { caption, flattened_text: rows.join("\n") });
    }
}
