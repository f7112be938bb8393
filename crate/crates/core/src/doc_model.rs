//! Document data model and the two ingest formats.
//!
//! Documents arrive either as a TEI-subset XML file (the unified format
//! produced by upstream PDF/LaTeX conversion) or as native JSON. Both are
//! parsed into the same [`Document`] value.
//!
//! Recognised TEI subset:
//!
//! * root `TEI`, document id from its `xml:id` attribute (falls back to the
//!   first `idno` in `teiHeader`);
//! * `teiHeader/fileDesc/titleStmt/title` and `.../author` (`persName` with
//!   `surname`/`forename`); publication date from `date/@when`;
//! * body text in `p` and `head` elements;
//! * formulae as `formula` wrapping MathML `math`; identifiers are the `ci`
//!   elements, in document order;
//! * in-text citations as `ref type="bibr" target="#bN"`;
//! * bibliography as `listBibl` of `biblStruct xml:id="bN"` with `title`,
//!   `author`, venue from `meeting` or a journal-level `monogr/title`, and an
//!   optional `note type="raw_reference"` carrying the original string.
//!
//! Anything else is not interpreted; a warning is recorded and traversal
//! continues into its children so running text is not lost.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use roxmltree::Node;
use serde::{Deserialize, Serialize};
use unicode_normalization::{char::is_combining_mark, UnicodeNormalization};

use crate::error::{Error, Result};
use crate::features::GlobalReferenceId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub text: String,
    pub identifiers: Vec<Identifier>,
    pub citations: Vec<CitationInstance>,
    pub references: Vec<ReferenceEntry>,
}

/// Content of one MathML content-identifier element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Identifier(pub String);

impl Identifier {
    pub fn new(symbol: impl Into<String>) -> Self {
        Identifier(symbol.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitationInstance {
    pub position: usize,
    /// `None` means the marker could not be linked to a bibliography entry.
    pub ref_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub raw: String,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_id: Option<GlobalReferenceId>,
}

impl ReferenceEntry {
    pub fn new(raw: impl Into<String>, title: impl Into<String>, authors: Vec<String>) -> Self {
        ReferenceEntry {
            raw: raw.into(),
            title: title.into(),
            authors,
            venue: None,
            global_id: None,
        }
    }
}

/// A broken document invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Lowercase, strip diacritics, collapse whitespace.
pub fn fold_text(s: &str) -> String {
    let stripped: String = s
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalise an author name to `"surname, i"` (first forename initial).
///
/// Accepts `"Surname, Forename"` and `"Forename Surname"`. Idempotent on its
/// own output.
pub fn normalize_author(raw: &str) -> String {
    let folded = fold_text(raw);
    let (surname, forename) = match folded.split_once(',') {
        Some((s, f)) => (s.trim().to_string(), f.trim().to_string()),
        None => {
            let mut tokens: Vec<&str> = folded.split(' ').filter(|t| !t.is_empty()).collect();
            match tokens.pop() {
                Some(last) => (last.to_string(), tokens.join(" ")),
                None => (String::new(), String::new()),
            }
        }
    };
    normalize_author_parts(&surname, &forename)
}

pub fn normalize_author_parts(surname: &str, forename: &str) -> String {
    let surname = fold_text(surname);
    let surname = surname.trim_end_matches('.').trim();
    let initial = fold_text(forename).chars().find(|c| c.is_alphanumeric());
    match initial {
        Some(i) if !surname.is_empty() => format!("{surname}, {i}"),
        _ => surname.to_string(),
    }
}

/// Surname part of a normalised author string.
pub fn author_surname(normalized: &str) -> &str {
    normalized.split(',').next().unwrap_or("").trim()
}

/// Result of a TEI parse: the document plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct TeiParse {
    pub document: Document,
    pub warnings: Vec<String>,
}

pub fn parse_tei(xml: &[u8]) -> Result<Document> {
    let parsed = parse_tei_with_warnings(xml)?;
    for w in &parsed.warnings {
        log::warn!("{}: {}", parsed.document.doc_id, w);
    }
    Ok(parsed.document)
}

pub fn parse_tei_with_warnings(xml: &[u8]) -> Result<TeiParse> {
    let text = std::str::from_utf8(xml).map_err(|e| {
        let (line, column) = line_col(xml, e.valid_up_to());
        Error::Xml {
            line,
            column,
            message: format!("invalid UTF-8: {e}"),
        }
    })?;
    let tree = roxmltree::Document::parse(text).map_err(|e| {
        // end-of-stream errors carry no position; point at the end instead
        let (line, column) = match e {
            roxmltree::Error::UnexpectedEndOfStream => line_col(xml, xml.len()),
            _ => (e.pos().row, e.pos().col),
        };
        Error::Xml {
            line,
            column,
            message: e.to_string(),
        }
    })?;

    let root = tree.root_element();
    if root.tag_name().name() != "TEI" {
        return Err(Error::Schema {
            field: "TEI".into(),
            message: format!("root element is <{}>, expected <TEI>", root.tag_name().name()),
        });
    }

    let mut walker = TeiWalker::default();

    let header = child(root, "teiHeader");
    let doc_id = root
        .attribute((roxmltree::NS_XML_URI, "id"))
        .map(str::to_string)
        .or_else(|| header.and_then(|h| descendant(h, "idno")).map(node_text))
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    if doc_id.is_empty() {
        return Err(Error::Validation(vec![Violation::new(
            "doc_id",
            "missing document id (TEI/@xml:id or teiHeader idno)",
        )]));
    }

    let mut title = String::new();
    let mut authors = Vec::new();
    let mut date = None;
    if let Some(header) = header {
        if let Some(stmt) = descendant(header, "titleStmt") {
            if let Some(t) = child(stmt, "title") {
                title = collapse(&node_text(t));
            }
            authors = stmt
                .children()
                .filter(|n| n.has_tag_name("author"))
                .filter_map(parse_person)
                .collect();
        }
        if let Some(d) = descendant(header, "date") {
            let raw = d.attribute("when").map(str::to_string).unwrap_or_else(|| node_text(d));
            date = parse_date(raw.trim());
            if date.is_none() {
                walker.warn(format!("unparseable date `{}`", raw.trim()));
            }
        }
    }

    for node in root.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "teiHeader" => {}
            "text" => walker.walk(node),
            other => walker.warn_unknown(other),
        }
    }

    let by_xml_id: HashMap<&str, usize> = walker
        .bibl_ids
        .iter()
        .enumerate()
        .filter_map(|(i, id)| id.as_deref().map(|id| (id, i)))
        .collect();
    let citations = walker
        .citation_targets
        .iter()
        .enumerate()
        .map(|(position, target)| CitationInstance {
            position,
            ref_index: target.as_deref().and_then(|t| by_xml_id.get(t).copied()),
        })
        .collect();

    let TeiWalker {
        paragraphs,
        identifiers,
        references,
        warnings,
        ..
    } = walker;
    let document = Document {
        doc_id,
        title,
        authors,
        date,
        text: paragraphs.join("\n"),
        identifiers,
        citations,
        references,
    };
    Ok(TeiParse {
        document,
        warnings: warnings.into_iter().collect(),
    })
}

#[derive(Default)]
struct TeiWalker {
    paragraphs: Vec<String>,
    current: Option<String>,
    identifiers: Vec<Identifier>,
    citation_targets: Vec<Option<String>>,
    references: Vec<ReferenceEntry>,
    bibl_ids: Vec<Option<String>>,
    warnings: BTreeSet<String>,
}

const STRUCTURAL: &[&str] = &[
    "text", "front", "body", "back", "div", "abstract", "figure", "figDesc", "table", "row",
    "cell", "list", "item", "label", "note", "hi", "emph", "s", "lb", "graphic", "quote",
];

impl TeiWalker {
    fn warn(&mut self, msg: String) {
        self.warnings.insert(msg);
    }

    fn warn_unknown(&mut self, name: &str) {
        self.warnings.insert(format!("unknown element <{name}> not interpreted"));
    }

    fn walk(&mut self, node: Node) {
        for n in node.children() {
            if n.is_text() {
                if let Some(buf) = self.current.as_mut() {
                    buf.push_str(n.text().unwrap_or(""));
                }
                continue;
            }
            if !n.is_element() {
                continue;
            }
            match n.tag_name().name() {
                "p" | "head" => {
                    let outer = self.current.take();
                    self.current = Some(String::new());
                    self.walk(n);
                    let para = collapse(&self.current.take().unwrap_or_default());
                    if !para.is_empty() {
                        self.paragraphs.push(para);
                    }
                    self.current = outer;
                    if let Some(buf) = self.current.as_mut() {
                        buf.push(' ');
                    }
                }
                "formula" => self.formula(n),
                // a bare math element outside <formula> still carries identifiers
                "math" => self.formula(n),
                "ref" => {
                    if n.attribute("type") == Some("bibr") {
                        self.citation(n);
                    } else {
                        self.walk(n);
                    }
                }
                "listBibl" => self.bibliography(n),
                name if STRUCTURAL.contains(&name) => self.walk(n),
                other => {
                    self.warn_unknown(other);
                    self.walk(n);
                }
            }
        }
    }

    fn formula(&mut self, node: Node) {
        for ci in node.descendants().filter(|n| n.has_tag_name("ci")) {
            let symbol = node_text(ci).trim().to_string();
            if symbol.is_empty() {
                self.warn("empty <ci> element ignored".into());
            } else {
                self.identifiers.push(Identifier(symbol));
            }
        }
        if let Some(buf) = self.current.as_mut() {
            buf.push(' ');
        }
    }

    fn citation(&mut self, node: Node) {
        match node.attribute("target") {
            Some(targets) if !targets.trim().is_empty() => {
                for t in targets.split_whitespace() {
                    self.citation_targets
                        .push(Some(t.trim_start_matches('#').to_string()));
                }
            }
            _ => self.citation_targets.push(None),
        }
        if let Some(buf) = self.current.as_mut() {
            buf.push(' ');
        }
    }

    fn bibliography(&mut self, node: Node) {
        for entry in node.children().filter(|n| n.is_element()) {
            match entry.tag_name().name() {
                "biblStruct" => {
                    let id = entry
                        .attribute((roxmltree::NS_XML_URI, "id"))
                        .map(str::to_string);
                    self.bibl_ids.push(id);
                    let reference = parse_bibl(entry);
                    if reference.title.is_empty() {
                        self.warn("bibliography entry without title".into());
                    }
                    self.references.push(reference);
                }
                "head" => {}
                "listBibl" => self.bibliography(entry),
                other => self.warn_unknown(other),
            }
        }
    }
}

fn parse_bibl(entry: Node) -> ReferenceEntry {
    let analytic = child(entry, "analytic");
    let monogr = child(entry, "monogr");

    let title = analytic
        .and_then(|a| child(a, "title"))
        .or_else(|| monogr.and_then(|m| child(m, "title")))
        .map(|t| collapse(&node_text(t)))
        .unwrap_or_default();

    let venue = entry
        .descendants()
        .find(|n| n.has_tag_name("meeting"))
        .map(|m| collapse(&node_text(m)))
        .or_else(|| {
            // journal title only counts as venue when the work has its own analytic title
            analytic?;
            monogr
                .and_then(|m| {
                    m.children().find(|n| {
                        n.has_tag_name("title") && matches!(n.attribute("level"), Some("j") | Some("m"))
                    })
                })
                .map(|t| collapse(&node_text(t)))
        })
        .filter(|v| !v.is_empty());

    let authors: Vec<String> = entry
        .descendants()
        .filter(|n| n.has_tag_name("author"))
        .filter_map(parse_person)
        .collect();

    let raw = entry
        .descendants()
        .find(|n| n.has_tag_name("note") && n.attribute("type") == Some("raw_reference"))
        .map(|n| collapse(&node_text(n)))
        .filter(|r| !r.is_empty())
        .unwrap_or_else(|| collapse(&node_text(entry)));

    ReferenceEntry {
        raw,
        title,
        authors,
        venue,
        global_id: None,
    }
}

fn parse_person(author: Node) -> Option<String> {
    let person = child(author, "persName").unwrap_or(author);
    let surname = child(person, "surname").map(node_text);
    let name = match surname {
        Some(surname) => {
            let forename = person
                .children()
                .find(|n| n.has_tag_name("forename"))
                .map(node_text)
                .unwrap_or_default();
            normalize_author_parts(&surname, &forename)
        }
        None => normalize_author(&node_text(person)),
    };
    (!name.is_empty()).then_some(name)
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .or_else(|| NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d").ok())
        .or_else(|| NaiveDate::parse_from_str(&format!("{raw}-01-01"), "%Y-%m-%d").ok())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn descendant<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.descendants().find(|n| n.has_tag_name(name))
}

fn node_text(node: Node) -> String {
    let mut out = String::new();
    for t in node.descendants().filter(|n| n.is_text()) {
        out.push_str(t.text().unwrap_or(""));
        out.push(' ');
    }
    out
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn line_col(bytes: &[u8], offset: usize) -> (u32, u32) {
    let prefix = &bytes[..offset.min(bytes.len())];
    let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
    let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() as u32 + 1;
    (line, column)
}

/// Input format of a document file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocFormat {
    Auto,
    Tei,
    Json,
}

impl std::str::FromStr for DocFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(DocFormat::Auto),
            "tei" | "xml" => Ok(DocFormat::Tei),
            "json" => Ok(DocFormat::Json),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

impl DocFormat {
    /// Resolve `Auto` from the file extension, then from the first
    /// non-blank byte.
    pub fn detect(self, path: &std::path::Path, bytes: &[u8]) -> DocFormat {
        if self != DocFormat::Auto {
            return self;
        }
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => DocFormat::Json,
            Some("xml" | "tei") => DocFormat::Tei,
            _ => match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
                Some(b'{') => DocFormat::Json,
                _ => DocFormat::Tei,
            },
        }
    }
}

/// Parse one file in the given format; warnings are only produced for TEI.
pub fn read_document(path: &std::path::Path, format: DocFormat) -> Result<TeiParse> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format.detect(path, &bytes) {
        DocFormat::Json => Ok(TeiParse {
            document: parse_json(&bytes)?,
            warnings: Vec::new(),
        }),
        _ => parse_tei_with_warnings(&bytes),
    }
}

pub fn parse_json(bytes: &[u8]) -> Result<Document> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            field: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn serialize_json(doc: &Document) -> Vec<u8> {
    serde_json::to_vec_pretty(doc).expect("Document serialization is infallible")
}

/// Check every per-document invariant. Empty result means valid.
pub fn validate(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    if doc.doc_id.trim().is_empty() {
        out.push(Violation::new("doc_id", "must be non-empty"));
    }
    for (i, ident) in doc.identifiers.iter().enumerate() {
        if ident.0.is_empty() {
            out.push(Violation::new(format!("identifiers[{i}]"), "symbol must be non-empty"));
        } else if ident.0.trim() != ident.0 {
            out.push(Violation::new(
                format!("identifiers[{i}]"),
                "symbol must be whitespace-trimmed",
            ));
        }
    }
    for (i, c) in doc.citations.iter().enumerate() {
        if c.position != i {
            out.push(Violation::new(
                format!("citations[{i}].position"),
                format!("expected position {i}, found {}", c.position),
            ));
        }
        if let Some(r) = c.ref_index {
            if r >= doc.references.len() {
                out.push(Violation::new(
                    format!("citations[{i}].ref_index"),
                    format!(
                        "index {r} out of range for {} references",
                        doc.references.len()
                    ),
                ));
            }
        }
    }
    for (i, r) in doc.references.iter().enumerate() {
        if r.raw.trim().is_empty() {
            out.push(Violation::new(format!("references[{i}].raw"), "must be non-empty"));
        }
    }
    out
}

/// Corpus-level checks: currently doc_id uniqueness.
pub fn validate_corpus<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Vec<Violation> {
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    let mut out = Vec::new();
    for d in docs {
        if !seen.insert(d.doc_id.as_str()) && reported.insert(d.doc_id.as_str()) {
            out.push(Violation::new(
                "doc_id",
                format!("duplicate doc_id `{}` in corpus", d.doc_id),
            ));
        }
    }
    out
}
