//! Inverted index over the identifier, citation and fingerprint fields,
//! scored with the classic Lucene practical scoring function:
//!
//! ```text
//! score(q, d) = coord(q, d) · queryNorm(q) · Σ_{t ∈ q, t ∈ d} tf(t, d) · idf(t)² · boost(t) · norm(d)
//!   tf(t, d)     = √freq(t, d)
//!   idf(t)       = 1 + ln(docCount / (docFreq(t) + 1))
//!   norm(d)      = 1 / √fieldLength(d)
//!   coord(q, d)  = matched query terms / query terms
//!   queryNorm(q) = 1 / √Σ_{t ∈ q} (idf(t) · boost(t))²
//! ```
//!
//! # On-disk layout
//!
//! An index directory holds `manifest.json` (format version, document ids,
//! per-field statistics) and one binary file per field (`identifier.idx`,
//! `citation.idx`, `fingerprint.idx`). All integers are little-endian:
//!
//! ```text
//! magic  b"SSIF"
//! u32    format version
//! u32    field code (0 identifier, 1 citation, 2 fingerprint)
//! u32    doc count N, then N × u32 field lengths
//! u32    term count, then per term (sorted by term bytes):
//!          u32 byte length, term bytes (UTF-8),
//!          u32 entry count, entries × (u32 doc number, u32 term frequency)
//! u64    FNV-1a checksum of every preceding byte
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DocFeatures};
use crate::error::{Error, Result};
use crate::features::{fnv1a64, CitationSequence, FingerprintSet};

pub const INDEX_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"SSIF";
const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Identifier,
    Citation,
    Fingerprint,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Identifier, Field::Citation, Field::Fingerprint];

    fn code(self) -> u32 {
        self as u32
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Identifier => "identifier",
            Field::Citation => "citation",
            Field::Fingerprint => "fingerprint",
        }
    }

    fn file_name(self) -> String {
        format!("{}.idx", self.name())
    }
}

/// Citation terms are decimal global reference ids.
pub fn citation_term(id: crate::features::GlobalReferenceId) -> String {
    id.0.to_string()
}

/// Fingerprint terms are 16-digit lowercase hex.
pub fn fingerprint_term(hash: u64) -> String {
    format!("{hash:016x}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTerm {
    pub term: String,
    pub boost: f64,
}

impl QueryTerm {
    pub fn new(term: impl Into<String>, boost: f64) -> Self {
        QueryTerm {
            term: term.into(),
            boost,
        }
    }
}

/// Postings of one term, sorted by doc id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PostingList {
    pub term: String,
    pub entries: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldIndex {
    field: Field,
    /// term → (doc number, term frequency), doc numbers ascending
    postings: FxHashMap<String, Vec<(u32, u32)>>,
    doc_lengths: Vec<u32>,
}

impl FieldIndex {
    fn new(field: Field) -> Self {
        FieldIndex {
            field,
            postings: FxHashMap::default(),
            doc_lengths: Vec::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn doc_length(&self, doc: u32) -> u32 {
        self.doc_lengths[doc as usize]
    }

    fn add(&mut self, doc: u32, terms: impl IntoIterator<Item = (String, u32)>) {
        let mut length = 0;
        let mut merged: FxHashMap<String, u32> = FxHashMap::default();
        for (term, tf) in terms {
            *merged.entry(term).or_insert(0) += tf;
            length += tf;
        }
        for (term, tf) in merged {
            self.postings.entry(term).or_default().push((doc, tf));
        }
        self.doc_lengths.push(length);
    }

    fn term_freq(&self, term: &str, doc: u32) -> u32 {
        self.postings
            .get(term)
            .and_then(|p| p.binary_search_by_key(&doc, |e| e.0).ok().map(|i| p[i].1))
            .unwrap_or(0)
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.doc_lengths.len() as f64;
        1.0 + (n / (self.doc_freq(term) as f64 + 1.0)).ln()
    }

    fn norm(&self, doc: u32) -> f64 {
        let len = self.doc_lengths[doc as usize];
        if len == 0 {
            0.0
        } else {
            1.0 / (len as f64).sqrt()
        }
    }

    fn query_norm(&self, query: &[QueryTerm]) -> f64 {
        let sum: f64 = query
            .iter()
            .map(|q| {
                let w = self.idf(&q.term) * q.boost;
                w * w
            })
            .sum();
        if sum > 0.0 {
            1.0 / sum.sqrt()
        } else {
            0.0
        }
    }
}

/// The three field indexes plus the document-number table.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    doc_ids: Vec<String>,
    by_id: HashMap<String, u32>,
    fields: [FieldIndex; 3],
}

impl Default for CorpusIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl CorpusIndex {
    pub fn new() -> Self {
        CorpusIndex {
            doc_ids: Vec::new(),
            by_id: HashMap::new(),
            fields: Field::ALL.map(FieldIndex::new),
        }
    }

    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let mut index = CorpusIndex::new();
        for f in corpus.features() {
            index.add_features(f)?;
        }
        Ok(index)
    }

    pub fn add_features(&mut self, f: &DocFeatures) -> Result<()> {
        let identifiers = f
            .histogram
            .counts()
            .iter()
            .map(|(s, &c)| (s.clone(), c));
        self.insert(&f.doc_id, identifiers, &f.citations, &f.fingerprints)
    }

    /// Index one document. Identifier multiplicity is kept as term frequency.
    pub fn add_document<S: AsRef<str>>(
        &mut self,
        doc_id: &str,
        identifiers: &[S],
        citations: &CitationSequence,
        fingerprints: &FingerprintSet,
    ) -> Result<()> {
        let identifiers = identifiers.iter().map(|s| (s.as_ref().to_string(), 1));
        self.insert(doc_id, identifiers, citations, fingerprints)
    }

    fn insert(
        &mut self,
        doc_id: &str,
        identifiers: impl Iterator<Item = (String, u32)>,
        citations: &CitationSequence,
        fingerprints: &FingerprintSet,
    ) -> Result<()> {
        if self.by_id.contains_key(doc_id) {
            return Err(Error::DuplicateDocument(doc_id.to_string()));
        }
        let doc = self.doc_ids.len() as u32;
        self.doc_ids.push(doc_id.to_string());
        self.by_id.insert(doc_id.to_string(), doc);

        let [ident, cite, fp] = &mut self.fields;
        ident.add(doc, identifiers);
        cite.add(doc, citations.items.iter().map(|g| (citation_term(*g), 1)));
        fp.add(doc, fingerprints.hashes.iter().map(|h| (fingerprint_term(*h), 1)));
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.by_id.contains_key(doc_id)
    }

    pub fn field(&self, field: Field) -> &FieldIndex {
        &self.fields[field as usize]
    }

    pub fn field_length(&self, field: Field, doc_id: &str) -> Option<u32> {
        self.by_id.get(doc_id).map(|&d| self.field(field).doc_length(d))
    }

    pub fn posting_list(&self, field: Field, term: &str) -> Option<PostingList> {
        let entries = self.field(field).postings.get(term)?;
        let mut entries: Vec<(String, u32)> = entries
            .iter()
            .map(|&(d, tf)| (self.doc_ids[d as usize].clone(), tf))
            .collect();
        entries.sort();
        Some(PostingList {
            term: term.to_string(),
            entries,
        })
    }

    /// Score one document; 0 when nothing matches or the doc is unknown.
    pub fn score(&self, query: &[QueryTerm], field: Field, doc_id: &str) -> f64 {
        let Some(&doc) = self.by_id.get(doc_id) else {
            return 0.0;
        };
        let fi = self.field(field);
        if query.is_empty() {
            return 0.0;
        }
        let mut matched = 0u32;
        let mut acc = 0.0;
        for q in query {
            let tf = fi.term_freq(&q.term, doc);
            if tf > 0 {
                matched += 1;
                let idf = fi.idf(&q.term);
                acc += (tf as f64).sqrt() * idf * idf * q.boost * fi.norm(doc);
            }
        }
        if matched == 0 {
            return 0.0;
        }
        let coord = matched as f64 / query.len() as f64;
        coord * fi.query_norm(query) * acc
    }

    /// Top `k` documents by descending score, ties by ascending doc id.
    /// Only documents matching at least one term are returned.
    pub fn query_top_k(&self, query: &[QueryTerm], field: Field, k: usize) -> Vec<(String, f64)> {
        if query.is_empty() || k == 0 {
            return Vec::new();
        }
        let fi = self.field(field);
        let mut acc: FxHashMap<u32, (f64, u32)> = FxHashMap::default();
        for q in query {
            let Some(postings) = fi.postings.get(&q.term) else { continue };
            let idf = fi.idf(&q.term);
            for &(doc, tf) in postings {
                let e = acc.entry(doc).or_insert((0.0, 0));
                e.0 += (tf as f64).sqrt() * idf * idf * q.boost * fi.norm(doc);
                e.1 += 1;
            }
        }
        let query_norm = fi.query_norm(query);
        let mut scored: Vec<(u32, f64)> = acc
            .into_iter()
            .map(|(doc, (sum, matched))| {
                let coord = matched as f64 / query.len() as f64;
                (doc, coord * query_norm * sum)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.doc_ids[a.0 as usize].cmp(&self.doc_ids[b.0 as usize]))
        });
        scored.truncate(k);
        scored
            .into_iter()
            .map(|(d, s)| (self.doc_ids[d as usize].clone(), s))
            .collect()
    }

    pub fn persist(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut stats = Vec::new();
        for fi in &self.fields {
            let bytes = encode_field(fi);
            let path = dir.join(fi.field.file_name());
            fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            stats.push(FieldStats {
                field: fi.field,
                terms: fi.postings.len(),
                postings: fi.postings.values().map(Vec::len).sum(),
                total_length: fi.doc_lengths.iter().map(|&l| l as u64).sum(),
                bytes: bytes.len() as u64,
            });
        }
        let manifest = Manifest {
            version: INDEX_VERSION,
            doc_count: self.doc_ids.len(),
            doc_ids: self.doc_ids.clone(),
            fields: stats,
        };
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_slice(&bytes).map_err(|e| Error::IndexCorrupt {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if manifest.version != INDEX_VERSION {
            return Err(Error::IndexVersion {
                expected: INDEX_VERSION,
                found: manifest.version,
            });
        }
        if manifest.doc_ids.len() != manifest.doc_count {
            return Err(Error::IndexCorrupt {
                path,
                message: "doc_count disagrees with doc_ids".into(),
            });
        }
        let mut fields = Vec::new();
        for field in Field::ALL {
            let path = dir.join(field.file_name());
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let fi = decode_field(&bytes, field, manifest.doc_count).map_err(|message| match message {
                DecodeError::Version(found) => Error::IndexVersion {
                    expected: INDEX_VERSION,
                    found,
                },
                DecodeError::Corrupt(message) => Error::IndexCorrupt {
                    path: path.clone(),
                    message,
                },
            })?;
            fields.push(fi);
        }
        let fields: [FieldIndex; 3] = fields.try_into().expect("three fields");
        let by_id = manifest
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as u32))
            .collect();
        Ok(CorpusIndex {
            doc_ids: manifest.doc_ids,
            by_id,
            fields,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    doc_count: usize,
    doc_ids: Vec<String>,
    fields: Vec<FieldStats>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldStats {
    field: Field,
    terms: usize,
    postings: usize,
    total_length: u64,
    bytes: u64,
}

fn encode_field(fi: &FieldIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    out.extend_from_slice(&fi.field.code().to_le_bytes());
    out.extend_from_slice(&(fi.doc_lengths.len() as u32).to_le_bytes());
    for l in &fi.doc_lengths {
        out.extend_from_slice(&l.to_le_bytes());
    }
    let mut terms: Vec<&String> = fi.postings.keys().collect();
    terms.sort();
    out.extend_from_slice(&(terms.len() as u32).to_le_bytes());
    for t in terms {
        let entries = &fi.postings[t];
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
        out.extend_from_slice(t.as_bytes());
        out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
        for &(d, tf) in entries {
            out.extend_from_slice(&d.to_le_bytes());
            out.extend_from_slice(&tf.to_le_bytes());
        }
    }
    let checksum = fnv1a64(&out);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

enum DecodeError {
    Version(u32),
    Corrupt(String),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], DecodeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(DecodeError::Corrupt(format!(
                "truncated at byte {} (wanted {n} more)",
                self.pos
            ))),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn decode_field(bytes: &[u8], field: Field, doc_count: usize) -> std::result::Result<FieldIndex, DecodeError> {
    let corrupt = |m: &str| DecodeError::Corrupt(m.to_string());
    if bytes.len() < 4 + 4 + 8 || &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic or file too short"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != INDEX_VERSION {
        return Err(DecodeError::Version(version));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(corrupt("checksum mismatch"));
    }

    let mut r = Reader { bytes: body, pos: 8 };
    if r.u32()? != field.code() {
        return Err(corrupt("field code mismatch"));
    }
    let n = r.u32()? as usize;
    if n != doc_count {
        return Err(corrupt("doc count disagrees with manifest"));
    }
    let mut doc_lengths = Vec::with_capacity(n);
    for _ in 0..n {
        doc_lengths.push(r.u32()?);
    }
    let terms = r.u32()? as usize;
    let mut postings = FxHashMap::default();
    for _ in 0..terms {
        let len = r.u32()? as usize;
        let term = std::str::from_utf8(r.take(len)?)
            .map_err(|_| corrupt("term is not UTF-8"))?
            .to_string();
        let count = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count.min(n));
        for _ in 0..count {
            let d = r.u32()?;
            let tf = r.u32()?;
            if d as usize >= n || tf == 0 {
                return Err(corrupt("posting entry out of range"));
            }
            entries.push((d, tf));
        }
        postings.insert(term, entries);
    }
    if r.pos != body.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(FieldIndex {
        field,
        postings,
        doc_lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::GlobalReferenceId;

    fn empty() -> (CitationSequence, FingerprintSet) {
        (CitationSequence::default(), FingerprintSet::default())
    }

    #[test]
    fn add_document_postings() {
        let mut idx = CorpusIndex::new();
        let (c, f) = empty();
        idx.add_document("d1", &["x", "x", "y"], &c, &f).unwrap();
        idx.add_document("d0", &["x"], &c, &f).unwrap();
        let px = idx.posting_list(Field::Identifier, "x").unwrap();
        assert_eq!(px.entries, vec![("d0".to_string(), 1), ("d1".to_string(), 2)]);
        assert_eq!(
            idx.posting_list(Field::Identifier, "y").unwrap().entries,
            vec![("d1".to_string(), 1)]
        );
        assert_eq!(idx.field_length(Field::Identifier, "d1"), Some(3));
        assert_eq!(idx.field_length(Field::Fingerprint, "d1"), Some(0));
        assert!(idx.posting_list(Field::Fingerprint, "00").is_none());
        assert!(matches!(
            idx.add_document("d1", &["z"], &c, &f),
            Err(Error::DuplicateDocument(_))
        ));
    }

    #[test]
    fn single_doc_hand_score() {
        let mut idx = CorpusIndex::new();
        let (c, f) = empty();
        idx.add_document("d", &["x"], &c, &f).unwrap();
        let idf = 1.0 + (1.0f64 / 2.0).ln();
        let s = idx.score(&[QueryTerm::new("x", 1.0)], Field::Identifier, "d");
        assert!((s - idf).abs() < 1e-12, "{s} vs {idf}");
        assert!((s - 0.306_852_819_440_054_7).abs() < 1e-12);
        // uniform boost leaves the score unchanged through queryNorm
        let s3 = idx.score(&[QueryTerm::new("x", 3.0)], Field::Identifier, "d");
        assert!((s3 - s).abs() < 1e-12);
        assert_eq!(idx.score(&[QueryTerm::new("q", 1.0)], Field::Identifier, "d"), 0.0);
    }

    #[test]
    fn top_k_limits_and_ties() {
        let mut idx = CorpusIndex::new();
        let (c, f) = empty();
        idx.add_document("b", &["x", "y"], &c, &f).unwrap();
        idx.add_document("a", &["x", "y"], &c, &f).unwrap();
        idx.add_document("c", &["x", "z"], &c, &f).unwrap();
        idx.add_document("d", &["w"], &c, &f).unwrap();
        let q = [QueryTerm::new("x", 1.0), QueryTerm::new("y", 1.0)];
        let top = idx.query_top_k(&q, Field::Identifier, 100);
        let ids: Vec<&str> = top.iter().map(|(d, _)| d.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(top[0].1, top[1].1);
        assert_eq!(idx.query_top_k(&q, Field::Identifier, 1).len(), 1);
    }

    #[test]
    fn citation_and_fingerprint_terms() {
        let mut idx = CorpusIndex::new();
        let cites = CitationSequence {
            items: vec![GlobalReferenceId(7), GlobalReferenceId(7), GlobalReferenceId(2)],
        };
        let fps = FingerprintSet {
            hashes: [0x10u64, 0xabc0].into_iter().collect(),
        };
        idx.add_document::<&str>("d", &[], &cites, &fps).unwrap();
        assert_eq!(idx.posting_list(Field::Citation, "7").unwrap().entries[0].1, 2);
        assert!(idx
            .posting_list(Field::Fingerprint, "0000000000000010")
            .is_some());
        assert_eq!(idx.field_length(Field::Citation, "d"), Some(3));
    }

    #[test]
    fn empty_index_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let idx = CorpusIndex::new();
        idx.persist(dir.path()).unwrap();
        let back = CorpusIndex::load(dir.path()).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.doc_count(), 0);
    }

    #[test]
    fn truncated_file_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let mut idx = CorpusIndex::new();
        let (c, f) = empty();
        idx.add_document("d", &["x", "y"], &c, &f).unwrap();
        idx.persist(dir.path()).unwrap();
        let path = dir.path().join("identifier.idx");
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(
            CorpusIndex::load(dir.path()),
            Err(Error::IndexCorrupt { .. })
        ));
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        CorpusIndex::new().persist(dir.path()).unwrap();
        let path = dir.path().join(MANIFEST);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\"version\": 1", "\"version\": 99")).unwrap();
        assert!(matches!(
            CorpusIndex::load(dir.path()),
            Err(Error::IndexVersion { found: 99, .. })
        ));
    }
}
