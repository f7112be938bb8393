//! A consolidated, feature-extracted document collection and its on-disk store.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::doc_model::{normalize_author, validate, validate_corpus, Document};
use crate::error::{Error, Result};
use crate::features::{
    build_histogram, consolidate_references, fingerprint_text, resolve_citations, CitationSequence,
    ConsolidationConfig, FingerprintSet, GlobalReferenceId, IdentifierHistogram, ReferenceKey,
};
use crate::measures::normalize_for_encoplot;

/// Everything the retrieval and analysis stages need from one document.
#[derive(Debug, Clone)]
pub struct DocFeatures {
    pub doc_id: String,
    /// Normalised `"surname, i"` author names.
    pub authors: Vec<String>,
    pub date: Option<NaiveDate>,
    /// Global id this document itself carries when other documents cite it.
    pub self_ref: Option<GlobalReferenceId>,
    /// Interned identifier sequence in document order.
    pub identifiers: Vec<u32>,
    pub histogram: IdentifierHistogram,
    pub citations: CitationSequence,
    pub references: BTreeSet<GlobalReferenceId>,
    pub fingerprints: FingerprintSet,
    /// Text normalised for character-gram comparison.
    pub text: Vec<char>,
}

impl DocFeatures {
    pub fn shares_author(&self, other: &DocFeatures) -> bool {
        self.authors.iter().any(|a| other.authors.contains(a))
    }

    /// True when this document's reference list resolves to `other`.
    pub fn cites(&self, other: &DocFeatures) -> bool {
        other
            .self_ref
            .is_some_and(|id| self.references.contains(&id))
    }
}

/// Feature counts per document in the corpus, as printed after ingest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub references: usize,
    pub citations: usize,
    pub resolved_citations: usize,
    pub fingerprints: usize,
    pub identifiers: usize,
    pub histogram_entries: usize,
    pub distinct_cited_works: usize,
}

impl CorpusSummary {
    pub fn per_document(&self, total: usize) -> f64 {
        if self.documents == 0 {
            0.0
        } else {
            total as f64 / self.documents as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    features: Vec<DocFeatures>,
    by_id: HashMap<String, usize>,
    symbols: Vec<String>,
    consolidation: ConsolidationConfig,
}

impl Corpus {
    /// Validate, consolidate references across all documents and extract
    /// features. Any invalid document fails the whole build.
    pub fn build(mut documents: Vec<Document>, consolidation: &ConsolidationConfig) -> Result<Corpus> {
        let mut violations = validate_corpus(&documents);
        for d in &documents {
            violations.extend(validate(d).into_iter().map(|mut v| {
                v.field = format!("{}: {}", d.doc_id, v.field);
                v
            }));
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }

        for d in &mut documents {
            d.authors = d.authors.iter().map(|a| normalize_author(a)).collect();
        }

        // every reference entry, then one pseudo-entry per document so that
        // references resolve to corpus members
        let mut keys = Vec::new();
        for d in &documents {
            keys.extend(d.references.iter().map(|r| ReferenceKey::new(&r.title, &r.authors)));
        }
        let doc_keys_start = keys.len();
        keys.extend(documents.iter().map(|d| ReferenceKey::new(&d.title, &d.authors)));
        let ids = consolidate_references(&keys, consolidation);

        let mut next = 0;
        for d in &mut documents {
            for r in &mut d.references {
                r.global_id = Some(ids[next]);
                next += 1;
            }
        }
        let self_refs: Vec<Option<GlobalReferenceId>> = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (!d.title.trim().is_empty()).then(|| ids[doc_keys_start + i]))
            .collect();

        let mut interner: FxHashMap<String, u32> = FxHashMap::default();
        let mut symbols = Vec::new();
        let interned: Vec<Vec<u32>> = documents
            .iter()
            .map(|d| {
                d.identifiers
                    .iter()
                    .map(|ident| {
                        *interner.entry(ident.0.clone()).or_insert_with(|| {
                            symbols.push(ident.0.clone());
                            (symbols.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();

        let features: Vec<DocFeatures> = documents
            .par_iter()
            .zip(interned)
            .zip(self_refs)
            .map(|((d, identifiers), self_ref)| extract(d, identifiers, self_ref))
            .collect();

        let by_id = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i))
            .collect();

        Ok(Corpus {
            documents,
            features,
            by_id,
            symbols,
            consolidation: *consolidation,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn features(&self) -> &[DocFeatures] {
        &self.features
    }

    pub fn consolidation(&self) -> &ConsolidationConfig {
        &self.consolidation
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    pub fn document(&self, doc_id: &str) -> Result<&Document> {
        self.position(doc_id)
            .map(|i| &self.documents[i])
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
    }

    pub fn doc_features(&self, doc_id: &str) -> Result<&DocFeatures> {
        self.position(doc_id)
            .map(|i| &self.features[i])
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
    }

    pub fn symbol(&self, interned: u32) -> &str {
        &self.symbols[interned as usize]
    }

    pub fn summary(&self) -> CorpusSummary {
        let mut s = CorpusSummary {
            documents: self.len(),
            ..Default::default()
        };
        let mut works = BTreeSet::new();
        for (d, f) in self.documents.iter().zip(&self.features) {
            s.references += d.references.len();
            s.citations += d.citations.len();
            s.resolved_citations += f.citations.len();
            s.fingerprints += f.fingerprints.len();
            s.identifiers += f.identifiers.len();
            s.histogram_entries += f.histogram.distinct();
            works.extend(f.references.iter().copied());
        }
        s.distinct_cited_works = works.len();
        s
    }

    /// Write the consolidated documents as `documents.jsonl` plus a
    /// `corpus.json` manifest.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(DOCUMENTS_FILE);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for d in &self.documents {
            serde_json::to_writer(&mut w, d)?;
            w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let manifest = StoreManifest {
            version: STORE_VERSION,
            consolidation: self.consolidation,
            summary: self.summary(),
        };
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    /// Load a store written by [`Corpus::save`]. Features are re-derived;
    /// consolidation is deterministic so global ids come out identical.
    pub fn load(dir: &Path) -> Result<Corpus> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: StoreManifest = serde_json::from_slice(&bytes)?;
        if manifest.version != STORE_VERSION {
            return Err(Error::Config(format!(
                "corpus store version {} is not supported (expected {STORE_VERSION})",
                manifest.version
            )));
        }
        let path = dir.join(DOCUMENTS_FILE);
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut documents = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            documents.push(crate::doc_model::parse_json(line.as_bytes())?);
        }
        Corpus::build(documents, &manifest.consolidation)
    }
}

const STORE_VERSION: u32 = 1;
const DOCUMENTS_FILE: &str = "documents.jsonl";
const MANIFEST_FILE: &str = "corpus.json";

#[derive(Debug, Serialize, Deserialize)]
struct StoreManifest {
    version: u32,
    consolidation: ConsolidationConfig,
    summary: CorpusSummary,
}

fn extract(d: &Document, identifiers: Vec<u32>, self_ref: Option<GlobalReferenceId>) -> DocFeatures {
    let reference_ids: Vec<Option<GlobalReferenceId>> =
        d.references.iter().map(|r| r.global_id).collect();
    DocFeatures {
        doc_id: d.doc_id.clone(),
        authors: d.authors.clone(),
        date: d.date,
        self_ref,
        identifiers,
        histogram: build_histogram(&d.identifiers),
        citations: resolve_citations(d, &reference_ids),
        references: reference_ids.into_iter().flatten().collect(),
        fingerprints: fingerprint_text(&d.text),
        text: normalize_for_encoplot(&d.text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc_model::{CitationInstance, Identifier, ReferenceEntry};

    fn doc(id: &str, title: &str, author: &str, refs: &[(&str, &str)]) -> Document {
        Document {
            doc_id: id.into(),
            title: title.into(),
            authors: vec![author.into()],
            date: None,
            text: "some words in a row for testing".into(),
            identifiers: vec![Identifier::new("x"), Identifier::new("y"), Identifier::new("x")],
            citations: (0..refs.len())
                .map(|i| CitationInstance {
                    position: i,
                    ref_index: Some(i),
                })
                .collect(),
            references: refs
                .iter()
                .map(|(t, a)| ReferenceEntry::new(format!("{a}. {t}"), *t, vec![a.to_string()]))
                .collect(),
        }
    }

    #[test]
    fn references_resolve_to_corpus_documents() {
        let a = doc("a", "Entropy of Black Holes", "Lee, K", &[]);
        let b = doc(
            "b",
            "Something else",
            "Kim, S",
            &[("Entropy of Black Hole", "K. Lee"), ("Unrelated", "Park, J")],
        );
        let c = Corpus::build(vec![a, b], &ConsolidationConfig::default()).unwrap();
        let fa = c.doc_features("a").unwrap();
        let fb = c.doc_features("b").unwrap();
        assert!(fb.cites(fa));
        assert!(!fa.cites(fb));
        assert!(!fa.shares_author(fb));
        assert_eq!(fb.citations.len(), 2);
        assert_eq!(fb.citations.items[0], fa.self_ref.unwrap());
        assert_eq!(c.symbol(fa.identifiers[0]), "x");
        assert_eq!(fa.histogram.total() as usize, fa.identifiers.len());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = doc("a", "t", "Lee, K", &[]);
        let err = Corpus::build(vec![a.clone(), a], &ConsolidationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(v) if v.len() == 1));
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let docs = vec![
            doc("a", "First paper", "Lee, K", &[("W1", "Smith, J"), ("W2", "Jones, A")]),
            doc("b", "Second paper", "Kim, S", &[("W1", "Smith, J")]),
        ];
        let c = Corpus::build(docs, &ConsolidationConfig::default()).unwrap();
        c.save(dir.path()).unwrap();
        let back = Corpus::load(dir.path()).unwrap();
        assert_eq!(back.documents(), c.documents());
        assert_eq!(back.summary(), c.summary());
        assert_eq!(c.summary().distinct_cited_works, 2);
    }
}
