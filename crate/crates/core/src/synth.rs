//! Synthetic corpus generator with planted reuse cases.
//!
//! Documents belong to topics. Each draws its identifiers from a mix of a
//! corpus-wide pool, its topic's pool and a few rare symbols, with
//! Zipf-like weights; references come from its topic's pool of works and
//! occasionally from older corpus documents. A plant turns one generated
//! document into a derivative of a source: the source is cut into
//! segments and a chosen fraction of them is copied in place, so the
//! derived document keeps the source's length and order.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::doc_model::{serialize_json, CitationInstance, Document, Identifier, ReferenceEntry};
use crate::error::{Error, Result};
use crate::pipeline::{cases_to_csv, TestCase};

/// Distribution parameters. Defaults follow typical per-document averages
/// of a large STEM preprint collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub topics: usize,
    pub identifiers_per_doc: usize,
    pub symbols_per_doc: usize,
    pub references_per_doc: usize,
    pub citations_per_doc: usize,
    pub words_per_doc: usize,
    pub works_per_topic: usize,
    pub vocabulary_size: usize,
    /// Probability that a reference points at an older corpus document.
    pub corpus_reference_rate: f64,
    /// Probability that a citation marker cannot be resolved.
    pub unresolved_citation_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            topics: 20,
            identifiers_per_doc: 1513,
            symbols_per_doc: 70,
            references_per_doc: 21,
            citations_per_doc: 30,
            words_per_doc: 800,
            works_per_topic: 400,
            vocabulary_size: 6000,
            corpus_reference_rate: 0.03,
            unresolved_citation_rate: 0.05,
        }
    }
}

/// Citation relation to enforce between a derived document and its source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiteRelation {
    #[default]
    None,
    /// The newer derived document lists the older source.
    DerivedCitesSource,
    /// The older source lists the newer derived document.
    SourceCitesDerived,
}

/// One planted derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSpec {
    /// Index of the source document; chosen at random when absent.
    pub source: Option<usize>,
    pub identifier_fraction: f64,
    pub citation_fraction: f64,
    pub text_fraction: f64,
    pub share_author: bool,
    pub cite: CiteRelation,
}

impl Default for PlantSpec {
    fn default() -> Self {
        PlantSpec {
            source: None,
            identifier_fraction: 0.5,
            citation_fraction: 0.4,
            text_fraction: 0.3,
            share_author: false,
            cite: CiteRelation::None,
        }
    }
}

impl PlantSpec {
    /// Check fractions and that `source` indexes one of `n_docs` documents.
    pub fn validate(&self, n_docs: usize) -> Result<()> {
        for (name, f) in [
            ("identifier_fraction", self.identifier_fraction),
            ("citation_fraction", self.citation_fraction),
            ("text_fraction", self.text_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidPlantSpec(format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        if self.identifier_fraction == 0.0 && self.citation_fraction == 0.0 && self.text_fraction == 0.0 {
            return Err(Error::InvalidPlantSpec("plant copies nothing".into()));
        }
        if let Some(s) = self.source {
            if s >= n_docs {
                return Err(Error::InvalidPlantSpec(format!(
                    "source {s} is not one of the {n_docs} documents"
                )));
            }
        }
        Ok(())
    }
}

/// A planted pair as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantRecord {
    pub case_id: String,
    pub query_doc: String,
    pub source_doc: String,
    pub spec: PlantSpec,
}

impl PlantRecord {
    pub fn case(&self) -> TestCase {
        TestCase {
            case_id: self.case_id.clone(),
            query_doc: self.query_doc.clone(),
            source_doc: self.source_doc.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub plants: Vec<PlantRecord>,
    topics: Vec<usize>,
    seed: u64,
    config: SynthConfig,
}

impl SyntheticCorpus {
    pub fn cases(&self) -> Vec<TestCase> {
        self.plants.iter().map(PlantRecord::case).collect()
    }

    /// Write `documents/<doc_id>.json` per document plus `plants.json`
    /// and `cases.csv` manifests.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let docs = dir.join(DOCUMENTS_DIR);
        fs::create_dir_all(&docs).map_err(|e| Error::io(&docs, e))?;
        for d in &self.documents {
            let path = docs.join(format!("{}.json", d.doc_id));
            fs::write(&path, serialize_json(d)).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(PLANTS_FILE);
        fs::write(&path, serde_json::to_vec_pretty(&self.plants)?).map_err(|e| Error::io(&path, e))?;
        let path = dir.join(CASES_FILE);
        fs::write(&path, cases_to_csv(&self.cases())?).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

pub const DOCUMENTS_DIR: &str = "documents";
pub const PLANTS_FILE: &str = "plants.json";
pub const CASES_FILE: &str = "cases.csv";

pub fn doc_id(i: usize) -> String {
    format!("doc-{i:05}")
}

const SYLLABLES: &[&str] = &[
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "ri", "so", "tu", "va", "we", "xi",
    "yo", "za", "an", "el", "in", "or", "us", "ter", "ment", "tion", "al", "ic", "ous", "ar", "en", "ist", "um",
];

const LETTERS: &[&str] = &[
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "p", "q", "r", "s", "t", "u", "v", "w",
    "x", "y", "z", "A", "B", "C", "D", "E", "F", "G", "H", "L", "M", "N", "P", "R", "S", "T", "\u{3b1}",
    "\u{3b2}", "\u{3b3}", "\u{3b4}", "\u{3b5}", "\u{3b8}", "\u{3bb}", "\u{3bc}", "\u{3c0}", "\u{3c3}", "\u{3c6}",
    "\u{3c9}",
];

const COMMON_SYMBOLS: usize = 40;
const TOPIC_SYMBOLS: usize = 150;
const RARE_SYMBOLS: usize = 20_000;
const SURNAMES: usize = 3000;

struct Vocab {
    words: Vec<String>,
    /// Cumulative Zipf weights over `words`.
    cumulative: Vec<f64>,
    surnames: Vec<String>,
}

impl Vocab {
    fn new(size: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut seen = BTreeSet::new();
        let mut words = Vec::with_capacity(size);
        while words.len() < size {
            let w = pseudo_word(rng, 1, 4);
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        let mut surnames = Vec::with_capacity(SURNAMES);
        while surnames.len() < SURNAMES {
            let w = pseudo_word(rng, 2, 4);
            if seen.insert(w.clone()) {
                surnames.push(capitalize(&w));
            }
        }
        Vocab {
            cumulative: zipf_cumulative(words.len(), 1.0),
            words,
            surnames,
        }
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> &str {
        &self.words[sample_cumulative(&self.cumulative, rng)]
    }

    /// A title drawn from the tail of the vocabulary, so distinct works
    /// rarely look alike.
    fn title(&self, rng: &mut ChaCha8Rng) -> String {
        let n = rng.gen_range(5..=9);
        let lo = self.words.len() / 10;
        let words: Vec<&str> = (0..n)
            .map(|_| self.words[rng.gen_range(lo..self.words.len())].as_str())
            .collect();
        capitalize(&words.join(" "))
    }

    fn author(&self, rng: &mut ChaCha8Rng) -> String {
        let surname = &self.surnames[rng.gen_range(0..self.surnames.len())];
        let initial = (b'A' + rng.gen_range(0..26)) as char;
        format!("{initial}. {surname}")
    }
}

fn pseudo_word(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn zipf_cumulative(n: usize, exponent: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|r| {
            acc += 1.0 / ((r + 1) as f64).powf(exponent);
            acc
        })
        .collect()
}

fn sample_cumulative(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("non-empty distribution");
    let x = rng.gen_range(0.0..total);
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

fn symbol_name(pool: &str, k: usize) -> String {
    let letter = LETTERS[k % LETTERS.len()];
    match pool {
        "common" => {
            if k < LETTERS.len() {
                letter.to_string()
            } else {
                format!("{letter}'")
            }
        }
        _ => format!("{letter}_{{{pool}{}}}", k / LETTERS.len()),
    }
}

#[derive(Clone)]
struct Work {
    title: String,
    authors: Vec<String>,
    venue: String,
    year: i32,
}

impl Work {
    fn entry(&self) -> ReferenceEntry {
        let mut r = ReferenceEntry::new(
            format!("{}. {}. {}, {}.", self.authors.join(", "), self.title, self.venue, self.year),
            self.title.clone(),
            self.authors.clone(),
        );
        r.venue = Some(self.venue.clone());
        r
    }
}

fn doc_as_work(d: &Document) -> Work {
    Work {
        title: d.title.clone(),
        authors: d.authors.clone(),
        venue: "Preprint".into(),
        year: d.date.map_or(2010, |x| chrono::Datelike::year(&x)),
    }
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    vocab: Vocab,
    works: Vec<Vec<Work>>,
}

/// Content of one document before it is laid out as a [`Document`].
struct Draft {
    identifiers: Vec<String>,
    /// Cited works in citation order; `None` marks an unresolved marker.
    citations: Vec<Option<usize>>,
    works: Vec<Work>,
    words: Vec<String>,
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SynthConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = Vocab::new(cfg.vocabulary_size.max(100), &mut rng);
        let works = (0..cfg.topics.max(1))
            .map(|_| {
                (0..cfg.works_per_topic.max(1))
                    .map(|_| Work {
                        title: vocab.title(&mut rng),
                        authors: (0..rng.gen_range(1..=3)).map(|_| vocab.author(&mut rng)).collect(),
                        venue: capitalize(&format!("journal of {}", vocab.word(&mut rng))),
                        year: rng.gen_range(1970..2015),
                    })
                    .collect()
            })
            .collect();
        Generator { cfg, rng, vocab, works }
    }

    fn jitter(&mut self, mean: usize, spread: f64) -> usize {
        let lo = ((mean as f64) * (1.0 - spread)).round().max(1.0) as usize;
        let hi = ((mean as f64) * (1.0 + spread)).round().max(lo as f64) as usize;
        self.rng.gen_range(lo..=hi)
    }

    fn symbols(&mut self, topic: usize) -> Vec<String> {
        let total = self.cfg.symbols_per_doc.max(3);
        let common = (total * 3 / 7).min(COMMON_SYMBOLS);
        let rare = total / 7;
        let topical = total - common - rare;
        let rng = &mut self.rng;
        let mut out: Vec<String> = rand::seq::index::sample(rng, COMMON_SYMBOLS, common)
            .into_iter()
            .map(|k| symbol_name("common", k))
            .collect();
        let pool = format!("t{topic}.");
        out.extend(
            rand::seq::index::sample(rng, TOPIC_SYMBOLS, topical.min(TOPIC_SYMBOLS))
                .into_iter()
                .map(|k| symbol_name(&pool, k)),
        );
        out.extend((0..rare).map(|_| symbol_name("r", rng.gen_range(0..RARE_SYMBOLS))));
        out.shuffle(rng);
        out.dedup();
        out
    }

    fn draft(&mut self, topic: usize, older: &[Document]) -> Draft {
        let symbols = self.symbols(topic);
        let weights = zipf_cumulative(symbols.len(), 0.8);
        let n_ident = self.jitter(self.cfg.identifiers_per_doc, 0.3);
        let identifiers = (0..n_ident)
            .map(|_| symbols[sample_cumulative(&weights, &mut self.rng)].clone())
            .collect();

        let n_refs = self.jitter(self.cfg.references_per_doc, 0.3).max(3);
        let pool = &self.works[topic % self.works.len()];
        let mut works: Vec<Work> = rand::seq::index::sample(&mut self.rng, pool.len(), n_refs.min(pool.len()))
            .into_iter()
            .map(|k| pool[k].clone())
            .collect();
        if !older.is_empty() {
            for w in works.iter_mut() {
                if self.rng.gen_bool(self.cfg.corpus_reference_rate.clamp(0.0, 1.0)) {
                    *w = doc_as_work(&older[self.rng.gen_range(0..older.len())]);
                }
            }
        }

        let n_cit = self.jitter(self.cfg.citations_per_doc, 0.3);
        let ref_weights = zipf_cumulative(works.len(), 0.7);
        let unresolved = self.cfg.unresolved_citation_rate.clamp(0.0, 1.0);
        let citations = (0..n_cit)
            .map(|_| {
                if self.rng.gen_bool(unresolved) {
                    None
                } else {
                    Some(sample_cumulative(&ref_weights, &mut self.rng))
                }
            })
            .collect();

        let n_words = self.jitter(self.cfg.words_per_doc, 0.25);
        let words = (0..n_words).map(|_| self.vocab.word(&mut self.rng).to_string()).collect();
        Draft {
            identifiers,
            citations,
            works,
            words,
        }
    }

    fn authors(&mut self, avoid: &[String]) -> Vec<String> {
        let n = self.rng.gen_range(1..=4);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let a = self.vocab.author(&mut self.rng);
            let surname = a.rsplit(' ').next().unwrap_or_default().to_string();
            if !avoid.iter().chain(&out).any(|b: &String| b.ends_with(&surname)) {
                out.push(a);
            }
        }
        out
    }
}

fn date(rng: &mut ChaCha8Rng) -> NaiveDate {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    start + Duration::days(rng.gen_range(0..365 * 15))
}

/// Lay out a draft: sentence-shaped text and one reference entry per
/// distinct cited work.
fn realize(doc_id: String, title: String, authors: Vec<String>, date: NaiveDate, draft: Draft) -> Document {
    let mut text = String::new();
    for (i, w) in draft.words.iter().enumerate() {
        let start = i == 0 || i % 14 == 0;
        if i > 0 {
            text.push_str(if start { ". " } else { " " });
        }
        if start {
            text.push_str(&capitalize(w));
        } else {
            text.push_str(w);
        }
    }
    if !text.is_empty() {
        text.push('.');
    }
    Document {
        doc_id,
        title,
        authors,
        date: Some(date),
        text,
        identifiers: draft.identifiers.into_iter().map(Identifier).collect(),
        citations: draft
            .citations
            .iter()
            .enumerate()
            .map(|(i, r)| CitationInstance {
                position: i,
                ref_index: *r,
            })
            .collect(),
        references: draft.works.iter().map(Work::entry).collect(),
    }
}

/// Recover a draft from a realised document (the inverse of [`realize`]
/// up to sentence punctuation).
fn unrealize(d: &Document) -> Draft {
    let works = d
        .references
        .iter()
        .map(|r| Work {
            title: r.title.clone(),
            authors: r.authors.clone(),
            venue: r.venue.clone().unwrap_or_default(),
            year: 2000,
        })
        .collect();
    Draft {
        identifiers: d.identifiers.iter().map(|i| i.0.clone()).collect(),
        citations: d.citations.iter().map(|c| c.ref_index).collect(),
        works,
        words: d
            .text
            .split_whitespace()
            .map(|w| w.trim_end_matches('.').to_lowercase())
            .collect(),
    }
}

/// Copy about `fraction` of `source` into a sequence of the same length:
/// the source is cut into segments of `block` items and a random subset of
/// segments is copied in place; the rest is filled from `own`.
fn splice<T: Clone>(source: &[T], own: &[T], fraction: f64, block: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let segments = source.len().div_ceil(block.max(1));
    let take = ((fraction * segments as f64).round() as usize).min(segments);
    let chosen: BTreeSet<usize> = rand::seq::index::sample(rng, segments, take).into_iter().collect();
    let mut out = Vec::with_capacity(source.len());
    let mut own_iter = own.iter().cycle();
    for s in 0..segments {
        let range = s * block..((s + 1) * block).min(source.len());
        if chosen.contains(&s) || own.is_empty() {
            out.extend_from_slice(&source[range]);
        } else {
            out.extend(range.map(|_| own_iter.next().expect("cycle of non-empty").clone()));
        }
    }
    out
}

const IDENTIFIER_BLOCK: usize = 40;
const CITATION_BLOCK: usize = 4;
const WORD_BLOCK: usize = 25;

/// Generate `n_docs` documents; the last `plants.len()` of them are the
/// planted derivatives. Deterministic for a given seed.
pub fn generate(n_docs: usize, seed: u64, plants: &[PlantSpec], cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    if n_docs < 2 {
        return Err(Error::InvalidPlantSpec(format!("need at least 2 documents, got {n_docs}")));
    }
    if plants.len() * 2 > n_docs {
        return Err(Error::InvalidPlantSpec(format!(
            "{} plants need at least {} documents",
            plants.len(),
            plants.len() * 2
        )));
    }
    let base = n_docs - plants.len();
    for p in plants {
        p.validate(base)?;
    }
    let mut corpus = generate_base(base, seed, cfg);
    corpus.plant(plants)?;
    Ok(corpus)
}

fn generate_base(n_docs: usize, seed: u64, cfg: &SynthConfig) -> SyntheticCorpus {
    let mut g = Generator::new(cfg, seed);
    let topics: Vec<usize> = (0..n_docs).map(|_| g.rng.gen_range(0..cfg.topics.max(1))).collect();
    let dates: Vec<NaiveDate> = (0..n_docs).map(|_| date(&mut g.rng)).collect();

    // oldest first, so corpus references only point backwards in time
    let mut order: Vec<usize> = (0..n_docs).collect();
    order.sort_by_key(|&i| (dates[i], i));
    let mut documents: Vec<Option<Document>> = vec![None; n_docs];
    let mut older: Vec<Document> = Vec::new();
    for i in order {
        let draft = g.draft(topics[i], &older);
        let title = g.vocab.title(&mut g.rng);
        let authors = g.authors(&[]);
        let d = realize(doc_id(i), title, authors, dates[i], draft);
        older.push(d.clone());
        documents[i] = Some(d);
    }
    SyntheticCorpus {
        documents: documents.into_iter().flatten().collect(),
        plants: Vec::new(),
        topics,
        seed,
        config: cfg.clone(),
    }
}

impl SyntheticCorpus {
    /// Append one derived document per spec. Sources default to random
    /// documents that are neither a source nor a derivative yet.
    pub fn plant(&mut self, specs: &[PlantSpec]) -> Result<()> {
        let derived: BTreeSet<usize> = self
            .plants
            .iter()
            .filter_map(|p| self.position(&p.query_doc))
            .collect();
        let mut used: BTreeSet<usize> = self
            .plants
            .iter()
            .filter_map(|p| self.position(&p.source_doc))
            .collect();
        for p in specs {
            p.validate(self.documents.len())?;
            if let Some(s) = p.source {
                if derived.contains(&s) {
                    return Err(Error::InvalidPlantSpec(format!("source {s} is itself a planted document")));
                }
                used.insert(s);
            }
        }
        let cfg = self.config.clone();
        let mut g = Generator::new(&cfg, self.seed);
        g.rng.set_stream(1 + self.plants.len() as u64);

        let mut free: Vec<usize> = (0..self.documents.len())
            .filter(|i| !used.contains(i) && !derived.contains(i))
            .collect();
        free.shuffle(&mut g.rng);
        let mut sources = Vec::with_capacity(specs.len());
        for p in specs {
            match p.source {
                Some(s) => sources.push(s),
                None => sources.push(free.pop().ok_or_else(|| {
                    Error::InvalidPlantSpec("not enough documents left to serve as sources".into())
                })?),
            }
        }

        for (spec, s) in specs.iter().zip(sources) {
            let i = self.documents.len();
            let derived = self.derive(&mut g, spec, s, i);
            if spec.cite == CiteRelation::SourceCitesDerived {
                self.documents[s].references.push(doc_as_work(&derived).entry());
            }
            self.plants.push(PlantRecord {
                case_id: format!("P{:02}", self.plants.len() + 1),
                query_doc: derived.doc_id.clone(),
                source_doc: self.documents[s].doc_id.clone(),
                spec: PlantSpec {
                    source: Some(s),
                    ..spec.clone()
                },
            });
            self.topics.push(self.topics[s]);
            self.documents.push(derived);
        }
        Ok(())
    }

    fn position(&self, doc_id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.doc_id == doc_id)
    }

    fn derive(&self, g: &mut Generator, spec: &PlantSpec, s: usize, i: usize) -> Document {
        let src = &self.documents[s];
        let src_draft = unrealize(src);
        let own = g.draft(self.topics[s], &[]);

        let identifiers = splice(
            &src_draft.identifiers,
            &own.identifiers,
            spec.identifier_fraction,
            IDENTIFIER_BLOCK,
            &mut g.rng,
        );
        let words = splice(&src_draft.words, &own.words, spec.text_fraction, WORD_BLOCK, &mut g.rng);

        // citations are spliced as works so copied markers resolve to the
        // same consolidated entries as in the source
        let as_works = |d: &Draft| -> Vec<Option<Work>> {
            d.citations.iter().map(|c| c.map(|r| d.works[r].clone())).collect()
        };
        let cited = splice(
            &as_works(&src_draft),
            &as_works(&own),
            spec.citation_fraction,
            CITATION_BLOCK,
            &mut g.rng,
        );
        let mut works: Vec<Work> = Vec::new();
        let mut citations = Vec::with_capacity(cited.len());
        for w in cited {
            citations.push(w.map(|w| {
                works.iter().position(|x| x.title == w.title).unwrap_or_else(|| {
                    works.push(w);
                    works.len() - 1
                })
            }));
        }
        for w in own.works {
            if works.len() >= self.config.references_per_doc.max(3) {
                break;
            }
            if !works.iter().any(|x| x.title == w.title) {
                works.push(w);
            }
        }
        if spec.cite == CiteRelation::DerivedCitesSource {
            works.push(doc_as_work(src));
        }

        let mut authors = g.authors(&src.authors);
        if spec.share_author {
            authors[0] = src.authors[0].clone();
        }
        let title = g.vocab.title(&mut g.rng);
        let date = src.date.expect("generated documents are dated") + Duration::days(g.rng.gen_range(30..700));
        realize(
            doc_id(i),
            title,
            authors,
            date,
            Draft {
                identifiers,
                citations,
                works,
                words,
            },
        )
    }
}

/// Read a plant list (JSON array of [`PlantSpec`]).
pub fn load_plants(path: &Path) -> Result<Vec<PlantSpec>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| Error::InvalidPlantSpec(format!("{}: {}", e.path(), e.inner())))
}
