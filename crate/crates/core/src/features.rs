//! Feature extraction: identifier histograms, reference consolidation,
//! resolved citation sequences and word 3-gram text fingerprints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::doc_model::{author_surname, fold_text, normalize_author, Document, Identifier};

/// Corpus-wide identity of a cited work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GlobalReferenceId(pub u32);

impl fmt::Display for GlobalReferenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Occurrence counts per identifier symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierHistogram {
    counts: BTreeMap<String, u32>,
    total: u32,
}

impl IdentifierHistogram {
    pub fn counts(&self) -> &BTreeMap<String, u32> {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, symbol: &str) -> u32 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    /// Relative frequency of `symbol`; 0 when absent or the histogram is empty.
    pub fn frequency(&self, symbol: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(symbol) as f64 / self.total as f64
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Number of distinct symbols present in both histograms.
    pub fn shared_distinct(&self, other: &IdentifierHistogram) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .keys()
            .filter(|k| large.counts.contains_key(*k))
            .count()
    }
}

pub fn build_histogram<'a>(identifiers: impl IntoIterator<Item = &'a Identifier>) -> IdentifierHistogram {
    let mut h = IdentifierHistogram::default();
    for ident in identifiers {
        *h.counts.entry(ident.0.clone()).or_insert(0) += 1;
        h.total += 1;
    }
    h
}

/// Thresholds for treating two reference strings as the same work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsolidationConfig {
    pub max_edits: usize,
    pub max_edit_fraction: f64,
}

impl Default for ConsolidationConfig {
    fn default() -> Self {
        ConsolidationConfig {
            max_edits: 2,
            max_edit_fraction: 0.1,
        }
    }
}

impl ConsolidationConfig {
    /// Edit budget for two normalised titles of the given char lengths.
    pub fn allowed_edits(&self, len_a: usize, len_b: usize) -> usize {
        let frac = (self.max_edit_fraction * len_a.min(len_b) as f64).ceil() as usize;
        self.max_edits.max(frac)
    }
}

/// The part of a reference that consolidation compares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceKey {
    pub first_author_surname: String,
    pub title: String,
}

impl ReferenceKey {
    pub fn new(title: &str, authors: &[String]) -> Self {
        let first_author_surname = authors
            .first()
            .map(|a| author_surname(&normalize_author(a)).to_string())
            .unwrap_or_default();
        ReferenceKey {
            first_author_surname,
            title: fold_text(title),
        }
    }
}

/// Assign a [`GlobalReferenceId`] to every key.
///
/// Two keys are linked when their first-author surnames are equal and their
/// normalised titles are within the configured Levenshtein budget; ids are
/// the transitive closure of that relation. Empty titles never link. Ids
/// are numbered by first occurrence, so the result depends only on input
/// order.
pub fn consolidate_references(keys: &[ReferenceKey], cfg: &ConsolidationConfig) -> Vec<GlobalReferenceId> {
    let mut uf = UnionFind::new(keys.len());

    let mut by_surname: FxHashMap<&str, Vec<usize>> = FxHashMap::default();
    for (i, k) in keys.iter().enumerate() {
        if !k.title.is_empty() {
            by_surname.entry(&k.first_author_surname).or_default().push(i);
        }
    }

    for members in by_surname.values() {
        // collapse exact title duplicates first so the quadratic pass only
        // sees distinct titles
        let mut first_by_title: FxHashMap<&str, usize> = FxHashMap::default();
        let mut distinct: Vec<(usize, Vec<char>)> = Vec::new();
        for &i in members {
            match first_by_title.get(keys[i].title.as_str()) {
                Some(&j) => uf.union(i, j),
                None => {
                    first_by_title.insert(&keys[i].title, i);
                    distinct.push((i, keys[i].title.chars().collect()));
                }
            }
        }
        for x in 0..distinct.len() {
            for y in x + 1..distinct.len() {
                let (i, a) = &distinct[x];
                let (j, b) = &distinct[y];
                let budget = cfg.allowed_edits(a.len(), b.len());
                if a.len().abs_diff(b.len()) > budget {
                    continue;
                }
                if levenshtein_chars(a, b) <= budget {
                    uf.union(*i, *j);
                }
            }
        }
    }

    let mut ids: FxHashMap<usize, GlobalReferenceId> = FxHashMap::default();
    (0..keys.len())
        .map(|i| {
            let root = uf.find(i);
            let next = GlobalReferenceId(ids.len() as u32);
            *ids.entry(root).or_insert(next)
        })
        .collect()
}

#[allow(clippy::ptr_arg)]
fn levenshtein_chars(a: &Vec<char>, b: &Vec<char>) -> usize {
    strsim::generic_levenshtein(a, b)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so roots are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// In-text citations mapped to global reference ids, document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CitationSequence {
    pub items: Vec<GlobalReferenceId>,
}

impl CitationSequence {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// `reference_ids[i]` is the id of `doc.references[i]`; unresolved
/// citations and references without an id are dropped.
pub fn resolve_citations(doc: &Document, reference_ids: &[Option<GlobalReferenceId>]) -> CitationSequence {
    let items = doc
        .citations
        .iter()
        .filter_map(|c| c.ref_index)
        .filter_map(|r| reference_ids.get(r).copied().flatten())
        .collect();
    CitationSequence { items }
}

/// Retained word 3-gram hashes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FingerprintSet {
    pub hashes: BTreeSet<u64>,
}

impl FingerprintSet {
    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Lowercased alphanumeric tokens; everything else separates.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Keep a gram hash iff its four low-order bits are zero (1 in 16).
pub fn is_retained(hash: u64) -> bool {
    hash & 0xF == 0
}

/// Hashes of every word 3-gram (space-joined) in order, before selection.
pub fn gram_hashes(text: &str) -> Vec<u64> {
    let tokens = tokenize(text);
    let mut buf = String::new();
    tokens
        .windows(3)
        .map(|w| {
            buf.clear();
            buf.push_str(&w[0]);
            buf.push(' ');
            buf.push_str(&w[1]);
            buf.push(' ');
            buf.push_str(&w[2]);
            fnv1a64(buf.as_bytes())
        })
        .collect()
}

pub fn fingerprint_text(text: &str) -> FingerprintSet {
    FingerprintSet {
        hashes: gram_hashes(text).into_iter().filter(|h| is_retained(*h)).collect(),
    }
}
