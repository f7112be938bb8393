//! Candidate retrieval: one index query per channel, top-k each.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::DocFeatures;
use crate::index::{citation_term, fingerprint_term, CorpusIndex, Field, QueryTerm};
use crate::measures::Channel;

pub const DEFAULT_TOP_K: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub doc_id: String,
    pub score: f64,
}

/// Ranked per-channel candidates and their union. The query document is
/// never included.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub math: Vec<Candidate>,
    pub citation: Vec<Candidate>,
    pub text: Vec<Candidate>,
    pub union: BTreeSet<String>,
}

impl CandidateSet {
    pub fn channel(&self, channel: Channel) -> &[Candidate] {
        match channel {
            Channel::Math => &self.math,
            Channel::Citation => &self.citation,
            Channel::Text => &self.text,
        }
    }

    pub fn contains(&self, channel: Channel, doc_id: &str) -> bool {
        self.channel(channel).iter().any(|c| c.doc_id == doc_id)
    }
}

/// Distinct identifiers, each boosted by its occurrence count in the query.
pub fn math_query(doc: &DocFeatures) -> Vec<QueryTerm> {
    doc.histogram
        .counts()
        .iter()
        .map(|(s, &c)| QueryTerm::new(s.clone(), c as f64))
        .collect()
}

/// Distinct global ids of the resolved in-text citations, boost 1.
pub fn citation_query(doc: &DocFeatures) -> Vec<QueryTerm> {
    let ids: BTreeSet<_> = doc.citations.items.iter().copied().collect();
    ids.into_iter()
        .map(|g| QueryTerm::new(citation_term(g), 1.0))
        .collect()
}

pub fn text_query(doc: &DocFeatures) -> Vec<QueryTerm> {
    doc.fingerprints
        .hashes
        .iter()
        .map(|&h| QueryTerm::new(fingerprint_term(h), 1.0))
        .collect()
}

fn channel_top_k(index: &CorpusIndex, query: &[QueryTerm], field: Field, self_id: &str, k: usize) -> Vec<Candidate> {
    index
        .query_top_k(query, field, k.saturating_add(1))
        .into_iter()
        .filter(|(d, _)| d != self_id)
        .take(k)
        .map(|(doc_id, score)| Candidate { doc_id, score })
        .collect()
}

pub fn retrieve_candidates(doc: &DocFeatures, index: &CorpusIndex, k: usize) -> CandidateSet {
    let math = channel_top_k(index, &math_query(doc), Field::Identifier, &doc.doc_id, k);
    let citation = channel_top_k(index, &citation_query(doc), Field::Citation, &doc.doc_id, k);
    let text = channel_top_k(index, &text_query(doc), Field::Fingerprint, &doc.doc_id, k);
    let mut set = CandidateSet {
        math,
        citation,
        text,
        union: BTreeSet::new(),
    };
    set.union = union_candidates(&set);
    set
}

pub fn union_candidates(cs: &CandidateSet) -> BTreeSet<String> {
    cs.math
        .iter()
        .chain(&cs.citation)
        .chain(&cs.text)
        .map(|c| c.doc_id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(prefix: &str, range: std::ops::Range<usize>) -> Vec<Candidate> {
        range
            .map(|i| Candidate {
                doc_id: format!("{prefix}{i:03}"),
                score: 1.0,
            })
            .collect()
    }

    #[test]
    fn union_sizes() {
        let disjoint = CandidateSet {
            math: list("m", 0..100),
            citation: list("c", 0..100),
            text: list("t", 0..100),
            union: BTreeSet::new(),
        };
        assert_eq!(union_candidates(&disjoint).len(), 300);

        let same = CandidateSet {
            math: list("d", 0..100),
            citation: list("d", 0..100),
            text: list("d", 0..100),
            union: BTreeSet::new(),
        };
        assert_eq!(union_candidates(&same).len(), 100);
    }

    #[test]
    fn union_pairwise_overlap_of_ten() {
        // each pair of lists shares 10 docs, no doc is in all three
        let join = |parts: [Vec<Candidate>; 3]| parts.concat();
        let cs = CandidateSet {
            math: join([list("m", 0..80), list("mc", 0..10), list("mt", 0..10)]),
            citation: join([list("c", 0..80), list("mc", 0..10), list("ct", 0..10)]),
            text: join([list("t", 0..80), list("mt", 0..10), list("ct", 0..10)]),
            union: BTreeSet::new(),
        };
        assert!([&cs.math, &cs.citation, &cs.text].iter().all(|l| l.len() == 100));
        assert_eq!(union_candidates(&cs).len(), 270);
    }
}
