//! Slow reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::HashMap;

use stemsim::corpus::DocFeatures;
use stemsim::index::{citation_term, fingerprint_term, Field, QueryTerm};
use stemsim::measures::Tile;

/// Textbook O(nm) dynamic programme.
pub fn lcs_dp<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Greedy tiling by exhaustive search over every start pair per round.
pub fn gst_naive<T: PartialEq>(a: &[T], b: &[T], min_len: usize) -> Vec<Tile> {
    let mut ma = vec![false; a.len()];
    let mut mb = vec![false; b.len()];
    let mut tiles = Vec::new();
    loop {
        let mut best: Option<Tile> = None;
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut k = 0;
                while i + k < a.len() && j + k < b.len() && !ma[i + k] && !mb[j + k] && a[i + k] == b[j + k] {
                    k += 1;
                }
                if k >= min_len.max(1) && best.is_none_or(|t| k > t.length) {
                    best = Some(Tile { pos_a: i, pos_b: j, length: k });
                }
            }
        }
        let Some(t) = best else { return tiles };
        for x in 0..t.length {
            ma[t.pos_a + x] = true;
            mb[t.pos_b + x] = true;
        }
        tiles.push(t);
    }
}

/// Σ over distinct grams of min(count in a, count in b).
pub fn encoplot_oracle(a: &[char], b: &[char], n: usize) -> usize {
    let count = |s: &[char]| {
        let mut m: HashMap<String, usize> = HashMap::new();
        if s.len() >= n {
            for w in s.windows(n) {
                *m.entry(w.iter().collect()).or_default() += 1;
            }
        }
        m
    };
    let (ca, cb) = (count(a), count(b));
    ca.iter().map(|(g, &x)| x.min(cb.get(g).copied().unwrap_or(0))).sum()
}

/// Term frequencies and field length of one document, recomputed from
/// its features.
pub fn field_terms(f: &DocFeatures, field: Field) -> (HashMap<String, u32>, u32) {
    let mut tf: HashMap<String, u32> = HashMap::new();
    match field {
        Field::Identifier => {
            for (s, &c) in f.histogram.counts() {
                tf.insert(s.clone(), c);
            }
        }
        Field::Citation => {
            for g in &f.citations.items {
                *tf.entry(citation_term(*g)).or_default() += 1;
            }
        }
        Field::Fingerprint => {
            for h in &f.fingerprints.hashes {
                tf.insert(fingerprint_term(*h), 1);
            }
        }
    }
    let len = tf.values().sum();
    (tf, len)
}

/// Exhaustive classic-Lucene scoring of every document, best `k` first,
/// ties by doc id. Documents with no matching term are left out.
pub fn exhaustive_top_k(docs: &[DocFeatures], query: &[QueryTerm], field: Field, k: usize) -> Vec<(String, f64)> {
    let terms: Vec<(HashMap<String, u32>, u32)> = docs.iter().map(|d| field_terms(d, field)).collect();
    let n = docs.len() as f64;
    let idf = |t: &str| {
        let df = terms.iter().filter(|(m, _)| m.contains_key(t)).count() as f64;
        1.0 + (n / (df + 1.0)).ln()
    };
    let idfs: Vec<f64> = query.iter().map(|q| idf(&q.term)).collect();
    let qsum: f64 = query.iter().zip(&idfs).map(|(q, i)| (i * q.boost) * (i * q.boost)).sum();
    let qnorm = if qsum > 0.0 { 1.0 / qsum.sqrt() } else { 0.0 };
    let mut out = Vec::new();
    for (d, (tf, len)) in docs.iter().zip(&terms) {
        let norm = if *len == 0 { 0.0 } else { 1.0 / (*len as f64).sqrt() };
        let mut matched = 0;
        let mut acc = 0.0;
        for (q, i) in query.iter().zip(&idfs) {
            if let Some(&c) = tf.get(&q.term) {
                matched += 1;
                acc += (c as f64).sqrt() * i * i * q.boost * norm;
            }
        }
        if matched > 0 {
            let coord = matched as f64 / query.len() as f64;
            out.push((d.doc_id.clone(), coord * qnorm * acc));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(k);
    out
}
