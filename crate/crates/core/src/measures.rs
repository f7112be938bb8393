//! Pairwise similarity measures and their sequence kernels.
//!
//! Math: Histo, LCIS, GIT over identifier histograms and sequences.
//! Citation: BC over reference sets, LCCS and GCT over citation sequences.
//! Text: Encoplot over character 16-grams.
//!
//! LCIS, GIT, LCCS and GCT are normalised by the query side (`a`) and are
//! therefore asymmetric.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::calibration::ThresholdConfig;
use crate::corpus::DocFeatures;
use crate::error::Error;
use crate::features::{GlobalReferenceId, IdentifierHistogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    Histo,
    #[serde(rename = "LCIS")]
    Lcis,
    #[serde(rename = "GIT")]
    Git,
    #[serde(rename = "BC")]
    Bc,
    #[serde(rename = "LCCS")]
    Lccs,
    #[serde(rename = "GCT")]
    Gct,
    Enco,
}

/// Retrieval channel a measure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Math,
    Citation,
    Text,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Math, Channel::Citation, Channel::Text];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Math => "math",
            Channel::Citation => "citation",
            Channel::Text => "text",
        }
    }
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Histo,
        Measure::Lcis,
        Measure::Git,
        Measure::Bc,
        Measure::Lccs,
        Measure::Gct,
        Measure::Enco,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Histo => "Histo",
            Measure::Lcis => "LCIS",
            Measure::Git => "GIT",
            Measure::Bc => "BC",
            Measure::Lccs => "LCCS",
            Measure::Gct => "GCT",
            Measure::Enco => "Enco",
        }
    }

    pub fn channel(self) -> Channel {
        match self {
            Measure::Histo | Measure::Lcis | Measure::Git => Channel::Math,
            Measure::Bc | Measure::Lccs | Measure::Gct => Channel::Citation,
            Measure::Enco => Channel::Text,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown measure `{s}`")))
    }
}

/// A measure value, or the reason it was not computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    Value(f64),
    NotApplicable(String),
}

impl Score {
    pub fn na(reason: impl Into<String>) -> Self {
        Score::NotApplicable(reason.into())
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(*v),
            Score::NotApplicable(_) => None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, Score::Value(_))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v:.3}"),
            Score::NotApplicable(_) => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureScore {
    pub measure: Measure,
    #[serde(flatten)]
    pub score: Score,
}

/// A maximal matching block shared by two sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    pub pos_a: usize,
    pub pos_b: usize,
    pub length: usize,
}

/// Applicability gates and tiling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    /// Distinct identifier symbols two documents must share for math measures.
    pub min_shared_identifiers: usize,
    /// Distinct references each document needs for citation measures.
    pub min_references: usize,
    pub min_identifier_tile: usize,
    pub min_citation_tile: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            min_shared_identifiers: 20,
            min_references: 3,
            min_identifier_tile: 5,
            min_citation_tile: 2,
        }
    }
}

// ---------------------------------------------------------------------------
// kernels

/// Length of the longest common subsequence.
///
/// Bit-parallel row update (Allison-Dix / Hyyrö): one pass over the longer
/// sequence, `ceil(n / 64)` word operations per step.
pub fn lcs_length<T: Eq + Hash>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let n = short.len();
    if n == 0 {
        return 0;
    }
    let words = n.div_ceil(64);

    let mut masks: FxHashMap<&T, Vec<u64>> = FxHashMap::default();
    for (i, t) in short.iter().enumerate() {
        masks.entry(t).or_insert_with(|| vec![0; words])[i / 64] |= 1u64 << (i % 64);
    }

    let mut v = vec![u64::MAX; words];
    for t in long {
        let Some(m) = masks.get(t) else { continue };
        let mut carry = false;
        for k in 0..words {
            let u = v[k] & m[k];
            let (s1, c1) = v[k].overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            carry = c1 || c2;
            v[k] = s2 | (v[k] & !m[k]);
        }
    }

    let mut ones = 0usize;
    for (k, w) in v.iter().enumerate() {
        let valid = if k + 1 == words && n % 64 != 0 {
            (1u64 << (n % 64)) - 1
        } else {
            u64::MAX
        };
        ones += (w & valid).count_ones() as usize;
    }
    n - ones
}

/// Greedy String Tiling.
///
/// Repeatedly takes the longest block of equal, still-unmarked tokens of
/// length at least `min_len`, marks it in both sequences and records it.
/// Among equally long blocks the smallest `pos_a`, then smallest `pos_b`
/// wins. Tiles are returned in the order they were found.
pub fn greedy_tiles<T: Eq + Hash>(a: &[T], b: &[T], min_len: usize) -> Vec<Tile> {
    let min_len = min_len.max(1);
    let mut tiles = Vec::new();
    if a.len() < min_len || b.len() < min_len {
        return tiles;
    }

    let mut positions: FxHashMap<&T, Vec<usize>> = FxHashMap::default();
    for (j, t) in b.iter().enumerate() {
        positions.entry(t).or_default().push(j);
    }
    let mut marked_a = vec![false; a.len()];
    let mut marked_b = vec![false; b.len()];

    loop {
        let mut best: Option<Tile> = None;
        for i in 0..a.len() {
            if marked_a[i] {
                continue;
            }
            let Some(js) = positions.get(&a[i]) else { continue };
            for &j in js {
                if marked_b[j] {
                    continue;
                }
                // a block that extends one step to the left is strictly
                // longer, so this start can never be the unique best
                if i > 0 && j > 0 && !marked_a[i - 1] && !marked_b[j - 1] && a[i - 1] == b[j - 1] {
                    continue;
                }
                let mut k = 1;
                while i + k < a.len()
                    && j + k < b.len()
                    && !marked_a[i + k]
                    && !marked_b[j + k]
                    && a[i + k] == b[j + k]
                {
                    k += 1;
                }
                if k >= min_len && best.is_none_or(|t| k > t.length) {
                    best = Some(Tile {
                        pos_a: i,
                        pos_b: j,
                        length: k,
                    });
                }
            }
        }
        let Some(tile) = best else { break };
        marked_a[tile.pos_a..tile.pos_a + tile.length].fill(true);
        marked_b[tile.pos_b..tile.pos_b + tile.length].fill(true);
        tiles.push(tile);
    }
    tiles
}

pub fn tile_coverage(tiles: &[Tile]) -> usize {
    tiles.iter().map(|t| t.length).sum()
}

pub const ENCOPLOT_GRAM: usize = 16;

/// Lowercase and collapse whitespace runs to one space (ends trimmed).
pub fn normalize_for_encoplot(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

/// Encoplot pairing of character 16-grams.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoplotMatch {
    /// `(pos_a, pos_b)` of each paired gram, ordered by `pos_b`.
    pub pairs: Vec<(usize, usize)>,
    pub grams_a: usize,
    pub grams_b: usize,
}

impl EncoplotMatch {
    pub fn score(&self) -> Score {
        let shorter = self.grams_a.min(self.grams_b);
        if shorter == 0 {
            Score::na(format!("text shorter than {ENCOPLOT_GRAM} characters"))
        } else {
            Score::Value(self.pairs.len() as f64 / shorter as f64)
        }
    }
}

const NONE: u32 = u32::MAX;
const GRAM_BASE: u32 = 0x0100_0193;

/// `(hash, position)` of every gram, in position order. The hash is a
/// rolling polynomial over code points; equal grams get equal hashes.
fn gram_keys(s: &[char], grams: usize) -> Vec<(u32, u32)> {
    let top = GRAM_BASE.wrapping_pow(ENCOPLOT_GRAM as u32 - 1);
    let mut h = 0u32;
    let mut out = Vec::with_capacity(grams);
    for (i, &c) in s.iter().enumerate() {
        if i >= ENCOPLOT_GRAM {
            h = h.wrapping_sub((s[i - ENCOPLOT_GRAM] as u32).wrapping_mul(top));
        }
        h = h.wrapping_mul(GRAM_BASE).wrapping_add(c as u32);
        if i + 1 >= ENCOPLOT_GRAM {
            out.push((h, (i + 1 - ENCOPLOT_GRAM) as u32));
        }
    }
    out
}

/// Stable radix sort on the hash: one partition pass on the top byte,
/// then an LSD pass per remaining byte inside each (cache-sized) bucket.
fn radix_sort(keys: &mut Vec<(u32, u32)>) {
    let mut starts = [0usize; 257];
    for &(h, _) in keys.iter() {
        starts[(h >> 24) as usize + 1] += 1;
    }
    for d in 0..256 {
        starts[d + 1] += starts[d];
    }
    let mut fill = starts;
    let mut out = vec![(0u32, 0u32); keys.len()];
    for &k in keys.iter() {
        let d = (k.0 >> 24) as usize;
        out[fill[d]] = k;
        fill[d] += 1;
    }
    let mut scratch = Vec::new();
    for d in 0..256 {
        sort_low_bytes(&mut out[starts[d]..starts[d + 1]], &mut scratch);
    }
    *keys = out;
}

fn sort_low_bytes(bucket: &mut [(u32, u32)], scratch: &mut Vec<(u32, u32)>) {
    if bucket.len() < 64 {
        bucket.sort_by_key(|k| k.0);
        return;
    }
    scratch.clear();
    scratch.resize(bucket.len(), (0, 0));
    for shift in [0, 8, 16] {
        let mut counts = [0usize; 256];
        for &(h, _) in bucket.iter() {
            counts[((h >> shift) & 0xff) as usize] += 1;
        }
        let mut offset = 0;
        for c in counts.iter_mut() {
            let n = *c;
            *c = offset;
            offset += n;
        }
        for &k in bucket.iter() {
            let d = ((k.0 >> shift) & 0xff) as usize;
            scratch[counts[d]] = k;
            counts[d] += 1;
        }
        bucket.copy_from_slice(scratch);
    }
}

/// Walk two hash-sorted key lists and record, for each gram position of
/// `b`, the position of `a` it is paired with.
fn pair_sorted(a: &[char], b: &[char], ka: &[(u32, u32)], kb: &[(u32, u32)], grams_b: usize) -> Vec<u32> {
    let gram_a = |i: u32| &a[i as usize..i as usize + ENCOPLOT_GRAM];
    let gram_b = |j: u32| &b[j as usize..j as usize + ENCOPLOT_GRAM];
    let mut partner = vec![NONE; grams_b];
    let (mut x, mut y) = (0, 0);
    while x < ka.len() && y < kb.len() {
        let h = ka[x].0;
        if h < kb[y].0 {
            x += 1;
            continue;
        }
        if kb[y].0 < h {
            y += 1;
            continue;
        }
        let x_end = x + ka[x..].iter().take_while(|k| k.0 == h).count();
        let y_end = y + kb[y..].iter().take_while(|k| k.0 == h).count();
        let first = gram_a(ka[x].1);
        let uniform = ka[x..x_end].iter().all(|k| gram_a(k.1) == first)
            && kb[y..y_end].iter().all(|k| gram_b(k.1) == first);
        if uniform {
            for (p, q) in ka[x..x_end].iter().zip(&kb[y..y_end]) {
                partner[q.1 as usize] = p.1;
            }
        } else {
            // hash collision: regroup by gram content, positions ascending
            let mut ga: Vec<u32> = ka[x..x_end].iter().map(|k| k.1).collect();
            let mut gb: Vec<u32> = kb[y..y_end].iter().map(|k| k.1).collect();
            ga.sort_by(|&p, &q| gram_a(p).cmp(gram_a(q)).then(p.cmp(&q)));
            gb.sort_by(|&p, &q| gram_b(p).cmp(gram_b(q)).then(p.cmp(&q)));
            let (mut i, mut j) = (0, 0);
            while i < ga.len() && j < gb.len() {
                let (g, r) = (gram_a(ga[i]), gram_b(gb[j]));
                let i_end = i + ga[i..].iter().take_while(|&&p| gram_a(p) == g).count();
                let j_end = j + gb[j..].iter().take_while(|&&q| gram_b(q) == r).count();
                match g.cmp(r) {
                    std::cmp::Ordering::Less => i = i_end,
                    std::cmp::Ordering::Greater => j = j_end,
                    std::cmp::Ordering::Equal => {
                        for (&p, &q) in ga[i..i_end].iter().zip(&gb[j..j_end]) {
                            partner[q as usize] = p;
                        }
                        i = i_end;
                        j = j_end;
                    }
                }
            }
        }
        x = x_end;
        y = y_end;
    }
    partner
}

/// Pair the i-th occurrence of each gram in `a` with its i-th occurrence
/// in `b`; every occurrence is used at most once. Grams are radix-sorted
/// by hash, so the running time is linear in the input lengths.
pub fn encoplot_pairs(a: &[char], b: &[char]) -> EncoplotMatch {
    let grams_a = (a.len() + 1).saturating_sub(ENCOPLOT_GRAM);
    let grams_b = (b.len() + 1).saturating_sub(ENCOPLOT_GRAM);
    if grams_a == 0 || grams_b == 0 {
        return EncoplotMatch {
            pairs: Vec::new(),
            grams_a,
            grams_b,
        };
    }
    let mut ka = gram_keys(a, grams_a);
    let mut kb = gram_keys(b, grams_b);
    radix_sort(&mut ka);
    radix_sort(&mut kb);
    let partner = pair_sorted(a, b, &ka, &kb, grams_b);

    let pairs = partner
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != NONE)
        .map(|(j, &p)| (p as usize, j))
        .collect();
    EncoplotMatch { pairs, grams_a, grams_b }
}

pub fn encoplot(text_a: &str, text_b: &str) -> Score {
    encoplot_pairs(&normalize_for_encoplot(text_a), &normalize_for_encoplot(text_b)).score()
}

// ---------------------------------------------------------------------------
// measures

/// Histogram similarity: one minus the summed absolute difference of
/// relative frequencies over the summed maxima. Symmetric.
pub fn histo(a: &IdentifierHistogram, b: &IdentifierHistogram) -> Score {
    if a.is_empty() || b.is_empty() {
        return Score::na("no identifiers");
    }
    let (ta, tb) = (a.total() as f64, b.total() as f64);
    let mut diff = 0.0;
    let mut max = 0.0;
    let mut ia = a.counts().iter().peekable();
    let mut ib = b.counts().iter().peekable();
    // merge walk over the sorted key sets
    loop {
        let (fa, fb) = match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some((ka, &ca)), Some((kb, &cb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    ia.next();
                    (ca as f64 / ta, 0.0)
                }
                std::cmp::Ordering::Greater => {
                    ib.next();
                    (0.0, cb as f64 / tb)
                }
                std::cmp::Ordering::Equal => {
                    ia.next();
                    ib.next();
                    (ca as f64 / ta, cb as f64 / tb)
                }
            },
            (Some((_, &ca)), None) => {
                ia.next();
                (ca as f64 / ta, 0.0)
            }
            (None, Some((_, &cb))) => {
                ib.next();
                (0.0, cb as f64 / tb)
            }
        };
        diff += (fa - fb).abs();
        max += f64::max(fa, fb);
    }
    Score::Value((1.0 - diff / max).clamp(0.0, 1.0))
}

fn query_normalized(query_len: usize, matched: usize, empty_reason: &str) -> Score {
    if query_len == 0 {
        Score::na(empty_reason)
    } else {
        Score::Value(matched as f64 / query_len as f64)
    }
}

/// LCS of identifier sequences over the query's identifier count.
pub fn lcis<T: Eq + Hash>(query: &[T], other: &[T]) -> Score {
    query_normalized(query.len(), lcs_length(query, other), "query has no identifiers")
}

/// Query-side coverage of identifier tiles of at least `min_tile` tokens.
pub fn git<T: Eq + Hash>(query: &[T], other: &[T], min_tile: usize) -> Score {
    git_with_tiles(query, other, min_tile).0
}

fn git_with_tiles<T: Eq + Hash>(query: &[T], other: &[T], min_tile: usize) -> (Score, Vec<Tile>) {
    if query.is_empty() {
        return (Score::na("query has no identifiers"), Vec::new());
    }
    let tiles = greedy_tiles(query, other, min_tile);
    let score = query_normalized(query.len(), tile_coverage(&tiles), "");
    (score, tiles)
}

/// Bibliographic coupling: Jaccard index of reference sets.
pub fn bc(
    a: &std::collections::BTreeSet<GlobalReferenceId>,
    b: &std::collections::BTreeSet<GlobalReferenceId>,
    min_references: usize,
) -> Score {
    if a.len() < min_references || b.len() < min_references {
        return Score::na(format!("fewer than {min_references} references"));
    }
    let shared = a.intersection(b).count();
    let union = a.len() + b.len() - shared;
    if union == 0 {
        return Score::na("no references");
    }
    Score::Value(shared as f64 / union as f64)
}

pub fn lccs<T: Eq + Hash>(query: &[T], other: &[T]) -> Score {
    query_normalized(query.len(), lcs_length(query, other), "query has no resolved citations")
}

pub fn gct<T: Eq + Hash>(query: &[T], other: &[T], min_tile: usize) -> Score {
    if query.is_empty() {
        return Score::na("query has no resolved citations");
    }
    query_normalized(query.len(), tile_coverage(&greedy_tiles(query, other, min_tile)), "")
}

/// `Some(reason)` when the pair fails the shared-identifier gate.
pub fn math_gate(a: &DocFeatures, b: &DocFeatures, gates: &GateConfig) -> Option<String> {
    let shared = a.histogram.shared_distinct(&b.histogram);
    (shared < gates.min_shared_identifiers).then(|| {
        format!(
            "{shared} shared identifiers, need {}",
            gates.min_shared_identifiers
        )
    })
}

/// `Some(reason)` when either document has too few references.
pub fn citation_gate(a: &DocFeatures, b: &DocFeatures, gates: &GateConfig) -> Option<String> {
    let fewest = a.references.len().min(b.references.len());
    (fewest < gates.min_references)
        .then(|| format!("fewer than {} references", gates.min_references))
}

/// One gated measure for `(a, b)`; cheaper than [`compare_pair`] when only
/// a single score is needed.
pub fn measure_score(measure: Measure, a: &DocFeatures, b: &DocFeatures, gates: &GateConfig) -> Score {
    let gate = match measure.channel() {
        Channel::Math => math_gate(a, b, gates),
        Channel::Citation => citation_gate(a, b, gates),
        Channel::Text => None,
    };
    if let Some(reason) = gate {
        return Score::NotApplicable(reason);
    }
    match measure {
        Measure::Histo => histo(&a.histogram, &b.histogram),
        Measure::Lcis => lcis(&a.identifiers, &b.identifiers),
        Measure::Git => git(&a.identifiers, &b.identifiers, gates.min_identifier_tile),
        Measure::Bc => bc(&a.references, &b.references, gates.min_references),
        Measure::Lccs => lccs(&a.citations.items, &b.citations.items),
        Measure::Gct => gct(&a.citations.items, &b.citations.items, gates.min_citation_tile),
        Measure::Enco => encoplot_pairs(&a.text, &b.text).score(),
    }
}

/// All seven measures for one ordered pair, `a` being the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub doc_a: String,
    pub doc_b: String,
    pub scores: Vec<MeasureScore>,
    pub verdicts: BTreeMap<Measure, bool>,
    pub shared_identifiers: usize,
    pub identifier_tiles: Vec<Tile>,
    pub citation_tiles: Vec<Tile>,
    pub text_pairs: usize,
}

impl SimilarityReport {
    pub fn score(&self, measure: Measure) -> &Score {
        &self
            .scores
            .iter()
            .find(|s| s.measure == measure)
            .expect("report carries every measure")
            .score
    }

    pub fn value(&self, measure: Measure) -> Option<f64> {
        self.score(measure).value()
    }

    pub fn is_significant(&self, measure: Measure) -> bool {
        self.verdicts.get(&measure).copied().unwrap_or(false)
    }
}

/// Compute every applicable measure for `(a, b)` and attach verdicts.
pub fn compare_pair(
    a: &DocFeatures,
    b: &DocFeatures,
    gates: &GateConfig,
    thresholds: &ThresholdConfig,
) -> SimilarityReport {
    let mut scores = Vec::with_capacity(7);
    let shared_identifiers = a.histogram.shared_distinct(&b.histogram);

    let mut identifier_tiles = Vec::new();
    match math_gate(a, b, gates) {
        Some(reason) => {
            for m in [Measure::Histo, Measure::Lcis, Measure::Git] {
                scores.push(MeasureScore {
                    measure: m,
                    score: Score::NotApplicable(reason.clone()),
                });
            }
        }
        None => {
            scores.push(MeasureScore {
                measure: Measure::Histo,
                score: histo(&a.histogram, &b.histogram),
            });
            scores.push(MeasureScore {
                measure: Measure::Lcis,
                score: lcis(&a.identifiers, &b.identifiers),
            });
            let (git_score, tiles) =
                git_with_tiles(&a.identifiers, &b.identifiers, gates.min_identifier_tile);
            identifier_tiles = tiles;
            scores.push(MeasureScore {
                measure: Measure::Git,
                score: git_score,
            });
        }
    }

    let mut citation_tiles = Vec::new();
    match citation_gate(a, b, gates) {
        Some(reason) => {
            for m in [Measure::Bc, Measure::Lccs, Measure::Gct] {
                scores.push(MeasureScore {
                    measure: m,
                    score: Score::NotApplicable(reason.clone()),
                });
            }
        }
        None => {
            scores.push(MeasureScore {
                measure: Measure::Bc,
                score: bc(&a.references, &b.references, gates.min_references),
            });
            let (qa, qb) = (&a.citations.items, &b.citations.items);
            scores.push(MeasureScore {
                measure: Measure::Lccs,
                score: lccs(qa, qb),
            });
            let gct_score = if qa.is_empty() {
                Score::na("query has no resolved citations")
            } else {
                citation_tiles = greedy_tiles(qa, qb, gates.min_citation_tile);
                Score::Value(tile_coverage(&citation_tiles) as f64 / qa.len() as f64)
            };
            scores.push(MeasureScore {
                measure: Measure::Gct,
                score: gct_score,
            });
        }
    }

    let enco = encoplot_pairs(&a.text, &b.text);
    scores.push(MeasureScore {
        measure: Measure::Enco,
        score: enco.score(),
    });

    let verdicts = scores
        .iter()
        .map(|s| {
            let significant = s
                .score
                .value()
                .is_some_and(|v| v >= thresholds.get(s.measure));
            (s.measure, significant)
        })
        .collect();

    SimilarityReport {
        doc_a: a.doc_id.clone(),
        doc_b: b.doc_id.clone(),
        scores,
        verdicts,
        shared_identifiers,
        identifier_tiles,
        citation_tiles,
        text_pairs: enco.pairs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc_model::Identifier;
    use crate::features::build_histogram;

    fn hist(pairs: &[(&str, usize)]) -> IdentifierHistogram {
        let ids: Vec<Identifier> = pairs
            .iter()
            .flat_map(|(s, n)| std::iter::repeat_n(Identifier::new(*s), *n))
            .collect();
        build_histogram(&ids)
    }

    #[test]
    fn histo_hand_values() {
        let a = hist(&[("x", 2), ("y", 1)]);
        let b = hist(&[("x", 1), ("z", 1)]);
        let v = histo(&a, &b).value().unwrap();
        // 1 - (1/6 + 1/3 + 1/2) / (2/3 + 1/3 + 1/2)
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "{v}");
        assert_eq!(histo(&a, &a).value(), Some(1.0));
        assert_eq!(histo(&a, &hist(&[("q", 4)])).value(), Some(0.0));
        assert!(!histo(&a, &hist(&[])).is_applicable());
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_length(&["x", "y", "z", "x"], &["y", "x", "z"]), 2);
        assert_eq!(lcs_length(&[1, 2, 3], &[4, 5]), 0);
        let long: Vec<u32> = (0..200).map(|i| i % 7).collect();
        assert_eq!(lcs_length(&long, &long), 200);
        assert_eq!(lcs_length::<u8>(&[], &[1, 2]), 0);
    }

    #[test]
    fn lcis_examples() {
        assert_eq!(lcis(&["x", "y", "z", "x"], &["y", "x", "z"]).value(), Some(0.5));
        assert_eq!(lcis(&["x", "y"], &[]).value(), Some(0.0));
        assert!(!lcis::<&str>(&[], &["x"]).is_applicable());
    }

    #[test]
    fn tiling_examples() {
        let a: Vec<char> = "abcdefg".chars().collect();
        let b: Vec<char> = "zabcdey".chars().collect();
        assert_eq!(
            greedy_tiles(&a, &b, 5),
            vec![Tile {
                pos_a: 0,
                pos_b: 1,
                length: 5
            }]
        );
        let v = git(&a, &b, 5).value().unwrap();
        assert!((v - 5.0 / 7.0).abs() < 1e-12);

        let same: Vec<u8> = (0..10).collect();
        assert_eq!(greedy_tiles(&same, &same, 5).len(), 1);
        assert_eq!(git(&same, &same, 5).value(), Some(1.0));
        assert!(greedy_tiles(&[1, 2, 3], &[4, 5, 6], 1).is_empty());

        // shared blocks of length 4 only
        let a = [1, 2, 3, 4, 9, 5, 6, 7, 8];
        let b = [5, 6, 7, 8, 0, 1, 2, 3, 4];
        assert_eq!(git(&a, &b, 5).value(), Some(0.0));
    }

    #[test]
    fn tiling_tie_break_prefers_smallest_positions() {
        let a = [1, 2, 7, 1, 2];
        let b = [1, 2, 8, 1, 2];
        let tiles = greedy_tiles(&a, &b, 2);
        assert_eq!(tiles[0], Tile { pos_a: 0, pos_b: 0, length: 2 });
        assert_eq!(tiles[1], Tile { pos_a: 3, pos_b: 3, length: 2 });
    }

    #[test]
    fn bc_examples() {
        let set = |v: &[u32]| v.iter().map(|&x| GlobalReferenceId(x)).collect();
        assert_eq!(bc(&set(&[1, 2, 3]), &set(&[2, 3, 4]), 3).value(), Some(0.5));
        assert_eq!(bc(&set(&[1, 2, 3]), &set(&[1, 2, 3]), 3).value(), Some(1.0));
        assert_eq!(bc(&set(&[1, 2, 3]), &set(&[4, 5, 6]), 3).value(), Some(0.0));
        assert!(!bc(&set(&[1, 2, 3]), &set(&[1, 2]), 3).is_applicable());
    }

    #[test]
    fn citation_sequence_examples() {
        assert_eq!(lccs(&[5, 9, 5, 7], &[9, 5, 7]).value(), Some(0.75));
        assert_eq!(lccs(&[1, 2], &[3, 4]).value(), Some(0.0));
        assert_eq!(gct(&[5, 9, 7, 3], &[1, 5, 9, 2, 7, 3], 2).value(), Some(1.0));
        assert_eq!(gct(&[1, 2, 3], &[3, 2, 1], 2).value(), Some(0.0));
        assert_eq!(gct(&[4, 4], &[4, 4], 2).value(), Some(1.0));
    }

    #[test]
    fn encoplot_examples() {
        let t = "abcdefghijklmnopqrstuvwxyz012345";
        let m = encoplot_pairs(&normalize_for_encoplot(t), &normalize_for_encoplot(t));
        assert_eq!((m.pairs.len(), m.grams_a), (17, 17));
        assert_eq!(encoplot(t, t).value(), Some(1.0));
        assert_eq!(
            encoplot("aaaaaaaaaaaaaaaaaaaa", "bbbbbbbbbbbbbbbbbbbbbbbb").value(),
            Some(0.0)
        );
        assert!(!encoplot("short", "also short text here").is_applicable());
    }

    #[test]
    fn encoplot_normalization() {
        let n: String = normalize_for_encoplot("  Hello \t\n  World  ").into_iter().collect();
        assert_eq!(n, "hello world");
    }

    #[test]
    fn encoplot_pairs_each_occurrence_once() {
        // the gram "aaaaaaaaaaaaaaaa" occurs 3 times in a, 1 time in b
        let a: Vec<char> = "a".repeat(18).chars().collect();
        let b: Vec<char> = "a".repeat(16).chars().collect();
        let m = encoplot_pairs(&a, &b);
        assert_eq!(m.pairs, vec![(0, 0)]);
        assert_eq!(m.score().value(), Some(1.0));
    }

    #[test]
    fn colliding_hashes_still_pair_exactly() {
        let a: Vec<char> = "abcabcabcabcabcabcXYZabcabcabcabcabcabc".chars().collect();
        let b: Vec<char> = "XYZabcabcabcabcabcabcabcabcabcabcabc".chars().collect();
        let keys = |s: &[char]| -> Vec<(u32, u32)> {
            (0..=s.len() - ENCOPLOT_GRAM).map(|i| (0, i as u32)).collect()
        };
        let forced = pair_sorted(&a, &b, &keys(&a), &keys(&b), b.len() + 1 - ENCOPLOT_GRAM);
        let forced: Vec<(usize, usize)> = forced
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != NONE)
            .map(|(j, &p)| (p as usize, j))
            .collect();
        assert_eq!(forced, encoplot_pairs(&a, &b).pairs);
        assert!(!forced.is_empty());
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert!("nope".parse::<Measure>().is_err());
    }

    #[test]
    fn score_serialization() {
        let s = MeasureScore {
            measure: Measure::Git,
            score: Score::Value(0.5),
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"measure":"GIT","value":0.5}"#
        );
        let na = MeasureScore {
            measure: Measure::Bc,
            score: Score::na("gate"),
        };
        let json = serde_json::to_string(&na).unwrap();
        assert_eq!(json, r#"{"measure":"BC","not_applicable":"gate"}"#);
        assert_eq!(serde_json::from_str::<MeasureScore>(&json).unwrap(), na);
    }
}
