//! End-to-end analysis: retrieval then pairwise comparison, the
//! confirmed-case evaluation protocol and the corpus-wide exploratory
//! ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::{Corpus, DocFeatures};
use crate::error::{Error, Result};
use crate::index::CorpusIndex;
use crate::measures::{compare_pair, git, histo, math_gate, Channel, Measure, Score, SimilarityReport};
use crate::retrieval::{retrieve_candidates, CandidateSet};

/// A corpus together with its index and the active configuration.
pub struct Engine {
    corpus: Corpus,
    index: CorpusIndex,
    config: RunConfig,
}

impl Engine {
    /// Build the index in memory.
    pub fn build(corpus: Corpus, config: RunConfig) -> Result<Self> {
        let index = CorpusIndex::from_corpus(&corpus)?;
        Self::new(corpus, index, config)
    }

    pub fn new(corpus: Corpus, index: CorpusIndex, config: RunConfig) -> Result<Self> {
        config.validate()?;
        if let Some(missing) = corpus.features().iter().find(|f| !index.contains(&f.doc_id)) {
            return Err(Error::Config(format!(
                "index does not contain corpus document `{}`; re-run indexing",
                missing.doc_id
            )));
        }
        Ok(Engine {
            corpus,
            index,
            config,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.index
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn compare(&self, a: &str, b: &str) -> Result<SimilarityReport> {
        let fa = self.corpus.doc_features(a)?;
        let fb = self.corpus.doc_features(b)?;
        Ok(compare_pair(fa, fb, &self.config.gates, &self.config.thresholds))
    }

    pub fn candidates(&self, query: &str, k: usize) -> Result<CandidateSet> {
        let f = self.corpus.doc_features(query)?;
        Ok(retrieve_candidates(f, &self.index, k))
    }

    /// Retrieve candidates for `query` and compare it with every member of
    /// the candidate union.
    pub fn analyze(&self, query: &str, k: usize) -> Result<Analysis> {
        let f = self.corpus.doc_features(query)?;
        let candidates = retrieve_candidates(f, &self.index, k);
        let mut diagnostics = Vec::new();
        if f.identifiers.is_empty() && f.citations.is_empty() && f.fingerprints.is_empty() {
            diagnostics.push(format!(
                "document `{query}` has no identifiers, resolved citations or text fingerprints"
            ));
        }
        for ch in Channel::ALL {
            if candidates.channel(ch).is_empty() {
                diagnostics.push(format!("{} channel returned no candidates", ch.name()));
            }
        }
        let reports = candidates
            .union
            .par_iter()
            .map(|d| {
                let other = self.corpus.doc_features(d)?;
                Ok(compare_pair(f, other, &self.config.gates, &self.config.thresholds))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Analysis {
            query: query.to_string(),
            candidates,
            reports,
            diagnostics,
        })
    }

    /// Score-and-rank evaluation over confirmed (query, source) cases.
    pub fn evaluate(&self, cases: &[TestCase], k: usize) -> Result<EvaluationResult> {
        for c in cases {
            c.check(&self.corpus)?;
        }
        let results = cases
            .par_iter()
            .map(|c| {
                let analysis = self.analyze(&c.query_doc, k)?;
                Ok(evaluate_case(c, &analysis))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluationResult::from_cases(results, k))
    }

    /// Rank all candidate pairs in the corpus for manual inspection.
    ///
    /// Drops pairs sharing an author, pairs where the older document cites
    /// the newer one, and pairs below the Histo floor; keeps one
    /// orientation per unordered pair (higher GIT) and sorts by GIT.
    pub fn explore(&self, limit: usize) -> Result<Vec<SuspectPair>> {
        let docs = self.corpus.features();
        let cfg = &self.config;
        let k = cfg.top_k;

        let found: Vec<Vec<Screened>> = (0..docs.len())
            .into_par_iter()
            .map(|i| {
                let a = &docs[i];
                let cands = retrieve_candidates(a, &self.index, k);
                cands
                    .union
                    .iter()
                    .filter_map(|d| self.corpus.position(d))
                    .filter_map(|j| screen(a, &docs[j], cfg).map(|(h, g)| Screened { a: i, b: j, histo: h, git: g }))
                    .collect()
            })
            .collect();

        // single-writer merge: keep the higher-GIT orientation per pair
        let mut best: HashMap<(usize, usize), Screened> = HashMap::new();
        for s in found.into_iter().flatten() {
            let key = (s.a.min(s.b), s.a.max(s.b));
            match best.get(&key) {
                Some(prev) if !prefer(&s, prev, docs) => {}
                _ => {
                    best.insert(key, s);
                }
            }
        }
        let mut ranked: Vec<Screened> = best.into_values().collect();
        ranked.sort_by(|x, y| {
            y.git
                .total_cmp(&x.git)
                .then_with(|| y.histo.total_cmp(&x.histo))
                .then_with(|| docs[x.a].doc_id.cmp(&docs[y.a].doc_id))
                .then_with(|| docs[x.b].doc_id.cmp(&docs[y.b].doc_id))
        });
        ranked.truncate(limit);

        Ok(ranked
            .into_par_iter()
            .map(|s| {
                let report = compare_pair(&docs[s.a], &docs[s.b], &cfg.gates, &cfg.thresholds);
                SuspectPair {
                    doc_a: docs[s.a].doc_id.clone(),
                    doc_b: docs[s.b].doc_id.clone(),
                    histo_score: s.histo,
                    git_score: s.git,
                    report,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
struct Screened {
    a: usize,
    b: usize,
    histo: f64,
    git: f64,
}

fn prefer(new: &Screened, old: &Screened, docs: &[DocFeatures]) -> bool {
    match new.git.total_cmp(&old.git) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => docs[new.a].doc_id < docs[old.a].doc_id,
    }
}

/// Exploratory filters for the ordered pair; `Some((histo, git))` if kept.
fn screen(a: &DocFeatures, b: &DocFeatures, cfg: &RunConfig) -> Option<(f64, f64)> {
    if !explore_violations(a, b, cfg).is_empty() {
        return None;
    }
    let h = histo(&a.histogram, &b.histogram).value()?;
    let g = git(&a.identifiers, &b.identifiers, cfg.gates.min_identifier_tile).value()?;
    Some((h, g))
}

/// Which exploratory filters the pair violates (empty = admissible).
/// Histo is recomputed here so the predicate can audit any output.
pub fn explore_violations(a: &DocFeatures, b: &DocFeatures, cfg: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    if a.shares_author(b) {
        out.push("documents share an author".to_string());
    }
    if older_cites_newer(a, b) {
        out.push("older document cites the newer one".to_string());
    }
    if let Some(reason) = math_gate(a, b, &cfg.gates) {
        out.push(reason);
    } else {
        match histo(&a.histogram, &b.histogram) {
            Score::Value(h) if h >= cfg.explore.min_histo => {}
            s => out.push(format!("histo {s} below {}", cfg.explore.min_histo)),
        }
    }
    out
}

/// Pairs with a missing or equal date are never treated as citing
/// backwards.
pub fn older_cites_newer(a: &DocFeatures, b: &DocFeatures) -> bool {
    match (a.date, b.date) {
        (Some(da), Some(db)) if da < db => a.cites(b),
        (Some(da), Some(db)) if db < da => b.cites(a),
        _ => false,
    }
}

/// Result of [`Engine::analyze`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub query: String,
    pub candidates: CandidateSet,
    /// One report per member of the candidate union, ordered by doc id.
    pub reports: Vec<SimilarityReport>,
    pub diagnostics: Vec<String>,
}

impl Analysis {
    /// Reports for one channel's candidates (or the union when `None`),
    /// sorted by `measure` descending, NotApplicable last, ties by doc id.
    pub fn ranking(&self, measure: Measure, channel: Option<Channel>) -> Vec<&SimilarityReport> {
        let mut out: Vec<&SimilarityReport> = match channel {
            None => self.reports.iter().collect(),
            Some(ch) => self
                .reports
                .iter()
                .filter(|r| self.candidates.contains(ch, &r.doc_b))
                .collect(),
        };
        out.sort_by(|x, y| cmp_scores(x.score(measure), y.score(measure)).then_with(|| x.doc_b.cmp(&y.doc_b)));
        out
    }

    pub fn report_for(&self, doc_id: &str) -> Option<&SimilarityReport> {
        self.reports.iter().find(|r| r.doc_b == doc_id)
    }
}

/// Descending by value; NotApplicable after every value.
fn cmp_scores(a: &Score, b: &Score) -> Ordering {
    match (a.value(), b.value()) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// A confirmed plagiarism case: the query document and its true source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub case_id: String,
    pub query_doc: String,
    pub source_doc: String,
}

impl TestCase {
    fn check(&self, corpus: &Corpus) -> Result<()> {
        for d in [&self.query_doc, &self.source_doc] {
            if corpus.position(d).is_none() {
                return Err(Error::MissingCaseDocument {
                    case_id: self.case_id.clone(),
                    doc_id: d.clone(),
                });
            }
        }
        if self.query_doc == self.source_doc {
            return Err(Error::InvalidCase {
                case_id: self.case_id.clone(),
                message: "query and source are the same document".into(),
            });
        }
        Ok(())
    }
}

/// Read a case manifest: JSON array of cases, or CSV with a
/// `case_id,query_doc,source_doc` header.
pub fn load_cases(path: &Path) -> Result<Vec<TestCase>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'[');
    if is_json {
        return Ok(serde_json::from_slice(&bytes)?);
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn cases_to_csv(cases: &[TestCase]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cases {
        w.serialize(c)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Where the source landed in one ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// Ceiling of the mean rank of the tie group.
    pub rank: usize,
    pub score: f64,
    pub tied: bool,
    pub tie_first: usize,
    pub tie_last: usize,
}

impl RankEntry {
    /// Display form: tied ranks carry an apostrophe, e.g. `6'`.
    pub fn label(&self) -> String {
        if self.tied {
            format!("{}'", self.rank)
        } else {
            self.rank.to_string()
        }
    }
}

/// Rank of `source` by `measure` among `reports`. `None` if the source is
/// absent or its score is NotApplicable.
pub fn rank_of(reports: &[&SimilarityReport], source: &str, measure: Measure) -> Option<RankEntry> {
    let target = reports.iter().find(|r| r.doc_b == source)?.value(measure)?;
    let values: Vec<f64> = reports.iter().filter_map(|r| r.value(measure)).collect();
    Some(tie_rank(&values, target))
}

/// Rank of `target` within `values` (descending). Ties get the ceiling of
/// the mean of the ranks spanned by the tie group.
pub fn tie_rank(values: &[f64], target: f64) -> RankEntry {
    let greater = values.iter().filter(|&&v| v > target).count();
    let equal = values.iter().filter(|&&v| v == target).count().max(1);
    let first = greater + 1;
    let last = greater + equal;
    RankEntry {
        rank: (first + last).div_ceil(2),
        score: target,
        tied: equal > 1,
        tie_first: first,
        tie_last: last,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOutcome {
    pub measure: Measure,
    /// Rank among the candidates of the measure's own channel.
    pub channel: Option<RankEntry>,
    /// Rank among the union of all channels' candidates.
    pub union: Option<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub query_doc: String,
    pub source_doc: String,
    pub retrieved: ChannelHits,
    pub measures: Vec<MeasureOutcome>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelHits {
    pub math: bool,
    pub citation: bool,
    pub text: bool,
    pub union: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecall {
    pub math: f64,
    pub citation: f64,
    pub text: f64,
    pub union: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureMrr {
    pub measure: Measure,
    pub channel: f64,
    pub union: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub top_k: usize,
    pub cases: Vec<CaseResult>,
    pub recall: ChannelRecall,
    pub mrr: Vec<MeasureMrr>,
}

fn evaluate_case(case: &TestCase, analysis: &Analysis) -> CaseResult {
    let src = case.source_doc.as_str();
    let cs = &analysis.candidates;
    let retrieved = ChannelHits {
        math: cs.contains(Channel::Math, src),
        citation: cs.contains(Channel::Citation, src),
        text: cs.contains(Channel::Text, src),
        union: cs.union.contains(src),
    };
    let all: Vec<&SimilarityReport> = analysis.reports.iter().collect();
    let measures = Measure::ALL
        .iter()
        .map(|&m| {
            let in_channel: Vec<&SimilarityReport> = all
                .iter()
                .copied()
                .filter(|r| cs.contains(m.channel(), &r.doc_b))
                .collect();
            MeasureOutcome {
                measure: m,
                channel: rank_of(&in_channel, src, m),
                union: rank_of(&all, src, m),
            }
        })
        .collect();
    CaseResult {
        case_id: case.case_id.clone(),
        query_doc: case.query_doc.clone(),
        source_doc: case.source_doc.clone(),
        retrieved,
        measures,
    }
}

/// Mean reciprocal rank; absent ranks contribute 0.
pub fn mean_reciprocal_rank(ranks: &[Option<usize>]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks
        .iter()
        .map(|r| r.map_or(0.0, |r| 1.0 / r as f64))
        .sum::<f64>()
        / ranks.len() as f64
}

impl EvaluationResult {
    pub fn from_cases(cases: Vec<CaseResult>, top_k: usize) -> Self {
        let n = cases.len().max(1) as f64;
        let frac = |f: fn(&ChannelHits) -> bool| cases.iter().filter(|c| f(&c.retrieved)).count() as f64 / n;
        let recall = ChannelRecall {
            math: frac(|h| h.math),
            citation: frac(|h| h.citation),
            text: frac(|h| h.text),
            union: frac(|h| h.union),
        };
        let mrr = Measure::ALL
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let channel: Vec<Option<usize>> =
                    cases.iter().map(|c| c.measures[k].channel.map(|r| r.rank)).collect();
                let union: Vec<Option<usize>> =
                    cases.iter().map(|c| c.measures[k].union.map(|r| r.rank)).collect();
                MeasureMrr {
                    measure: m,
                    channel: mean_reciprocal_rank(&channel),
                    union: mean_reciprocal_rank(&union),
                }
            })
            .collect();
        EvaluationResult {
            top_k,
            cases,
            recall,
            mrr,
        }
    }

    pub fn mrr_of(&self, measure: Measure) -> &MeasureMrr {
        self.mrr
            .iter()
            .find(|m| m.measure == measure)
            .expect("every measure has an MRR entry")
    }

    /// One row per case: channel hits, then rank and score per measure
    /// (own-channel candidates), then recall and MRR summary rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["case", "math", "citation", "text", "union"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for m in Measure::ALL {
            header.push(format!("{}_r", m.name()));
            header.push(format!("{}_s", m.name()));
            header.push(format!("{}_union_r", m.name()));
        }
        w.write_record(&header)?;
        let mark = |b: bool| if b { "+" } else { "-" }.to_string();
        for c in &self.cases {
            let mut row = vec![
                c.case_id.clone(),
                mark(c.retrieved.math),
                mark(c.retrieved.citation),
                mark(c.retrieved.text),
                mark(c.retrieved.union),
            ];
            for o in &c.measures {
                row.push(o.channel.map(|r| r.label()).unwrap_or_else(|| "-".into()));
                row.push(o.channel.map(|r| format!("{:.2}", r.score)).unwrap_or_else(|| "-".into()));
                row.push(o.union.map(|r| r.label()).unwrap_or_else(|| "-".into()));
            }
            w.write_record(&row)?;
        }
        let pad = 3 * Measure::ALL.len();
        let mut recall = vec![
            "recall".to_string(),
            format!("{:.2}", self.recall.math),
            format!("{:.2}", self.recall.citation),
            format!("{:.2}", self.recall.text),
            format!("{:.2}", self.recall.union),
        ];
        recall.extend(std::iter::repeat_n(String::new(), pad));
        w.write_record(&recall)?;
        let mut mrr = vec!["MRR".to_string(), String::new(), String::new(), String::new(), String::new()];
        for m in &self.mrr {
            mrr.push(format!("{:.2}", m.channel));
            mrr.push(String::new());
            mrr.push(format!("{:.2}", m.union));
        }
        w.write_record(&mrr)?;
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One entry of the exploratory ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectPair {
    pub doc_a: String,
    pub doc_b: String,
    pub histo_score: f64,
    pub git_score: f64,
    pub report: SimilarityReport,
}

// ---------------------------------------------------------------------------
// rendering

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Html,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "html" => Ok(ReportFormat::Html),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Machine-readable report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub reports: Vec<SimilarityReport>,
}

pub const NO_CANDIDATES: &str = "no candidates";

pub fn render_report(reports: &[SimilarityReport], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let doc = ReportDocument {
                message: reports.is_empty().then(|| NO_CANDIDATES.to_string()),
                reports: reports.to_vec(),
            };
            Ok(serde_json::to_vec_pretty(&doc)?)
        }
        ReportFormat::Html => Ok(render_html(reports).into_bytes()),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn render_html(reports: &[SimilarityReport]) -> String {
    use std::fmt::Write;
    let mut h = String::new();
    h.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Similarity report</title>\n");
    h.push_str(
        "<style>td,th{padding:2px 8px;text-align:right}td.significant{background:#f8c0c0;font-weight:bold}\
         td.na{color:#999}</style></head><body>\n<h1>Similarity report</h1>\n",
    );
    if reports.is_empty() {
        h.push_str("<p class=\"empty\">No candidates.</p>\n</body></html>\n");
        return h;
    }
    h.push_str("<table>\n<tr><th>query</th><th>candidate</th>");
    for m in Measure::ALL {
        let _ = write!(h, "<th>{}</th>", m.name());
    }
    h.push_str("</tr>\n");
    for r in reports {
        let _ = write!(h, "<tr><td>{}</td><td>{}</td>", escape(&r.doc_a), escape(&r.doc_b));
        for m in Measure::ALL {
            match r.score(m) {
                Score::Value(v) if r.is_significant(m) => {
                    let _ = write!(h, "<td class=\"significant\" title=\"significant\">{v:.3} *</td>");
                }
                Score::Value(v) => {
                    let _ = write!(h, "<td>{v:.3}</td>");
                }
                Score::NotApplicable(reason) => {
                    let _ = write!(h, "<td class=\"na\" title=\"{}\">-</td>", escape(reason));
                }
            }
        }
        h.push_str("</tr>\n");
    }
    h.push_str("</table>\n<p>* score at or above the significance threshold</p>\n");

    for r in reports {
        if r.identifier_tiles.is_empty() && r.citation_tiles.is_empty() {
            continue;
        }
        let _ = writeln!(h, "<h2>{} vs {}</h2>", escape(&r.doc_a), escape(&r.doc_b));
        for (label, tiles) in [("Identifier tiles", &r.identifier_tiles), ("Citation tiles", &r.citation_tiles)] {
            if tiles.is_empty() {
                continue;
            }
            let _ = writeln!(h, "<h3>{label}</h3>\n<table><tr><th>query pos</th><th>candidate pos</th><th>length</th></tr>");
            for t in tiles {
                let _ = writeln!(h, "<tr><td>{}</td><td>{}</td><td>{}</td></tr>", t.pos_a, t.pos_b, t.length);
            }
            h.push_str("</table>\n");
        }
    }
    h.push_str("</body></html>\n");
    h
}

/// Per-measure summary of an analysis, used by the CLI.
pub fn ranking_table(analysis: &Analysis) -> BTreeMap<Measure, Vec<(String, Score)>> {
    Measure::ALL
        .iter()
        .map(|&m| {
            let rows = analysis
                .ranking(m, Some(m.channel()))
                .into_iter()
                .map(|r| (r.doc_b.clone(), r.score(m).clone()))
                .collect();
            (m, rows)
        })
        .collect()
}
