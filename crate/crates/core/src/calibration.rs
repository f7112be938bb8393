//! Chance-level score distributions from random document pairs, and the
//! per-measure significance thresholds.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::measures::{compare_pair, measure_score, GateConfig, Measure, Score};

/// Minimum score at which each measure flags a pair as significant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub histo: f64,
    pub lcis: f64,
    pub git: f64,
    pub bc: f64,
    pub lccs: f64,
    pub gct: f64,
    pub enco: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        default_thresholds()
    }
}

pub fn default_thresholds() -> ThresholdConfig {
    ThresholdConfig {
        histo: 0.56,
        lcis: 0.76,
        git: 0.15,
        bc: 0.13,
        lccs: 0.22,
        gct: 0.10,
        enco: 0.06,
    }
}

impl ThresholdConfig {
    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Histo => self.histo,
            Measure::Lcis => self.lcis,
            Measure::Git => self.git,
            Measure::Bc => self.bc,
            Measure::Lccs => self.lccs,
            Measure::Gct => self.gct,
            Measure::Enco => self.enco,
        }
    }

    pub fn set(&mut self, measure: Measure, value: f64) {
        let slot = match measure {
            Measure::Histo => &mut self.histo,
            Measure::Lcis => &mut self.lcis,
            Measure::Git => &mut self.git,
            Measure::Bc => &mut self.bc,
            Measure::Lccs => &mut self.lccs,
            Measure::Gct => &mut self.gct,
            Measure::Enco => &mut self.enco,
        };
        *slot = value;
    }

    pub fn validate(&self) -> Result<()> {
        for m in Measure::ALL {
            let v = self.get(m);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "threshold for {m} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Summary of one measure's scores over a pair sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub measure: Measure,
    pub sample_size: usize,
    pub applicable_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub median: Option<f64>,
    pub p90: Option<f64>,
    pub p99: Option<f64>,
    pub p999: Option<f64>,
}

/// Linear interpolation between closest ranks on sorted data.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Summarise scores for one measure; NotApplicable entries are counted in
/// `sample_size` only.
pub fn summarize(measure: Measure, scores: &[Score]) -> ScoreDistribution {
    let mut values: Vec<f64> = scores.iter().filter_map(Score::value).collect();
    values.sort_by(f64::total_cmp);
    ScoreDistribution {
        measure,
        sample_size: scores.len(),
        applicable_count: values.len(),
        min: values.first().copied(),
        max: values.last().copied(),
        median: percentile(&values, 0.5),
        p90: percentile(&values, 0.9),
        p99: percentile(&values, 0.99),
        p999: percentile(&values, 0.999),
    }
}

/// Attempts allowed before [`sample_pair_indices`] gives up.
pub fn retry_budget(n: usize) -> usize {
    n.saturating_mul(100).saturating_add(10_000)
}

/// Draw `n` distinct unordered pairs of corpus positions, rejecting pairs
/// that share a normalised author or where either document cites the
/// other. The first element of each pair is the query side.
pub fn sample_pair_indices(corpus: &Corpus, n: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let docs = corpus.features();
    if docs.len() < 2 {
        return Err(Error::Config(
            "pair sampling needs a corpus of at least two documents".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    let budget = retry_budget(n);
    let mut attempts = 0;
    while pairs.len() < n {
        if attempts == budget {
            return Err(Error::SamplingExhausted {
                found: pairs.len(),
                requested: n,
                attempts,
            });
        }
        attempts += 1;
        let a = rng.gen_range(0..docs.len());
        let b = rng.gen_range(0..docs.len());
        if a == b || seen.contains(&(a.min(b), a.max(b))) {
            continue;
        }
        let (da, db) = (&docs[a], &docs[b]);
        if da.shares_author(db) || da.cites(db) || db.cites(da) {
            continue;
        }
        seen.insert((a.min(b), a.max(b)));
        pairs.push((a, b));
    }
    Ok(pairs)
}

pub fn sample_pairs(corpus: &Corpus, n: usize, seed: u64) -> Result<Vec<(String, String)>> {
    let docs = corpus.features();
    Ok(sample_pair_indices(corpus, n, seed)?
        .into_iter()
        .map(|(a, b)| (docs[a].doc_id.clone(), docs[b].doc_id.clone()))
        .collect())
}

/// Score one measure over the given pairs (in parallel) and summarise.
pub fn score_distribution(
    corpus: &Corpus,
    measure: Measure,
    pairs: &[(usize, usize)],
    gates: &GateConfig,
) -> ScoreDistribution {
    let docs = corpus.features();
    let scores: Vec<Score> = pairs
        .par_iter()
        .map(|&(a, b)| measure_score(measure, &docs[a], &docs[b], gates))
        .collect();
    summarize(measure, &scores)
}

/// Result of a full calibration run over all seven measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub seed: u64,
    pub pairs: usize,
    pub distributions: Vec<ScoreDistribution>,
    /// p99.9 of each measure's chance distribution. A machine-generated
    /// starting point only; thresholds in use are set by inspection.
    pub suggested_thresholds: ThresholdConfig,
    pub suggestion_method: String,
}

/// Sample pairs, score every measure once per pair, summarise.
pub fn calibrate(corpus: &Corpus, n: usize, seed: u64, gates: &GateConfig) -> Result<CalibrationReport> {
    let pairs = sample_pair_indices(corpus, n, seed)?;
    let docs = corpus.features();
    let thresholds = default_thresholds();
    let reports: Vec<Vec<Score>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            compare_pair(&docs[a], &docs[b], gates, &thresholds)
                .scores
                .into_iter()
                .map(|s| s.score)
                .collect()
        })
        .collect();

    let distributions: Vec<ScoreDistribution> = Measure::ALL
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let column: Vec<Score> = reports.iter().map(|r| r[k].clone()).collect();
            summarize(m, &column)
        })
        .collect();

    Ok(CalibrationReport {
        seed,
        pairs: pairs.len(),
        suggested_thresholds: suggest_thresholds(&distributions),
        distributions,
        suggestion_method: "heuristic: 99.9th percentile of chance-level scores; \
                            measures with no applicable pairs keep their defaults"
            .into(),
    })
}

pub fn suggest_thresholds(distributions: &[ScoreDistribution]) -> ThresholdConfig {
    let mut t = default_thresholds();
    for d in distributions {
        if let Some(p) = d.p999 {
            t.set(d.measure, p);
        }
    }
    t
}

impl CalibrationReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "measure",
            "sample_size",
            "applicable_count",
            "min",
            "median",
            "p90",
            "p99",
            "p999",
            "max",
            "suggested_threshold",
        ])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for d in &self.distributions {
            w.write_record([
                d.measure.name().to_string(),
                d.sample_size.to_string(),
                d.applicable_count.to_string(),
                fmt(d.min),
                fmt(d.median),
                fmt(d.p90),
                fmt(d.p99),
                fmt(d.p999),
                fmt(d.max),
                format!("{:.6}", self.suggested_thresholds.get(d.measure)),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
