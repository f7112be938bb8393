//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{encoplot_oracle, exhaustive_top_k, gst_naive, lcs_dp};
use stemsim::calibration::{default_thresholds, sample_pair_indices};
use stemsim::corpus::Corpus;
use stemsim::doc_model::{CitationInstance, Document, Identifier, ReferenceEntry};
use stemsim::features::{build_histogram, fnv1a64, is_retained, ConsolidationConfig};
use stemsim::index::{CorpusIndex, Field};
use stemsim::measures::{
    compare_pair, encoplot_pairs, greedy_tiles, histo, lcs_length, measure_score, GateConfig, Measure, ENCOPLOT_GRAM,
};
use stemsim::pipeline::Engine;
use stemsim::retrieval::{citation_query, math_query, text_query};
use stemsim::synth::{generate, CiteRelation, PlantSpec, SynthConfig};
use stemsim::RunConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

// 1 -------------------------------------------------------------------------

fn kernel_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lcs_bad = 0;
    let mut gst_bad = 0;
    let pairs = 10_000;
    for _ in 0..pairs {
        let seq = |rng: &mut ChaCha8Rng| -> Vec<u8> {
            let n = rng.gen_range(0..=12);
            (0..n).map(|_| rng.gen_range(0..4)).collect()
        };
        let a = seq(&mut rng);
        let b = seq(&mut rng);
        let min_len = rng.gen_range(1..=3);
        if lcs_length(&a, &b) != lcs_dp(&a, &b) {
            lcs_bad += 1;
        }
        if greedy_tiles(&a, &b, min_len) != gst_naive(&a, &b, min_len) {
            gst_bad += 1;
        }
    }
    let took = start.elapsed();
    outcome(
        lcs_bad == 0 && gst_bad == 0 && took < Duration::from_secs(60),
        format!("{pairs} pairs, {lcs_bad} LCS and {gst_bad} tiling mismatches, {}", secs(took)),
    )
}

// 2 -------------------------------------------------------------------------

fn histogram(symbols: &[&str]) -> stemsim::features::IdentifierHistogram {
    let ids: Vec<Identifier> = symbols.iter().map(|s| Identifier::new(*s)).collect();
    build_histogram(&ids)
}

fn histo_hand_values() -> Outcome {
    let v = |s: stemsim::Score| s.value().unwrap_or(f64::NAN);
    let mixed = v(histo(&histogram(&["x", "x", "y"]), &histogram(&["x", "z"])));
    let same = v(histo(&histogram(&["x", "y", "y"]), &histogram(&["x", "y", "y"])));
    let disjoint = v(histo(&histogram(&["x", "y"]), &histogram(&["z", "w"])));
    outcome(
        (mixed - 1.0 / 3.0).abs() <= 1e-12 && (same - 1.0).abs() <= 1e-12 && disjoint.abs() <= 1e-12,
        format!("mixed {mixed:.15}, identical {same}, disjoint {disjoint}"),
    )
}

// 3 -------------------------------------------------------------------------

fn gate_doc(id: &str, author: &str, symbols: &[String], works: &[String]) -> Document {
    let mut identifiers: Vec<Identifier> = symbols.iter().map(|s| Identifier::new(s.clone())).collect();
    // repeat so sequence measures have something to tile
    identifiers.extend(symbols.iter().map(|s| Identifier::new(s.clone())));
    Document {
        doc_id: id.into(),
        title: format!("Gate probe {id}"),
        authors: vec![author.into()],
        date: None,
        text: "a short text about gates and boundaries".into(),
        identifiers,
        citations: (0..works.len())
            .map(|i| CitationInstance {
                position: i,
                ref_index: Some(i),
            })
            .collect(),
        references: works
            .iter()
            .map(|t| ReferenceEntry::new(format!("Q. Author. {t}."), t.clone(), vec!["Q. Author".into()]))
            .collect(),
    }
}

fn gate_boundaries() -> Outcome {
    let sym = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let titles = [
        "Spectral gaps of random regular graphs",
        "Boundary layers in rotating fluids",
        "Entropy production far from equilibrium",
    ];
    let work = |n: usize| titles[..n].iter().map(|t| t.to_string()).collect::<Vec<_>>();
    let gates = GateConfig::default();
    let th = default_thresholds();
    let mut lines = Vec::new();
    let mut ok = true;
    for (shared, refs, math_ok, cite_ok) in [(19, 2, false, false), (20, 3, true, true)] {
        let a = gate_doc("a", "A. One", &[sym("s", shared), sym("a", 5)].concat(), &work(refs));
        let b = gate_doc("b", "B. Two", &[sym("s", shared), sym("b", 5)].concat(), &work(refs));
        let corpus = Corpus::build(vec![a, b], &ConsolidationConfig::default()).expect("valid gate corpus");
        let f = corpus.features();
        let r = compare_pair(&f[0], &f[1], &gates, &th);
        let math = [Measure::Histo, Measure::Lcis, Measure::Git].map(|m| r.score(m).is_applicable());
        let cite = [Measure::Bc, Measure::Lccs, Measure::Gct].map(|m| r.score(m).is_applicable());
        ok &= math.iter().all(|&x| x == math_ok) && cite.iter().all(|&x| x == cite_ok);
        lines.push(format!(
            "{shared} shared ids -> math {}, {refs} refs -> citation {}",
            if math.iter().all(|&x| x) { "scored" } else { "n/a" },
            if cite.iter().all(|&x| x) { "scored" } else { "n/a" }
        ));
    }
    outcome(ok, lines.join("; "))
}

// 4 -------------------------------------------------------------------------

fn threshold_defaults() -> Outcome {
    let t = default_thresholds();
    let got = [t.histo, t.lcis, t.git, t.bc, t.lccs, t.gct, t.enco];
    let want = [0.56, 0.76, 0.15, 0.13, 0.22, 0.10, 0.06];
    outcome(got == want, format!("{got:?}"))
}

// 5 and 6 -------------------------------------------------------------------

fn real_plant() -> PlantSpec {
    PlantSpec {
        identifier_fraction: 0.4,
        citation_fraction: 0.3,
        text_fraction: 0.2,
        ..PlantSpec::default()
    }
}

fn engine_for(docs: &[Document]) -> Engine {
    let cfg = RunConfig::default();
    let corpus = Corpus::build(docs.to_vec(), &cfg.consolidation).expect("synthetic corpus is valid");
    Engine::build(corpus, cfg).expect("engine")
}

fn planted_evaluation(synth: &stemsim::synth::SyntheticCorpus, gen_time: Duration) -> Outcome {
    let start = Instant::now();
    let engine = engine_for(&synth.documents);
    let result = engine.evaluate(&synth.cases(), 100).expect("evaluation");
    let took = gen_time + start.elapsed();
    let r = result.recall;
    let git_mrr = result.mrr_of(Measure::Git).union;
    outcome(
        r.math >= 0.7
            && r.citation >= 0.7
            && r.text >= 0.7
            && r.union == 1.0
            && git_mrr >= 0.9
            && took < Duration::from_secs(600),
        format!(
            "{} docs, {} cases: recall math {:.2} citation {:.2} text {:.2} union {:.2}; GIT MRR {:.2}; {}",
            synth.documents.len(),
            result.cases.len(),
            r.math,
            r.citation,
            r.text,
            r.union,
            git_mrr,
            secs(took)
        ),
    )
}

fn explore_audit(mut synth: stemsim::synth::SyntheticCorpus) -> Outcome {
    let start = Instant::now();
    let plants: Vec<(String, String)> = synth
        .plants
        .iter()
        .map(|p| (p.query_doc.clone(), p.source_doc.clone()))
        .collect();
    let mut decoys = vec![
        PlantSpec {
            share_author: true,
            ..PlantSpec::default()
        };
        5
    ];
    decoys.extend(vec![
        PlantSpec {
            cite: CiteRelation::SourceCitesDerived,
            ..PlantSpec::default()
        };
        5
    ]);
    synth.plant(&decoys).expect("decoys");
    let decoy_pairs: HashSet<BTreeSet<String>> = synth.plants[plants.len()..]
        .iter()
        .map(|p| [p.query_doc.clone(), p.source_doc.clone()].into())
        .collect();
    let engine = engine_for(&synth.documents);
    let out = engine.explore(100).expect("explore");
    let pairs: Vec<BTreeSet<String>> = out.iter().map(|s| [s.doc_a.clone(), s.doc_b.clone()].into()).collect();
    let decoys_found = pairs.iter().filter(|p| decoy_pairs.contains(*p)).count();
    let ranks: Vec<Option<usize>> = plants
        .iter()
        .map(|(q, s)| {
            let key: BTreeSet<String> = [q.clone(), s.clone()].into();
            pairs.iter().position(|p| *p == key).map(|r| r + 1)
        })
        .collect();
    let worst = ranks.iter().map(|r| r.unwrap_or(usize::MAX)).max().unwrap_or(0);
    let shown: Vec<String> = ranks
        .iter()
        .map(|r| r.map_or("-".to_string(), |r| r.to_string()))
        .collect();
    outcome(
        decoys_found == 0 && worst <= 15,
        format!(
            "{} docs, {} pairs listed, {decoys_found} decoys; plant ranks [{}]; {}",
            synth.documents.len(),
            out.len(),
            shown.join(", "),
            secs(start.elapsed())
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn random_text(rng: &mut ChaCha8Rng, len: usize, alphabet: &[char]) -> Vec<char> {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

fn encoplot_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for t in 0..1000 {
        // small alphabets and shared segments force repeated grams
        let alphabet: Vec<char> = "ab cd".chars().take(2 + t % 4).collect();
        let (la, lb) = (rng.gen_range(0..300), rng.gen_range(0..300));
        let a = random_text(&mut rng, la, &alphabet);
        let mut b = random_text(&mut rng, lb, &alphabet);
        if a.len() > 40 && t % 2 == 0 {
            let at = rng.gen_range(0..a.len() - 40);
            b.extend_from_slice(&a[at..at + 40]);
        }
        if encoplot_pairs(&a, &b).pairs.len() != encoplot_oracle(&a, &b, ENCOPLOT_GRAM) {
            bad += 1;
        }
    }
    let text: Vec<char> = random_text(&mut rng, 500, &['x', 'y', 'z', ' ']);
    let identical = encoplot_pairs(&text, &text).score().value();

    let alphabet: Vec<char> = ('a'..='z').collect();
    let base = 10_000;
    let mut times = Vec::new();
    for step in 0..6 {
        let n = base << step;
        let a = random_text(&mut rng, n, &alphabet);
        let b = random_text(&mut rng, n, &alphabet);
        // batches of about 2M characters, best of five
        let iters = (2_000_000 / n).max(1);
        let best = (0..5)
            .map(|_| {
                let s = Instant::now();
                for _ in 0..iters {
                    std::hint::black_box(encoplot_pairs(&a, &b));
                }
                s.elapsed().as_secs_f64() / iters as f64
            })
            .fold(f64::INFINITY, f64::min);
        times.push(best);
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        bad == 0 && identical == Some(1.0) && worst <= 2.3,
        format!(
            "{bad} pairing mismatches in 1000 pairs, identical score {identical:?}, doubling ratios [{}]",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn fingerprint_retention() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alphabet: Vec<char> = ('a'..='z').chain('0'..='9').collect();
    let n = 100_000;
    let mut kept = 0;
    for _ in 0..n {
        let words: Vec<String> = (0..3)
            .map(|_| {
                let len = rng.gen_range(2..10);
                random_text(&mut rng, len, &alphabet).into_iter().collect()
            })
            .collect();
        if is_retained(fnv1a64(words.join(" ").as_bytes())) {
            kept += 1;
        }
    }
    let rate = kept as f64 / n as f64;
    outcome(
        (rate - 1.0 / 16.0).abs() <= 0.005,
        format!("{kept} of {n} retained, rate {rate:.5}"),
    )
}

// 9 -------------------------------------------------------------------------

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn calibration_skew() -> Outcome {
    let start = Instant::now();
    let synth = generate(500, 9, &[], &SynthConfig::default()).expect("corpus");
    let corpus = Corpus::build(synth.documents, &ConsolidationConfig::default()).expect("valid");
    let pairs = sample_pair_indices(&corpus, 20_000, 9).expect("pairs");
    let gates = GateConfig::default();
    let docs = corpus.features();
    let mut medians = BTreeMap::new();
    let mut applicable = 0;
    for m in [Measure::Git, Measure::Lcis, Measure::Histo] {
        let values: Vec<f64> = pairs
            .iter()
            .filter_map(|&(a, b)| measure_score(m, &docs[a], &docs[b], &gates).value())
            .collect();
        applicable = values.len();
        medians.insert(m, median(values));
    }
    let (g, l, h) = (medians[&Measure::Git], medians[&Measure::Lcis], medians[&Measure::Histo]);
    outcome(
        applicable > 0 && g <= l && l <= h,
        format!(
            "{} pairs, {applicable} past the gate; medians GIT {g:.4} <= LCIS {l:.4} <= Histo {h:.4}; {}",
            pairs.len(),
            secs(start.elapsed())
        ),
    )
}

// 10 ------------------------------------------------------------------------

fn index_oracle() -> Outcome {
    let start = Instant::now();
    let synth = generate(1000, 10, &[], &SynthConfig::default()).expect("corpus");
    let corpus = Corpus::build(synth.documents, &ConsolidationConfig::default()).expect("valid");
    let index = CorpusIndex::from_corpus(&corpus).expect("index");
    let dir = tempfile::tempdir().expect("tempdir");
    index.persist(dir.path()).expect("persist");
    let loaded = CorpusIndex::load(dir.path()).expect("load");

    let docs = corpus.features();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut oracle_bad = 0;
    let mut persist_bad = 0;
    let k = 100;
    for _ in 0..100 {
        let q = &docs[rng.gen_range(0..docs.len())];
        for (field, query) in [
            (Field::Identifier, math_query(q)),
            (Field::Citation, citation_query(q)),
            (Field::Fingerprint, text_query(q)),
        ] {
            let got = index.query_top_k(&query, field, k);
            let want = exhaustive_top_k(docs, &query, field, k);
            let same = got.len() == want.len()
                && got
                    .iter()
                    .zip(&want)
                    .all(|(g, w)| g.0 == w.0 && (g.1 - w.1).abs() <= 1e-12 * w.1.abs().max(1.0));
            if !same {
                oracle_bad += 1;
            }
            if loaded.query_top_k(&query, field, k) != got {
                persist_bad += 1;
            }
        }
    }
    outcome(
        oracle_bad == 0 && persist_bad == 0,
        format!(
            "300 top-{k} lists on {} docs: {oracle_bad} differ from exhaustive scoring, {persist_bad} change after reload; {}",
            docs.len(),
            secs(start.elapsed())
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "kernel oracle equivalence", kernel_oracles()),
        (2, "histogram hand values", histo_hand_values()),
        (3, "gate boundaries", gate_boundaries()),
        (4, "threshold defaults", threshold_defaults()),
    ];

    let gen_start = Instant::now();
    let synth = generate(2000, 5, &vec![real_plant(); 10], &SynthConfig::default()).expect("planted corpus");
    let gen_time = gen_start.elapsed();
    results.push((5, "planted evaluation", planted_evaluation(&synth, gen_time)));
    results.push((6, "exploratory filter audit", explore_audit(synth)));

    results.push((7, "encoplot pairing and linear runtime", encoplot_property()));
    results.push((8, "fingerprint retention", fingerprint_retention()));
    results.push((9, "calibration skew", calibration_skew()));
    results.push((10, "index oracle and persistence", index_oracle()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
