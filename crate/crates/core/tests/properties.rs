mod common;

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use common::{encoplot_oracle, exhaustive_top_k, gst_naive, lcs_dp};
use stemsim::corpus::Corpus;
use stemsim::doc_model::Identifier;
use stemsim::features::{
    build_histogram, fingerprint_text, fnv1a64, gram_hashes, is_retained, tokenize, GlobalReferenceId,
};
use stemsim::index::{CorpusIndex, Field};
use stemsim::measures::{bc, encoplot_pairs, greedy_tiles, histo, lcis, lcs_length, tile_coverage};
use stemsim::retrieval::{citation_query, math_query, text_query};
use stemsim::synth::{generate, SynthConfig};

fn seq(alphabet: u8, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..alphabet, 0..max_len)
}

fn symbols(max_len: usize) -> impl Strategy<Value = Vec<Identifier>> {
    prop::collection::vec(prop::sample::select(vec!["x", "y", "z", "n", "k", "alpha"]), 0..max_len)
        .prop_map(|v| v.into_iter().map(|s| Identifier(s.to_string())).collect())
}

fn refs() -> impl Strategy<Value = BTreeSet<GlobalReferenceId>> {
    prop::collection::btree_set((0u32..30).prop_map(GlobalReferenceId), 0..15)
}

proptest! {
    #[test]
    fn lcs_matches_dynamic_programming(a in seq(4, 150), b in seq(4, 150)) {
        prop_assert_eq!(lcs_length(&a, &b), lcs_dp(&a, &b));
    }

    #[test]
    fn lcs_is_symmetric_and_bounded(a in seq(3, 90), b in seq(3, 90)) {
        let l = lcs_length(&a, &b);
        prop_assert_eq!(l, lcs_length(&b, &a));
        prop_assert!(l <= a.len().min(b.len()));
    }

    #[test]
    fn tiling_matches_naive(a in seq(3, 60), b in seq(3, 60), min_len in 2usize..6) {
        prop_assert_eq!(greedy_tiles(&a, &b, min_len), gst_naive(&a, &b, min_len));
    }

    #[test]
    fn tiles_are_disjoint_exact_matches(a in seq(2, 80), b in seq(2, 80), min_len in 1usize..5) {
        let tiles = greedy_tiles(&a, &b, min_len);
        let mut used_a = HashSet::new();
        let mut used_b = HashSet::new();
        for t in &tiles {
            prop_assert!(t.length >= min_len);
            prop_assert_eq!(&a[t.pos_a..t.pos_a + t.length], &b[t.pos_b..t.pos_b + t.length]);
            for i in 0..t.length {
                prop_assert!(used_a.insert(t.pos_a + i));
                prop_assert!(used_b.insert(t.pos_b + i));
            }
        }
        prop_assert_eq!(tile_coverage(&tiles), used_a.len());
    }

    #[test]
    fn self_similarity_is_one(a in symbols(40)) {
        prop_assume!(!a.is_empty());
        let h = build_histogram(&a);
        prop_assert_eq!(histo(&h, &h).value(), Some(1.0));
        prop_assert_eq!(lcis(&a, &a).value(), Some(1.0));
    }

    #[test]
    fn histo_is_symmetric_and_bounded(a in symbols(40), b in symbols(40)) {
        let (ha, hb) = (build_histogram(&a), build_histogram(&b));
        let ab = histo(&ha, &hb);
        prop_assert_eq!(&ab, &histo(&hb, &ha));
        if let Some(v) = ab.value() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn bc_is_jaccard(a in refs(), b in refs(), min in 0usize..4) {
        let s = bc(&a, &b, min);
        prop_assert_eq!(&s, &bc(&b, &a, min));
        if a.len() < min || b.len() < min || a.union(&b).count() == 0 {
            prop_assert!(!s.is_applicable());
        } else {
            let expect = a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
            prop_assert_eq!(s.value(), Some(expect));
        }
    }

    #[test]
    fn encoplot_count_matches_oracle(
        a in prop::collection::vec(prop::sample::select(vec!['a', 'b']), 0..160),
        b in prop::collection::vec(prop::sample::select(vec!['a', 'b']), 0..160),
    ) {
        let m = encoplot_pairs(&a, &b);
        prop_assert_eq!(m.pairs.len(), encoplot_oracle(&a, &b, 16));
        for &(i, j) in &m.pairs {
            prop_assert_eq!(&a[i..i + 16], &b[j..j + 16]);
        }
    }

    #[test]
    fn fingerprints_are_the_retained_grams(words in prop::collection::vec("[a-e]{1,3}", 0..60)) {
        let text = words.join(" ");
        let grams = gram_hashes(&text);
        prop_assert_eq!(grams.len(), tokenize(&text).len().saturating_sub(2));
        let fp = fingerprint_text(&text);
        let expect: BTreeSet<u64> = grams.into_iter().filter(|h| h & 0xF == 0).collect();
        prop_assert!(fp.hashes.iter().all(|&h| is_retained(h)));
        prop_assert_eq!(fp.hashes, expect);
    }
}

#[test]
fn fnv_reference_table() {
    let table = include_str!("fixtures/fnv1a64.tsv");
    let mut checked = 0;
    for line in table.lines().filter(|l| !l.starts_with('#')) {
        let (input, hex) = line.split_once('\t').unwrap();
        assert_eq!(fnv1a64(input.as_bytes()), u64::from_str_radix(hex, 16).unwrap(), "{input:?}");
        checked += 1;
    }
    assert_eq!(checked, 10);
}

fn small_synth() -> SynthConfig {
    SynthConfig {
        topics: 3,
        identifiers_per_doc: 200,
        symbols_per_doc: 25,
        references_per_doc: 8,
        citations_per_doc: 12,
        words_per_doc: 300,
        works_per_topic: 40,
        vocabulary_size: 500,
        ..SynthConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn index_agrees_with_exhaustive_scoring(seed in any::<u64>(), k in 1usize..12) {
        let synth = generate(40, seed, &[], &small_synth()).unwrap();
        let corpus = Corpus::build(synth.documents, &Default::default()).unwrap();
        let index = CorpusIndex::from_corpus(&corpus).unwrap();
        let docs = corpus.features();
        for q in docs.iter().step_by(7) {
            for (field, terms) in [
                (Field::Identifier, math_query(q)),
                (Field::Citation, citation_query(q)),
                (Field::Fingerprint, text_query(q)),
            ] {
                let got = index.query_top_k(&terms, field, k);
                let want = exhaustive_top_k(docs, &terms, field, k);
                prop_assert_eq!(got.len(), want.len());
                for ((gd, gs), (wd, ws)) in got.iter().zip(&want) {
                    prop_assert!((gs - ws).abs() <= 1e-9 * ws.abs().max(1.0), "{} {} vs {} {}", gd, gs, wd, ws);
                    if gd != wd {
                        prop_assert!((gs - ws).abs() <= 1e-9, "order differs at {} / {}", gd, wd);
                    }
                }
            }
        }
    }
}
