mod common;

use common::{fixture_labels, random_document};
use compsum::oracle::{
    beam_search_oracle, exhaustive_oracle, label_compressions, Label, OracleConfig,
};
use compsum::rouge::{approx_oracle_score, PreprocessConfig};
use compsum::rules::extract_options;
use compsum::Document;
use proptest::prelude::*;

/// Score of a sentence set computed straight from the words, in document
/// order.
fn rescore(doc: &Document, set: &[usize], cfg: &PreprocessConfig) -> f64 {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let words: Vec<&str> = sorted
        .iter()
        .flat_map(|&i| doc.sentences[i].words())
        .collect();
    approx_oracle_score(&words, &doc.reference_tokens(), cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_is_sorted_and_bounded_by_exhaustive(seed in any::<u64>(), n in 3usize..=9, k in 1usize..=3) {
        let doc = random_document(seed, n);
        let cfg = OracleConfig { k, ..OracleConfig::default() };
        let beam = beam_search_oracle(&doc, &doc.reference_tokens(), &cfg).unwrap();
        prop_assert!(beam.windows(2).all(|w| w[0].score >= w[1].score));
        let best = exhaustive_oracle(&doc, &doc.reference_tokens(), k, &cfg.preprocess).unwrap();
        prop_assert!(beam[0].score <= best.score + 1e-12);
        for c in &beam {
            prop_assert!((c.score - rescore(&doc, &c.indices, &cfg.preprocess)).abs() < 1e-12);
        }
        prop_assert!((best.score - rescore(&doc, &best.indices, &cfg.preprocess)).abs() < 1e-12);
    }

    #[test]
    fn beam_is_exact_on_small_documents(seed in any::<u64>(), n in 3usize..=6, k in 1usize..=3) {
        let doc = random_document(seed, n);
        let cfg = OracleConfig { k, ..OracleConfig::default() };
        let beam = beam_search_oracle(&doc, &doc.reference_tokens(), &cfg).unwrap();
        let best = exhaustive_oracle(&doc, &doc.reference_tokens(), k, &cfg.preprocess).unwrap();
        prop_assert_eq!(beam[0].score, best.score);
    }

    #[test]
    fn beam_sets_are_distinct(seed in any::<u64>(), n in 4usize..=9) {
        let doc = random_document(seed, n);
        let beam = beam_search_oracle(&doc, &doc.reference_tokens(), &OracleConfig::default()).unwrap();
        let mut sets: Vec<Vec<usize>> = beam.iter().map(|c| c.sorted_indices()).collect();
        sets.sort();
        sets.dedup();
        prop_assert_eq!(sets.len(), beam.len());
    }
}

#[test]
fn labels_match_rescoring_on_fixture_corpus() {
    let cfg = OracleConfig::default();
    let mut checked = 0;
    for (doc, _, labels) in fixture_labels(&cfg) {
        let reference = doc.reference_tokens();
        for (s, sent_labels) in labels.iter().enumerate() {
            let words = doc.sentences[s].words();
            let before = approx_oracle_score(&words, &reference, &cfg.preprocess);
            for l in sent_labels {
                let kept: Vec<&str> = words
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !l.option.span.contains_index(*i))
                    .map(|(_, w)| *w)
                    .collect();
                let after = approx_oracle_score(&kept, &reference, &cfg.preprocess);
                assert_eq!(
                    l.label == Label::Del,
                    after > before,
                    "{} sentence {s}",
                    doc.id
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 30);
}

#[test]
fn labels_do_not_depend_on_extraction_context() {
    let cfg = OracleConfig::default();
    for (doc, _, labels) in fixture_labels(&cfg) {
        for (s, tree) in doc.sentences.iter().enumerate() {
            let alone = label_compressions(
                tree,
                &extract_options(tree),
                &doc.reference_tokens(),
                &cfg.preprocess,
            );
            assert_eq!(alone, labels[s]);
        }
    }
}
