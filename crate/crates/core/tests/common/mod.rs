//! Helpers shared by the integration test targets: brute-force reference
//! implementations, random trees and documents, fixture loading.
#![allow(dead_code)]

use std::path::PathBuf;

use compsum::corpus::{read_corpus, Document};
use compsum::oracle::{build_oracle_record, LabeledOption, OracleConfig, OracleRecord};
use compsum::rules::RuleConfig;
use compsum::treebank::parse_ptb;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_corpus() -> Vec<Document> {
    let (docs, errors) = read_corpus(fixture("corpus.jsonl")).unwrap();
    assert!(errors.is_empty(), "{errors:?}");
    docs
}

/// Oracle records and labels for the fixture corpus, built fresh.
pub fn fixture_labels(
    cfg: &OracleConfig,
) -> Vec<(Document, OracleRecord, Vec<Vec<LabeledOption>>)> {
    let rules = RuleConfig::default();
    fixture_corpus()
        .into_iter()
        .map(|d| {
            let rec = build_oracle_record(&d, cfg, &rules).unwrap();
            let labels = rec.labeled_options(&d, &rules).unwrap();
            (d, rec, labels)
        })
        .collect()
}

// Brute-force ROUGE, written from the definitions without sharing code
// with the library.

fn windows(seq: &[String], n: usize) -> Vec<Vec<String>> {
    if seq.len() < n {
        return Vec::new();
    }
    (0..=seq.len() - n)
        .map(|i| seq[i..i + n].to_vec())
        .collect()
}

fn occurrences(grams: &[Vec<String>], g: &[String]) -> usize {
    grams.iter().filter(|x| x.as_slice() == g).count()
}

fn prf(matches: usize, cand_total: usize, ref_total: usize) -> (f64, f64, f64) {
    if cand_total == 0 || ref_total == 0 {
        return (0.0, 0.0, 0.0);
    }
    let p = matches as f64 / cand_total as f64;
    let r = matches as f64 / ref_total as f64;
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

pub fn brute_rouge_n(cand: &[String], refs: &[Vec<String>], n: usize) -> (f64, f64, f64) {
    let cg = windows(cand, n);
    let rgs: Vec<Vec<Vec<String>>> = refs.iter().map(|r| windows(r, n)).collect();
    let mut distinct: Vec<Vec<String>> = Vec::new();
    for g in &cg {
        if !distinct.contains(g) {
            distinct.push(g.clone());
        }
    }
    let matches: usize = distinct
        .iter()
        .map(|g| {
            let best = rgs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
            occurrences(&cg, g).min(best)
        })
        .sum();
    prf(matches, cg.len(), rgs.iter().map(Vec::len).sum())
}

fn is_subsequence(sub: &[&String], seq: &[String]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|x| it.any(|y| y == *x))
}

/// Longest common subsequence by enumerating every subsequence of `a`.
pub fn brute_lcs(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "enumeration is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &a[i])
            .collect();
        if is_subsequence(&sub, b) {
            best = len;
        }
    }
    best
}

pub fn brute_rouge_l(cand: &[String], reference: &[String]) -> (f64, f64, f64) {
    prf(brute_lcs(cand, reference), cand.len(), reference.len())
}

// Random trees and documents.

const WORDS: [&str; 12] = [
    "river", "stone", "market", "signal", "harbor", "lantern", "orchard", "engine", "valley",
    "copper", "meadow", "falcon",
];
const PHRASES: [&str; 8] = ["S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP", "PRN"];
const TAGS: [&str; 13] = [
    "DT", "NN", "NNS", "NNP", "JJ", "JJR", "RB", "VBD", "VBG", "IN", "WDT", "CC", "PRP",
];

fn leaf(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0 => "(, ,)".to_string(),
        1 => "(-LRB- -LRB-)".to_string(),
        2 => "(-RRB- -RRB-)".to_string(),
        _ => {
            let tag = TAGS.choose(rng).unwrap();
            let word = WORDS.choose(rng).unwrap();
            format!("({tag} {word})")
        }
    }
}

fn phrase(rng: &mut ChaCha8Rng, label: &str, depth: usize) -> String {
    let n = rng.gen_range(1..=4);
    let kids: Vec<String> = (0..n)
        .map(|_| {
            if depth == 0 || rng.gen_bool(0.45) {
                leaf(rng)
            } else {
                let l = PHRASES.choose(rng).unwrap();
                phrase(rng, l, depth - 1)
            }
        })
        .collect();
    format!("({label} {})", kids.join(" "))
}

/// A random bracketed tree in treebank notation.
pub fn random_parse(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    phrase(&mut rng, "S", 4)
}

/// A flat sentence over a small shared vocabulary, so that overlaps with a
/// reference are frequent.
fn random_sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=7);
    let words: Vec<String> = (0..n)
        .map(|_| format!("(NN {})", WORDS[rng.gen_range(0..8)]))
        .collect();
    format!("(S (NP {}) (VP (VBD moved)) (. .))", words.join(" "))
}

pub fn random_document(seed: u64, n: usize) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n)
        .map(|_| parse_ptb(&random_sentence(&mut rng)).unwrap())
        .collect();
    let ref_len = rng.gen_range(3..=12);
    let reference = vec![(0..ref_len)
        .map(|_| WORDS[rng.gen_range(0..8)].to_string())
        .collect()];
    Document {
        id: format!("rand-{seed}"),
        sentences,
        reference,
    }
}
