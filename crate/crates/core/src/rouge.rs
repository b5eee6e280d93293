//! Token-level ROUGE-N and ROUGE-L.
//!
//! All functions work on pre-tokenized input; no detokenization or sentence
//! splitting happens here. Multi-sentence summaries are scored on their
//! flattened token sequence.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }

    fn from_counts(matches: usize, candidate_total: usize, reference_total: usize) -> Self {
        if candidate_total == 0 || reference_total == 0 {
            return RougeScore::ZERO;
        }
        RougeScore::from_pr(
            matches as f64 / candidate_total as f64,
            matches as f64 / reference_total as f64,
        )
    }
}

/// English stopwords used when no list is configured.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "'s",
    "'re",
    "'ve",
    "'d",
    "'ll",
    "'m",
    "n't",
    "said",
    "says",
    "also",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
    pub stopwords: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            remove_stopwords: false,
            stem: false,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PreprocessConfig {
    /// Lowercasing, stopword removal and stemming all enabled.
    pub fn oracle() -> Self {
        PreprocessConfig {
            remove_stopwords: true,
            stem: true,
            ..Default::default()
        }
    }

    /// No transformation at all.
    pub fn identity() -> Self {
        PreprocessConfig {
            lowercase: false,
            remove_stopwords: false,
            stem: false,
            ..Default::default()
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.remove_stopwords && self.stopwords.is_empty() {
            return Err(Error::Config(
                "stopword removal is on but the stopword list is empty".into(),
            ));
        }
        Ok(())
    }
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// True for tokens without a single alphanumeric character.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Lowercases, drops stopwords (and punctuation) and stems, in that order.
pub fn preprocess_tokens<S: AsRef<str>>(tokens: &[S], cfg: &PreprocessConfig) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter_map(|tok| {
            let tok = if cfg.lowercase {
                tok.to_lowercase()
            } else {
                tok.to_string()
            };
            if cfg.remove_stopwords && (is_punctuation(&tok) || cfg.stopwords.contains(&tok)) {
                return None;
            }
            if cfg.stem {
                Some(stemmer().stem(&tok).into_owned())
            } else {
                Some(tok)
            }
        })
        .collect()
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            let key: Vec<&str> = w.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap against one or more references.
///
/// Each candidate n-gram matches at most as often as it appears in the
/// reference where it is most frequent. Recall is taken against the total
/// number of reference n-grams across all references.
pub fn rouge_n<S: AsRef<str>, R: AsRef<[S]>>(
    candidate: &[S],
    references: &[R],
    n: usize,
) -> RougeScore {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let cand_total: usize = cand.values().sum();

    let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
    let mut ref_total = 0;
    for r in references {
        for (gram, c) in ngram_counts(r.as_ref(), n) {
            ref_total += c;
            let e = max_ref.entry(gram).or_insert(0);
            *e = (*e).max(c);
        }
    }

    let matches: usize = cand
        .iter()
        .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_counts(matches, cand_total, ref_total)
}

pub fn lcs_len<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> RougeScore {
    let l = lcs_len(candidate, reference);
    RougeScore::from_counts(l, candidate.len(), reference.len())
}

/// Reference side of the fast oracle score, preprocessed once and reused
/// for many candidates.
#[derive(Debug, Clone)]
pub struct ApproxScorer {
    cfg: PreprocessConfig,
    unigrams: HashMap<String, usize>,
    bigrams: HashMap<String, HashMap<String, usize>>,
    uni_total: usize,
    bi_total: usize,
}

impl ApproxScorer {
    pub fn new<S: AsRef<str>>(reference: &[S], cfg: &PreprocessConfig) -> Self {
        let cfg = PreprocessConfig {
            remove_stopwords: true,
            stem: true,
            ..cfg.clone()
        };
        let toks = preprocess_tokens(reference, &cfg);
        let mut unigrams = HashMap::new();
        for t in &toks {
            *unigrams.entry(t.clone()).or_insert(0) += 1;
        }
        let mut bigrams: HashMap<String, HashMap<String, usize>> = HashMap::new();
        for w in toks.windows(2) {
            *bigrams
                .entry(w[0].clone())
                .or_default()
                .entry(w[1].clone())
                .or_insert(0) += 1;
        }
        ApproxScorer {
            cfg,
            uni_total: toks.len(),
            bi_total: toks.len().saturating_sub(1),
            unigrams,
            bigrams,
        }
    }

    /// Preprocessing is token-wise, so callers may preprocess pieces of a
    /// candidate separately and score their concatenation.
    pub fn preprocess<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        preprocess_tokens(tokens, &self.cfg)
    }

    pub fn score<S: AsRef<str>>(&self, candidate: &[S]) -> f64 {
        self.score_preprocessed(&self.preprocess(candidate))
    }

    pub fn score_preprocessed(&self, toks: &[String]) -> f64 {
        let mut uni: HashMap<&str, usize> = HashMap::new();
        for t in toks {
            *uni.entry(t.as_str()).or_insert(0) += 1;
        }
        let uni_match: usize = uni
            .iter()
            .map(|(g, &c)| c.min(self.unigrams.get(*g).copied().unwrap_or(0)))
            .sum();

        let mut bi: HashMap<(&str, &str), usize> = HashMap::new();
        for w in toks.windows(2) {
            *bi.entry((w[0].as_str(), w[1].as_str())).or_insert(0) += 1;
        }
        let bi_match: usize = bi
            .iter()
            .map(|(&(a, b), &c)| {
                let r = self.bigrams.get(a).and_then(|m| m.get(b)).copied();
                c.min(r.unwrap_or(0))
            })
            .sum();

        let r1 = RougeScore::from_counts(uni_match, toks.len(), self.uni_total);
        let r2 = RougeScore::from_counts(bi_match, toks.len().saturating_sub(1), self.bi_total);
        (r1.f1 + r2.f1) / 2.0
    }
}

/// Mean of ROUGE-1 and ROUGE-2 F1 after stopword removal and stemming.
pub fn approx_oracle_score<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    reference: &[T],
    cfg: &PreprocessConfig,
) -> f64 {
    ApproxScorer::new(reference, cfg).score(candidate)
}
