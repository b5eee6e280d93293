//! Oracle construction: beam-searched extractive oracles, per-option
//! KEEP/DEL labels and corpus compressability statistics.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::rouge::{ApproxScorer, PreprocessConfig};
use crate::rules::{extract_options_with, CompressionOption, RuleConfig, RuleId};
use crate::treebank::{SentenceTree, Span};

/// Upper bound on the number of subsets [`exhaustive_oracle`] will score.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Sentences per oracle summary.
    pub k: usize,
    pub beam_width: usize,
    /// Only the first `max_sents` sentences are candidates.
    pub max_sents: usize,
    /// Oracles kept for training.
    pub m: usize,
    pub preprocess: PreprocessConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            k: 3,
            beam_width: 8,
            max_sents: 30,
            m: 5,
            preprocess: PreprocessConfig::oracle(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.max_sents {
            return Err(Error::Config(format!(
                "k must be in 1..={} (got {})",
                self.max_sents, self.k
            )));
        }
        if self.beam_width == 0 {
            return Err(Error::Config("beam width must be at least 1".into()));
        }
        if self.m == 0 || self.m > self.beam_width {
            return Err(Error::Config(format!(
                "m must be in 1..={} (got {})",
                self.beam_width, self.m
            )));
        }
        self.preprocess.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCandidate {
    /// Selected sentences, most salient first.
    pub indices: Vec<usize>,
    pub score: f64,
}

impl OracleCandidate {
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }
}

/// Scores sentence subsets of one document against its reference.
///
/// A subset is always scored on its sentences concatenated in document
/// order, so the score is a function of the set alone.
struct SubsetScorer {
    scorer: ApproxScorer,
    sentences: Vec<Vec<String>>,
    salience: Vec<f64>,
}

impl SubsetScorer {
    fn new<S: AsRef<str>>(
        doc: &Document,
        limit: usize,
        reference: &[S],
        cfg: &PreprocessConfig,
    ) -> Self {
        let scorer = ApproxScorer::new(reference, cfg);
        let sentences: Vec<Vec<String>> = doc.sentences[..limit]
            .iter()
            .map(|t| scorer.preprocess(&t.words()))
            .collect();
        let salience = sentences
            .iter()
            .map(|s| scorer.score_preprocessed(s))
            .collect();
        SubsetScorer {
            scorer,
            sentences,
            salience,
        }
    }

    fn score(&self, sorted: &[usize]) -> f64 {
        let toks: Vec<String> = sorted
            .iter()
            .flat_map(|&i| self.sentences[i].iter().cloned())
            .collect();
        self.scorer.score_preprocessed(&toks)
    }

    fn candidate(&self, set: &[usize], score: f64) -> OracleCandidate {
        let mut indices = set.to_vec();
        indices.sort_by(|&a, &b| {
            self.salience[b]
                .total_cmp(&self.salience[a])
                .then(a.cmp(&b))
        });
        OracleCandidate { indices, score }
    }
}

/// Higher score first; equal scores prefer the lexicographically smaller set.
fn rank(a: &(Vec<usize>, f64), b: &(Vec<usize>, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Beam search over sentence subsets of size `cfg.k`.
///
/// Every round extends each state by each unused sentence, merges states
/// that reach the same set, and keeps the `beam_width` best. The final beam
/// is returned best first.
pub fn beam_search_oracle<S: AsRef<str>>(
    doc: &Document,
    reference: &[S],
    cfg: &OracleConfig,
) -> Result<Vec<OracleCandidate>> {
    let n = doc.len().min(cfg.max_sents);
    if n < cfg.k || cfg.k == 0 {
        return Err(Error::InsufficientSentences {
            doc_id: doc.id.clone(),
            needed: cfg.k.max(1),
            found: n,
        });
    }
    let scorer = SubsetScorer::new(doc, n, reference, &cfg.preprocess);

    let mut beam: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 0.0)];
    for _ in 0..cfg.k {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (state, _) in &beam {
            for i in 0..n {
                if state.contains(&i) {
                    continue;
                }
                let mut set = state.clone();
                let pos = set.partition_point(|&x| x < i);
                set.insert(pos, i);
                if let Entry::Vacant(e) = next.entry(set) {
                    let s = scorer.score(e.key());
                    e.insert(s);
                }
            }
        }
        let mut states: Vec<(Vec<usize>, f64)> = next.into_iter().collect();
        states.sort_by(rank);
        states.truncate(cfg.beam_width);
        beam = states;
    }

    Ok(beam
        .into_iter()
        .map(|(set, score)| scorer.candidate(&set, score))
        .collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// True argmax of the oracle score over all `k`-subsets of the document.
/// Used as the reference for checking the beam search.
pub fn exhaustive_oracle<S: AsRef<str>>(
    doc: &Document,
    reference: &[S],
    k: usize,
    cfg: &PreprocessConfig,
) -> Result<OracleCandidate> {
    exhaustive_oracle_counted(doc, reference, k, cfg).map(|(c, _)| c)
}

/// Like [`exhaustive_oracle`], also returning the number of subsets scored.
pub fn exhaustive_oracle_counted<S: AsRef<str>>(
    doc: &Document,
    reference: &[S],
    k: usize,
    cfg: &PreprocessConfig,
) -> Result<(OracleCandidate, usize)> {
    let n = doc.len();
    if k == 0 || k > n {
        return Err(Error::InsufficientSentences {
            doc_id: doc.id.clone(),
            needed: k.max(1),
            found: n,
        });
    }
    let count = binomial(n, k);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::GuardExceeded {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let scorer = SubsetScorer::new(doc, n, reference, cfg);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluated = 0;
    for set in (0..n).combinations(k) {
        evaluated += 1;
        let s = scorer.score(&set);
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((set, s));
        }
    }
    let (set, score) = best.expect("at least one subset");
    Ok((scorer.candidate(&set, score), evaluated))
}

/// Top `m` beam entries by score, ties broken by the smaller index set.
pub fn select_training_oracles(beam: &[OracleCandidate], m: usize) -> Vec<OracleCandidate> {
    let mut ranked: Vec<(Vec<usize>, f64, &OracleCandidate)> = beam
        .iter()
        .map(|c| (c.sorted_indices(), c.score, c))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(m)
        .map(|(_, _, c)| c.clone())
        .collect()
}

// ---------------------------------------------------------------------------
// Compression labels

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Keep,
    Del,
}

impl Label {
    pub fn is_del(self) -> bool {
        self == Label::Del
    }
}

/// `r_after / r_before`, with the zero-denominator cases pinned: infinite
/// when only `r_after` is positive, 1 when both are zero.
pub fn score_ratio(r_before: f64, r_after: f64) -> f64 {
    if r_before == 0.0 {
        if r_after > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    } else {
        r_after / r_before
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompressabilityBucket {
    /// Ratio at most 1.00: deleting does not help.
    Bad,
    /// Ratio in (1.00, 1.05].
    WeakPositive,
    /// Ratio above 1.05.
    StrongPositive,
}

impl CompressabilityBucket {
    pub const ALL: [CompressabilityBucket; 3] = [
        CompressabilityBucket::Bad,
        CompressabilityBucket::WeakPositive,
        CompressabilityBucket::StrongPositive,
    ];

    pub fn from_ratio(ratio: f64) -> Self {
        if ratio <= 1.0 {
            CompressabilityBucket::Bad
        } else if ratio <= 1.05 {
            CompressabilityBucket::WeakPositive
        } else {
            CompressabilityBucket::StrongPositive
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CompressabilityBucket::Bad => "Bad",
            CompressabilityBucket::WeakPositive => "Weak Positive",
            CompressabilityBucket::StrongPositive => "Strong Positive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledOption {
    pub option: CompressionOption,
    pub r_before: f64,
    pub r_after: f64,
    pub label: Label,
}

impl LabeledOption {
    pub fn new(option: CompressionOption, r_before: f64, r_after: f64) -> Self {
        let label = if r_after > r_before {
            Label::Del
        } else {
            Label::Keep
        };
        LabeledOption {
            option,
            r_before,
            r_after,
            label,
        }
    }

    pub fn ratio(&self) -> f64 {
        score_ratio(self.r_before, self.r_after)
    }

    /// KEEP labels are always `Bad`, even if rounding pushed the ratio to 1.
    pub fn bucket(&self) -> CompressabilityBucket {
        match self.label {
            Label::Keep => CompressabilityBucket::Bad,
            Label::Del => match CompressabilityBucket::from_ratio(self.ratio()) {
                CompressabilityBucket::Bad => CompressabilityBucket::WeakPositive,
                b => b,
            },
        }
    }
}

/// Labels each option independently: DEL iff deleting it alone raises the
/// sentence's oracle score against the reference.
pub fn label_compressions<S: AsRef<str>>(
    sentence: &SentenceTree,
    options: &[CompressionOption],
    reference: &[S],
    cfg: &PreprocessConfig,
) -> Vec<LabeledOption> {
    let scorer = ApproxScorer::new(reference, cfg);
    let words = sentence.words();
    let r_before = scorer.score(&words);
    options
        .iter()
        .map(|opt| {
            let kept: Vec<&str> = words
                .iter()
                .enumerate()
                .filter(|(i, _)| !opt.span.contains_index(*i))
                .map(|(_, w)| *w)
                .collect();
            LabeledOption::new(opt.clone(), r_before, scorer.score(&kept))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressabilityReport {
    pub total: usize,
    pub counts: [usize; 3],
    pub percentages: [f64; 3],
}

impl CompressabilityReport {
    pub fn percentage(&self, bucket: CompressabilityBucket) -> f64 {
        self.percentages[bucket as usize]
    }

    /// Three-row table, one column per dataset name.
    pub fn to_table(&self, dataset: &str) -> String {
        let mut out = format!("Category,{dataset}\n");
        for b in CompressabilityBucket::ALL {
            out.push_str(&format!("{},{:.0}%\n", b.name(), self.percentage(b)));
        }
        out
    }
}

impl fmt::Display for CompressabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table("corpus"))
    }
}

pub fn compressability_report<'a, I>(labels: I) -> Result<CompressabilityReport>
where
    I: IntoIterator<Item = &'a LabeledOption>,
{
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.bucket() as usize] += 1;
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let percentages = counts.map(|c| 100.0 * c as f64 / total as f64);
    Ok(CompressabilityReport {
        total,
        counts,
        percentages,
    })
}

// ---------------------------------------------------------------------------
// Cache file

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub start: usize,
    pub end: usize,
    pub rule: RuleId,
    pub r_before: f64,
    pub r_after: f64,
    pub label: Label,
}

impl From<&LabeledOption> for LabelRecord {
    fn from(l: &LabeledOption) -> Self {
        LabelRecord {
            start: l.option.span.start,
            end: l.option.span.end,
            rule: l.option.rule,
            r_before: l.r_before,
            r_after: l.r_after,
            label: l.label,
        }
    }
}

/// One line of the oracle cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub doc_id: String,
    /// The final beam, best first.
    pub oracles: Vec<OracleCandidate>,
    /// Labels for every option of every sentence.
    pub labels: Vec<Vec<LabelRecord>>,
}

impl OracleRecord {
    /// Re-attaches cached labels to freshly extracted options. The options
    /// must line up span for span with what the cache recorded.
    pub fn labeled_options(
        &self,
        doc: &Document,
        rules: &RuleConfig,
    ) -> Result<Vec<Vec<LabeledOption>>> {
        let mismatch = |why: String| {
            Error::Config(format!(
                "oracle cache for {} does not match corpus: {why}",
                doc.id
            ))
        };
        if self.doc_id != doc.id {
            return Err(mismatch(format!("cache names {}", self.doc_id)));
        }
        if self.labels.len() != doc.len() {
            return Err(mismatch(format!(
                "{} label rows for {} sentences",
                self.labels.len(),
                doc.len()
            )));
        }
        doc.sentences
            .iter()
            .zip(&self.labels)
            .enumerate()
            .map(|(i, (tree, rows))| {
                let options = extract_options_with(tree, rules);
                if options.len() != rows.len() {
                    return Err(mismatch(format!("sentence {i} option count")));
                }
                options
                    .into_iter()
                    .zip(rows)
                    .map(|(opt, row)| {
                        if opt.span != Span::new(row.start, row.end) || opt.rule != row.rule {
                            return Err(mismatch(format!("sentence {i} option {}", opt.span)));
                        }
                        Ok(LabeledOption {
                            option: opt,
                            r_before: row.r_before,
                            r_after: row.r_after,
                            label: row.label,
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn build_oracle_record(
    doc: &Document,
    cfg: &OracleConfig,
    rules: &RuleConfig,
) -> Result<OracleRecord> {
    let reference = doc.reference_tokens();
    let oracles = beam_search_oracle(doc, &reference, cfg)?;
    let labels = doc
        .sentences
        .iter()
        .map(|tree| {
            let options = extract_options_with(tree, rules);
            label_compressions(tree, &options, &reference, &cfg.preprocess)
                .iter()
                .map(LabelRecord::from)
                .collect()
        })
        .collect();
    Ok(OracleRecord {
        doc_id: doc.id.clone(),
        oracles,
        labels,
    })
}

/// Builds oracle records for a corpus in parallel; results keep input order.
pub fn build_oracles(
    docs: &[Document],
    cfg: &OracleConfig,
    rules: &RuleConfig,
) -> Vec<Result<OracleRecord>> {
    docs.par_iter()
        .map(|d| build_oracle_record(d, cfg, rules))
        .collect()
}

pub fn write_oracle_cache(path: impl AsRef<Path>, records: &[OracleRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_oracle_cache(path: impl AsRef<Path>) -> Result<Vec<OracleRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::CorpusLine {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
