use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crate::corpus::Document;
use crate::rouge::{is_punctuation, DEFAULT_STOPWORDS};
use crate::rules::{CompressionOption, RuleId};

pub const SENTENCE_DIM: usize = 6;
pub const DOCUMENT_DIM: usize = 2 * SENTENCE_DIM + 1;
pub const STATE_DIM: usize = SENTENCE_DIM + 2;
pub const OPTION_DIM: usize = RuleId::ALL.len() + 5 + SENTENCE_DIM;
/// Extraction input: decoder state followed by document features.
pub const DECODER_INPUT_DIM: usize = STATE_DIM + DOCUMENT_DIM;

/// Position, log length, type overlap with the document, stopword
/// fraction, capitalized-token fraction, lead-3 indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceFeatures(pub [f64; SENTENCE_DIM]);

/// Mean and max of the sentence features, then log sentence count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentFeatures(pub [f64; DOCUMENT_DIM]);

/// Step `t / k`, mean features of the selected sentences, then the
/// fraction of document types the selection covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderState(pub [f64; STATE_DIM]);

/// Rule one-hot, log length, relative start, elsewhere-in-document
/// fraction, in-summary fraction, stopword fraction, parent sentence
/// features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionFeatures(pub [f64; OPTION_DIM]);

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| DEFAULT_STOPWORDS.iter().copied().collect())
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-document token statistics shared by all feature functions.
pub struct DocContext {
    /// Lowercased non-punctuation tokens per sentence, with their positions.
    content: Vec<Vec<(usize, String)>>,
    lengths: Vec<usize>,
    sentence_types: Vec<HashSet<String>>,
    counts: HashMap<String, usize>,
    n_types: usize,
    sentences: Vec<SentenceFeatures>,
    document: DocumentFeatures,
}

impl DocContext {
    pub fn new(doc: &Document) -> Self {
        let content: Vec<Vec<(usize, String)>> = doc
            .sentences
            .iter()
            .map(|t| {
                t.words()
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| !is_punctuation(w))
                    .map(|(i, w)| (i, w.to_lowercase()))
                    .collect()
            })
            .collect();
        let sentence_types: Vec<HashSet<String>> = content
            .iter()
            .map(|s| s.iter().map(|(_, w)| w.clone()).collect())
            .collect();
        let mut counts: HashMap<String, usize> = HashMap::new();
        for (_, w) in content.iter().flatten() {
            *counts.entry(w.clone()).or_default() += 1;
        }
        let n_types = counts.len();
        let n = doc.len();

        let sentences: Vec<SentenceFeatures> = (0..n)
            .map(|i| {
                let words = doc.sentences[i].words();
                let toks = &content[i];
                let stop = toks
                    .iter()
                    .filter(|(_, w)| stopwords().contains(w.as_str()))
                    .count();
                let caps = toks
                    .iter()
                    .filter(|(pos, _)| *pos > 0)
                    .filter(|(pos, _)| words[*pos].chars().next().is_some_and(char::is_uppercase))
                    .count();
                SentenceFeatures([
                    fraction(i, n),
                    (1.0 + words.len() as f64).ln(),
                    fraction(sentence_types[i].len(), n_types),
                    fraction(stop, toks.len()),
                    fraction(caps, toks.len()),
                    if i < 3 { 1.0 } else { 0.0 },
                ])
            })
            .collect();

        let mut doc_feats = [0.0; DOCUMENT_DIM];
        for s in &sentences {
            for j in 0..SENTENCE_DIM {
                doc_feats[j] += s.0[j] / n.max(1) as f64;
                doc_feats[SENTENCE_DIM + j] = doc_feats[SENTENCE_DIM + j].max(s.0[j]);
            }
        }
        doc_feats[DOCUMENT_DIM - 1] = (1.0 + n as f64).ln();

        DocContext {
            content,
            lengths: doc.sentences.iter().map(|t| t.len()).collect(),
            sentence_types,
            counts,
            n_types,
            sentences,
            document: DocumentFeatures(doc_feats),
        }
    }

    pub fn sentence(&self, i: usize) -> SentenceFeatures {
        self.sentences[i]
    }

    pub fn sentences(&self) -> &[SentenceFeatures] {
        &self.sentences
    }

    pub fn document(&self) -> DocumentFeatures {
        self.document
    }

    fn summary_types(&self, selected: &[usize]) -> HashSet<&str> {
        selected
            .iter()
            .flat_map(|&i| self.sentence_types[i].iter().map(String::as_str))
            .collect()
    }

    /// State after `selected` (in pick order) out of `k` planned picks.
    pub fn state(&self, selected: &[usize], k: usize) -> DecoderState {
        let mut v = [0.0; STATE_DIM];
        v[0] = fraction(selected.len(), k);
        for &i in selected {
            for j in 0..SENTENCE_DIM {
                v[1 + j] += self.sentences[i].0[j] / selected.len() as f64;
            }
        }
        v[STATE_DIM - 1] = fraction(self.summary_types(selected).len(), self.n_types);
        DecoderState(v)
    }

    /// Features of `option` in sentence `sent`, given the sentences already
    /// selected before it.
    pub fn option(
        &self,
        sent: usize,
        option: &CompressionOption,
        selected: &[usize],
    ) -> OptionFeatures {
        let toks: Vec<&str> = self.content[sent]
            .iter()
            .filter(|(pos, _)| option.span.contains_index(*pos))
            .map(|(_, w)| w.as_str())
            .collect();
        let mut in_span: HashMap<&str, usize> = HashMap::new();
        for w in &toks {
            *in_span.entry(w).or_default() += 1;
        }
        let elsewhere = toks
            .iter()
            .filter(|w| self.counts[**w] > in_span[**w])
            .count();
        let summary = self.summary_types(selected);
        let in_summary = toks.iter().filter(|w| summary.contains(**w)).count();
        let stop = toks.iter().filter(|w| stopwords().contains(**w)).count();
        let sent_len = self.lengths[sent];

        let mut v = [0.0; OPTION_DIM];
        v[option.rule.index()] = 1.0;
        let base = RuleId::ALL.len();
        v[base] = (1.0 + option.span.len() as f64).ln();
        v[base + 1] = fraction(option.span.start, sent_len);
        v[base + 2] = fraction(elsewhere, toks.len());
        v[base + 3] = fraction(in_summary, toks.len());
        v[base + 4] = fraction(stop, toks.len());
        v[base + 5..].copy_from_slice(&self.sentences[sent].0);
        OptionFeatures(v)
    }
}

pub fn featurize_sentence(doc: &Document, i: usize) -> SentenceFeatures {
    DocContext::new(doc).sentence(i)
}

pub fn featurize_document(doc: &Document) -> DocumentFeatures {
    DocContext::new(doc).document()
}

pub fn featurize_option(
    doc: &Document,
    sent_index: usize,
    option: &CompressionOption,
    selected: &[usize],
) -> OptionFeatures {
    DocContext::new(doc).option(sent_index, option, selected)
}
