use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{classify_option, decode_greedy_with, DocContext, Model};
use crate::oracle::Label;
use crate::rouge::is_punctuation;
use crate::rules::{extract_options_with, CompressionOption, RuleConfig, RuleId};
use crate::treebank::{SentenceTree, Span};

/// DEL iff `p_del > 1 - tau`.
pub fn apply_threshold(p_del: f64, tau: f64) -> Label {
    if p_del > 1.0 - tau {
        Label::Del
    } else {
        Label::Keep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizeConfig {
    /// Sentences to extract; clamped to the scoreable sentence count.
    pub k: usize,
    /// Deletion aggressiveness in `[0, 1]`.
    pub tau: f64,
    pub dedup: bool,
    pub rules: RuleConfig,
}

impl Default for SummarizeConfig {
    fn default() -> Self {
        SummarizeConfig {
            k: 3,
            tau: 0.45,
            dedup: true,
            rules: RuleConfig::default(),
        }
    }
}

impl SummarizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!(
                "tau must lie in [0, 1] (got {})",
                self.tau
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Cause {
    Model,
    Dedup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deletion {
    pub start: usize,
    pub end: usize,
    pub rule: RuleId,
    pub node: String,
    pub cause: Cause,
}

impl Deletion {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    fn new(option: &CompressionOption, cause: Cause) -> Self {
        Deletion {
            start: option.span.start,
            end: option.span.end,
            rule: option.rule,
            node: option.node_label.clone(),
            cause,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub doc_id: String,
    /// Selected sentence indices in document order.
    pub selected: Vec<usize>,
    /// Applied deletions per selected sentence, sorted by span.
    pub deletions: Vec<Vec<Deletion>>,
    /// Surviving tokens per selected sentence.
    pub text: Vec<Vec<String>>,
}

impl Summary {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.text.iter().flatten().map(String::as_str)
    }

    pub fn deletion_count(&self, cause: Cause) -> usize {
        self.deletions
            .iter()
            .flatten()
            .filter(|d| d.cause == cause)
            .count()
    }
}

fn surviving(tree: &SentenceTree, deletions: &[Deletion]) -> Vec<String> {
    (0..tree.len())
        .filter(|i| !deletions.iter().any(|d| d.span().contains_index(*i)))
        .map(|i| tree.word(i).to_string())
        .collect()
}

fn sort_deletions(dels: &mut [Deletion]) {
    dels.sort_by_key(|d| (d.start, std::cmp::Reverse(d.end), d.rule));
}

/// Re-renders `text` from `deletions`.
pub fn render_summary(doc: &Document, summary: &mut Summary) {
    summary.text = summary
        .selected
        .iter()
        .zip(&summary.deletions)
        .map(|(&s, dels)| surviving(&doc.sentences[s], dels))
        .collect();
}

/// Removes options whose every unigram already appears elsewhere in the
/// summary.
///
/// Options are visited in document order (`options` is parallel to
/// `summary.selected`); coverage is recomputed after every deletion.
/// Matching is on lowercased tokens, punctuation ignored. Options without
/// a surviving content token are left alone.
pub fn dedup_summary(
    doc: &Document,
    summary: &Summary,
    options: &[Vec<CompressionOption>],
) -> Summary {
    let mut out = summary.clone();
    let lowered: Vec<Vec<Option<String>>> = out
        .selected
        .iter()
        .map(|&s| {
            doc.sentences[s]
                .words()
                .iter()
                .map(|w| (!is_punctuation(w)).then(|| w.to_lowercase()))
                .collect()
        })
        .collect();
    let deleted = |dels: &[Deletion], i: usize| dels.iter().any(|d| d.span().contains_index(i));

    for (pos, opts) in options.iter().enumerate() {
        let mut ordered: Vec<&CompressionOption> = opts.iter().collect();
        ordered.sort_by_key(|o| (o.span.start, std::cmp::Reverse(o.span.end), o.rule));
        for opt in ordered {
            if out.deletions[pos].iter().any(|d| d.span() == opt.span) {
                continue;
            }
            let inside: HashSet<&str> = (opt.span.start..opt.span.end)
                .filter(|&i| !deleted(&out.deletions[pos], i))
                .filter_map(|i| lowered[pos][i].as_deref())
                .collect();
            if inside.is_empty() {
                continue;
            }
            let mut outside: HashSet<&str> = HashSet::new();
            for (p, toks) in lowered.iter().enumerate() {
                for (i, t) in toks.iter().enumerate() {
                    if (p == pos && opt.span.contains_index(i)) || deleted(&out.deletions[p], i) {
                        continue;
                    }
                    if let Some(t) = t {
                        outside.insert(t);
                    }
                }
            }
            if inside.is_subset(&outside) {
                out.deletions[pos].push(Deletion::new(opt, Cause::Dedup));
            }
        }
        sort_deletions(&mut out.deletions[pos]);
    }
    render_summary(doc, &mut out);
    out
}

/// Extraction, thresholded compression and optional deduplication.
pub fn summarize(model: &Model, doc: &Document, cfg: &SummarizeConfig) -> Result<Summary> {
    cfg.validate()?;
    let ctx = DocContext::new(doc);
    let k = cfg.k.min(doc.len().min(model.max_sents()));
    let picks = decode_greedy_with(model, &ctx, &doc.id, k)?;

    let mut rows: Vec<(usize, Vec<CompressionOption>, Vec<Deletion>)> = picks
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let options = extract_options_with(&doc.sentences[s], &cfg.rules);
            let mut dels: Vec<Deletion> = options
                .iter()
                .filter(|o| {
                    let p = classify_option(model, &ctx.option(s, o, &picks[..t]));
                    apply_threshold(p, cfg.tau).is_del()
                })
                .map(|o| Deletion::new(o, Cause::Model))
                .collect();
            sort_deletions(&mut dels);
            (s, options, dels)
        })
        .collect();
    rows.sort_by_key(|r| r.0);

    let mut summary = Summary {
        doc_id: doc.id.clone(),
        selected: rows.iter().map(|r| r.0).collect(),
        deletions: rows.iter().map(|r| r.2.clone()).collect(),
        text: Vec::new(),
    };
    if cfg.dedup {
        let options: Vec<Vec<CompressionOption>> = rows.into_iter().map(|r| r.1).collect();
        summary = dedup_summary(doc, &summary, &options);
    } else {
        render_summary(doc, &mut summary);
    }
    Ok(summary)
}
