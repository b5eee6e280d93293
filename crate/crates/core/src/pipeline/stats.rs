use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::oracle::LabeledOption;
use crate::rules::{extract_options_with, RuleConfig};
use crate::treebank::Span;

use super::evaluate::csv_error;
use super::summarize::{Cause, Summary};

/// Column set of the node-type table.
pub const STATS_HEADER: [&str; 5] = ["Node Type", "Len", "% of comps", "Comp Acc", "Dedup"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub node_type: String,
    pub count: usize,
    /// Mean span length in tokens.
    pub mean_len: f64,
    /// Percentage of all counted compressions.
    pub share: f64,
    /// Percentage the oracle labels DEL, when labels are known.
    pub comp_acc: Option<f64>,
    /// Percentage caused by deduplication, when summaries are given.
    pub dedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    /// Sorted by share, then node type.
    pub rows: Vec<StatsRow>,
    pub total: usize,
}

impl StatsReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(STATS_HEADER).map_err(csv_error)?;
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.0}%"));
        for r in &self.rows {
            out.write_record([
                r.node_type.clone(),
                format!("{:.1}", r.mean_len),
                format!("{:.0}%", r.share),
                pct(r.comp_acc),
                pct(r.dedup),
            ])
            .map_err(csv_error)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }
}

#[derive(Default)]
struct Tally {
    count: usize,
    len_sum: usize,
    labeled: usize,
    del: usize,
    dedup: usize,
}

type LabelIndex<'a> = HashMap<(&'a str, usize, Span), &'a LabeledOption>;

fn index_labels<'a>(docs: &'a [Document], labels: &'a [Vec<Vec<LabeledOption>>]) -> LabelIndex<'a> {
    let mut index = HashMap::new();
    for (doc, per_doc) in docs.iter().zip(labels) {
        for (s, opts) in per_doc.iter().enumerate() {
            for l in opts {
                index.insert((doc.id.as_str(), s, l.option.span), l);
            }
        }
    }
    index
}

fn finish(tallies: BTreeMap<String, Tally>, with_dedup: bool) -> StatsReport {
    let total: usize = tallies.values().map(|t| t.count).sum();
    let mut rows: Vec<StatsRow> = tallies
        .into_iter()
        .map(|(node_type, t)| StatsRow {
            node_type,
            count: t.count,
            mean_len: t.len_sum as f64 / t.count as f64,
            share: 100.0 * t.count as f64 / total as f64,
            comp_acc: (t.labeled > 0).then(|| 100.0 * t.del as f64 / t.labeled as f64),
            dedup: with_dedup.then(|| 100.0 * t.dedup as f64 / t.count as f64),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.node_type.cmp(&b.node_type))
    });
    StatsReport { rows, total }
}

/// Statistics over every extracted option of the corpus. `labels`, when
/// given, is parallel to `docs` and fills the oracle column.
pub fn option_stats(
    docs: &[Document],
    labels: Option<&[Vec<Vec<LabeledOption>>]>,
    rules: &RuleConfig,
) -> StatsReport {
    let index = labels.map(|l| index_labels(docs, l));
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for doc in docs {
        for (s, tree) in doc.sentences.iter().enumerate() {
            for opt in extract_options_with(tree, rules) {
                let t = tallies.entry(opt.node_label.clone()).or_default();
                t.count += 1;
                t.len_sum += opt.span.len();
                if let Some(l) = index
                    .as_ref()
                    .and_then(|i| i.get(&(doc.id.as_str(), s, opt.span)))
                {
                    t.labeled += 1;
                    t.del += usize::from(l.label.is_del());
                }
            }
        }
    }
    finish(tallies, false)
}

/// Statistics over the deletions applied in `summaries`.
pub fn summary_stats(
    docs: &[Document],
    summaries: &[Summary],
    labels: Option<&[Vec<Vec<LabeledOption>>]>,
) -> StatsReport {
    let index = labels.map(|l| index_labels(docs, l));
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for summary in summaries {
        for (&s, dels) in summary.selected.iter().zip(&summary.deletions) {
            for d in dels {
                let t = tallies.entry(d.node.clone()).or_default();
                t.count += 1;
                t.len_sum += d.end - d.start;
                t.dedup += usize::from(d.cause == Cause::Dedup);
                if let Some(l) = index
                    .as_ref()
                    .and_then(|i| i.get(&(summary.doc_id.as_str(), s, d.span())))
                {
                    t.labeled += 1;
                    t.del += usize::from(l.label.is_del());
                }
            }
        }
    }
    finish(tallies, true)
}

/// Node-type table: over applied deletions when summaries are given, else
/// over all extracted options.
pub fn stats_report(
    docs: &[Document],
    labels: Option<&[Vec<Vec<LabeledOption>>]>,
    summaries: Option<&[Summary]>,
    rules: &RuleConfig,
) -> StatsReport {
    match summaries {
        Some(s) => summary_stats(docs, s, labels),
        None => option_stats(docs, labels, rules),
    }
}
