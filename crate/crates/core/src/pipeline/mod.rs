//! Corpus-level workflows: training data assembly, summarization,
//! evaluation, sweeps, reports and model files.

pub mod config;
mod evaluate;
mod persist;
mod stats;
mod summarize;

use std::collections::HashMap;

pub use evaluate::{
    eval_tokens, evaluate_corpus, evaluate_summaries, parse_tau_grid, score_summary,
    sweep_threshold, write_sweep_csv, EvalReport, EvalRow, RougeTriple, SweepRow,
};
pub use persist::{
    load_model, model_from_json, model_to_json, save_model, FeatureDims, FORMAT_VERSION,
};
pub use stats::{option_stats, stats_report, summary_stats, StatsReport, StatsRow, STATS_HEADER};
pub use summarize::{
    apply_threshold, dedup_summary, render_summary, summarize, Cause, Deletion, SummarizeConfig,
    Summary,
};

pub use crate::corpus::{load_corpus, read_corpus};

use crate::corpus::Document;
use crate::error::Result;
use crate::model::{TrainConfig, TrainingExample};
use crate::oracle::{select_training_oracles, LabeledOption, OracleRecord};
use crate::rules::RuleConfig;

/// Labels for every document that has an oracle record, parallel to
/// `docs`; documents without one get `None`.
pub fn attach_labels(
    docs: &[Document],
    records: &[OracleRecord],
    rules: &RuleConfig,
) -> Result<Vec<Option<Vec<Vec<LabeledOption>>>>> {
    let by_id: HashMap<&str, &OracleRecord> =
        records.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    docs.iter()
        .map(|d| {
            by_id
                .get(d.id.as_str())
                .map(|r| r.labeled_options(d, rules))
                .transpose()
        })
        .collect()
}

/// Training examples for documents with cached oracles, in corpus order.
/// Each uses the top `cfg.m` oracles of its beam.
pub fn prepare_examples(
    docs: &[Document],
    records: &[OracleRecord],
    cfg: &TrainConfig,
    rules: &RuleConfig,
) -> Result<Vec<TrainingExample>> {
    let by_id: HashMap<&str, &OracleRecord> =
        records.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        let Some(record) = by_id.get(doc.id.as_str()) else {
            log::warn!("{}: no cached oracle, skipped", doc.id);
            continue;
        };
        let labels = record.labeled_options(doc, rules)?;
        let oracles = select_training_oracles(&record.oracles, cfg.m);
        out.push(TrainingExample::new(doc, &oracles, &labels, cfg.max_sents)?);
    }
    Ok(out)
}
