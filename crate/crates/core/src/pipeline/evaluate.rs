use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rouge::{
    is_punctuation, preprocess_tokens, rouge_l, rouge_n, PreprocessConfig, RougeScore,
};

use super::summarize::{summarize, SummarizeConfig, Summary};

/// Evaluation tokens: lowercased and stemmed, punctuation dropped.
pub fn eval_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    let cfg = PreprocessConfig {
        stem: true,
        ..Default::default()
    };
    let kept: Vec<&str> = tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_punctuation(t))
        .collect();
    preprocess_tokens(&kept, &cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RougeTriple {
    pub rouge_1: RougeScore,
    pub rouge_2: RougeScore,
    pub rouge_l: RougeScore,
}

impl RougeTriple {
    pub fn score<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> Self {
        let c = eval_tokens(candidate);
        let r = eval_tokens(reference);
        RougeTriple {
            rouge_1: rouge_n(&c, &[&r], 1),
            rouge_2: rouge_n(&c, &[&r], 2),
            rouge_l: rouge_l(&c, &r),
        }
    }

    /// Mean of the three F1 values.
    pub fn mean_f1(&self) -> f64 {
        (self.rouge_1.f1 + self.rouge_2.f1 + self.rouge_l.f1) / 3.0
    }

    fn mean(items: &[RougeTriple]) -> RougeTriple {
        let n = items.len().max(1) as f64;
        let avg = |f: fn(&RougeTriple) -> RougeScore| RougeScore {
            precision: items.iter().map(|t| f(t).precision).sum::<f64>() / n,
            recall: items.iter().map(|t| f(t).recall).sum::<f64>() / n,
            f1: items.iter().map(|t| f(t).f1).sum::<f64>() / n,
        };
        RougeTriple {
            rouge_1: avg(|t| t.rouge_1),
            rouge_2: avg(|t| t.rouge_2),
            rouge_l: avg(|t| t.rouge_l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub doc_id: String,
    pub scores: RougeTriple,
    /// Summary tokens after deletions.
    pub tokens_after: usize,
    /// Tokens of the selected sentences before deletions.
    pub tokens_before: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub mean: RougeTriple,
    /// Documents without a reference.
    pub skipped: usize,
}

impl EvalReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "doc_id", "r1_p", "r1_r", "r1_f", "r2_p", "r2_r", "r2_f", "rl_p", "rl_r", "rl_f",
        ])
        .map_err(csv_error)?;
        for row in &self.rows {
            let s = &row.scores;
            let mut rec = vec![row.doc_id.clone()];
            for r in [s.rouge_1, s.rouge_2, s.rouge_l] {
                rec.extend([r.precision, r.recall, r.f1].map(|v| format!("{v:.6}")));
            }
            out.write_record(&rec).map_err(csv_error)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// Token-level compression ratio over the whole corpus.
    pub fn compression_ratio(&self) -> f64 {
        let before: usize = self.rows.iter().map(|r| r.tokens_before).sum();
        let after: usize = self.rows.iter().map(|r| r.tokens_after).sum();
        if before == 0 {
            1.0
        } else {
            after as f64 / before as f64
        }
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io("<csv>", source),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Scores a summary against its document's reference.
pub fn score_summary(doc: &Document, summary: &Summary) -> EvalRow {
    let candidate: Vec<&str> = summary.tokens().collect();
    let reference = doc.reference_tokens();
    EvalRow {
        doc_id: doc.id.clone(),
        scores: RougeTriple::score(&candidate, &reference),
        tokens_after: candidate.len(),
        tokens_before: summary
            .selected
            .iter()
            .map(|&s| doc.sentences[s].len())
            .sum(),
    }
}

/// Rows and means over already computed summaries; `summaries` is
/// parallel to `docs`.
pub fn evaluate_summaries(docs: &[Document], summaries: &[Summary]) -> EvalReport {
    let mut skipped = 0;
    let mut rows = Vec::new();
    for (doc, summary) in docs.iter().zip(summaries) {
        if !doc.has_reference() {
            log::warn!("{}: no reference, skipped", doc.id);
            skipped += 1;
            continue;
        }
        rows.push(score_summary(doc, summary));
    }
    let scores: Vec<RougeTriple> = rows.iter().map(|r| r.scores).collect();
    EvalReport {
        mean: RougeTriple::mean(&scores),
        rows,
        skipped,
    }
}

/// Summarizes every document with a reference (in parallel, order kept)
/// and averages per-document scores.
pub fn evaluate_corpus(
    model: &Model,
    docs: &[Document],
    cfg: &SummarizeConfig,
) -> Result<EvalReport> {
    let scored: Vec<&Document> = docs.iter().filter(|d| d.has_reference()).collect();
    let skipped = docs.len() - scored.len();
    if skipped > 0 {
        log::warn!("{skipped} documents without a reference skipped");
    }
    let rows: Vec<EvalRow> = scored
        .par_iter()
        .map(|d| summarize(model, d, cfg).map(|s| score_summary(d, &s)))
        .collect::<Result<_>>()?;
    let scores: Vec<RougeTriple> = rows.iter().map(|r| r.scores).collect();
    Ok(EvalReport {
        mean: RougeTriple::mean(&scores),
        rows,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    /// Mean of the three F1 columns.
    pub mean_f1: f64,
    pub compression_ratio: f64,
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_tau_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("tau grid must be start:stop:step, got {spec:?}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan()
        || step <= 0.0
        || start > stop
        || !(0.0..=1.0).contains(&start)
        || !(0.0..=1.0).contains(&stop)
    {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn sweep_threshold(
    model: &Model,
    docs: &[Document],
    grid: &[f64],
    base: &SummarizeConfig,
) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|&tau| {
            let cfg = SummarizeConfig {
                tau,
                ..base.clone()
            };
            let report = evaluate_corpus(model, docs, &cfg)?;
            Ok(SweepRow {
                tau,
                rouge_1: report.mean.rouge_1.f1,
                rouge_2: report.mean.rouge_2.f1,
                rouge_l: report.mean.rouge_l.f1,
                mean_f1: report.mean.mean_f1(),
                compression_ratio: report.compression_ratio(),
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "tau",
        "rouge_1",
        "rouge_2",
        "rouge_l",
        "mean_f1",
        "compression_ratio",
    ])
    .map_err(csv_error)?;
    for r in rows {
        out.write_record(
            [
                r.tau,
                r.rouge_1,
                r.rouge_2,
                r.rouge_l,
                r.mean_f1,
                r.compression_ratio,
            ]
            .map(|v| format!("{v:.6}")),
        )
        .map_err(csv_error)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_tau_grid("0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let g = parse_tau_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(parse_tau_grid("0.45:0.45:0.1").unwrap(), vec![0.45]);
        assert!(parse_tau_grid("0:2:0.5").is_err());
        assert!(parse_tau_grid("0:1").is_err());
        assert!(parse_tau_grid("0:1:0").is_err());
    }

    #[test]
    fn identical_texts_score_one() {
        let t = ["The", "cat", "sat", "."];
        let s = RougeTriple::score(&t, &t);
        assert_eq!(s.mean_f1(), 1.0);
        let s = RougeTriple::score(&["dogs"], &t);
        assert_eq!(s.mean_f1(), 0.0);
    }

    #[test]
    fn punctuation_is_not_scored() {
        assert_eq!(eval_tokens(&["Cats", ",", "ran", "."]), vec!["cat", "ran"]);
    }
}
