use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::oracle::{Label, LabeledOption, OracleCandidate};

use super::features::{
    DecoderState, DocContext, DocumentFeatures, OptionFeatures, SentenceFeatures,
    DECODER_INPUT_DIM, STATE_DIM,
};
use super::Model;

fn decoder_input(state: &DecoderState, doc: &DocumentFeatures) -> [f64; DECODER_INPUT_DIM] {
    let mut x = [0.0; DECODER_INPUT_DIM];
    x[..STATE_DIM].copy_from_slice(&state.0);
    x[STATE_DIM..].copy_from_slice(&doc.0);
    x
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `W_d x + b`, shared by every candidate at one step.
fn step_base(model: &Model, x: &[f64]) -> Vec<f64> {
    let mut base = model.ext_b.clone();
    model.ext_wd.mul_add(x, &mut base);
    base
}

/// `tanh(base + W_h h)`
fn step_hidden(model: &Model, base: &[f64], h: &SentenceFeatures) -> Vec<f64> {
    let mut a = base.to_vec();
    model.ext_wh.mul_add(&h.0, &mut a);
    a.iter_mut().for_each(|v| *v = v.tanh());
    a
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unnormalized extraction scores for every sentence in `sent_feats`.
pub fn raw_scores(
    model: &Model,
    state: &DecoderState,
    doc_feats: &DocumentFeatures,
    sent_feats: &[SentenceFeatures],
) -> Vec<f64> {
    let base = step_base(model, &decoder_input(state, doc_feats));
    sent_feats
        .iter()
        .map(|h| dot(&model.ext_wm, &step_hidden(model, &base, h)))
        .collect()
}

/// Softmax over the entries not in `selected`; selected entries get
/// exactly 0.
pub fn softmax_remaining(raw: &[f64], selected: &[usize]) -> Result<Vec<f64>> {
    let open: Vec<bool> = (0..raw.len()).map(|i| !selected.contains(&i)).collect();
    let max = raw
        .iter()
        .zip(&open)
        .filter(|(_, o)| **o)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllSelected);
    }
    let exps: Vec<f64> = raw
        .iter()
        .zip(&open)
        .map(|(s, o)| if *o { (s - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// Distribution over the next pick. `sent_feats` holds only the scoreable
/// sentences.
pub fn score_remaining(
    model: &Model,
    state: &DecoderState,
    doc_feats: &DocumentFeatures,
    sent_feats: &[SentenceFeatures],
    selected: &[usize],
) -> Result<Vec<f64>> {
    softmax_remaining(&raw_scores(model, state, doc_feats, sent_feats), selected)
}

/// Returns the hidden activations and the logit.
fn compression_forward(model: &Model, feats: &OptionFeatures) -> (Vec<f64>, f64) {
    let mut v = model.comp_b1.clone();
    model.comp_w1.mul_add(&feats.0, &mut v);
    v.iter_mut().for_each(|x| *x = x.tanh());
    let o = dot(&model.comp_w2, &v) + model.comp_b2;
    (v, o)
}

/// `p(DEL)` for one option.
pub fn classify_option(model: &Model, feats: &OptionFeatures) -> f64 {
    sigmoid(compression_forward(model, feats).1)
}

pub fn decode_greedy(model: &Model, doc: &Document, k: usize) -> Result<Vec<usize>> {
    decode_greedy_with(model, &DocContext::new(doc), &doc.id, k)
}

/// Greedy decoding over a prebuilt context. Ties go to the lower index.
pub fn decode_greedy_with(
    model: &Model,
    ctx: &DocContext,
    doc_id: &str,
    k: usize,
) -> Result<Vec<usize>> {
    let n = ctx.sentences().len().min(model.max_sents());
    if k > n {
        return Err(Error::InsufficientSentences {
            doc_id: doc_id.to_string(),
            needed: k,
            found: n,
        });
    }
    let sent_feats = &ctx.sentences()[..n];
    let doc_feats = ctx.document();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let raw = raw_scores(model, &ctx.state(&picked, k), &doc_feats, sent_feats);
        let mut best: Option<usize> = None;
        for (i, s) in raw.iter().enumerate() {
            if picked.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| *s > raw[b]) {
                best = Some(i);
            }
        }
        picked.push(best.ok_or(Error::AllSelected)?);
    }
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingStep {
    pub state: DecoderState,
    pub target: usize,
    /// Options of the target sentence with their oracle labels.
    pub options: Vec<(OptionFeatures, Label)>,
}

/// Precomputed features for one document and its oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub doc_id: String,
    pub doc_feats: DocumentFeatures,
    /// Scoreable sentences only.
    pub sent_feats: Vec<SentenceFeatures>,
    /// One teacher-forced step sequence per oracle, in oracle order.
    pub oracles: Vec<Vec<TrainingStep>>,
}

impl TrainingExample {
    /// `labels` holds the labeled options of every sentence of `doc`.
    pub fn new(
        doc: &Document,
        oracles: &[OracleCandidate],
        labels: &[Vec<LabeledOption>],
        max_sents: usize,
    ) -> Result<Self> {
        if oracles.is_empty() {
            return Err(Error::Config(format!("document {} has no oracles", doc.id)));
        }
        if labels.len() != doc.len() {
            return Err(Error::Config(format!(
                "document {}: {} label rows for {} sentences",
                doc.id,
                labels.len(),
                doc.len()
            )));
        }
        let n = doc.len().min(max_sents);
        let ctx = DocContext::new(doc);
        let mut traces = Vec::with_capacity(oracles.len());
        for oracle in oracles {
            let k = oracle.indices.len();
            let mut steps = Vec::with_capacity(k);
            for (t, &target) in oracle.indices.iter().enumerate() {
                if target >= n {
                    return Err(Error::OracleIndex {
                        index: target,
                        scoreable: n,
                    });
                }
                let prefix = &oracle.indices[..t];
                if prefix.contains(&target) {
                    return Err(Error::Config(format!(
                        "document {}: oracle repeats sentence {target}",
                        doc.id
                    )));
                }
                let options = labels[target]
                    .iter()
                    .map(|l| (ctx.option(target, &l.option, prefix), l.label))
                    .collect();
                steps.push(TrainingStep {
                    state: ctx.state(prefix, k),
                    target,
                    options,
                });
            }
            traces.push(steps);
        }
        Ok(TrainingExample {
            doc_id: doc.id.clone(),
            doc_feats: ctx.document(),
            sent_feats: ctx.sentences()[..n].to_vec(),
            oracles: traces,
        })
    }

    /// Sentences picked before step `t` of oracle `o`.
    fn prefix(&self, o: usize, t: usize) -> Vec<usize> {
        self.oracles[o][..t].iter().map(|s| s.target).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    /// Extraction negative log-likelihood, averaged over oracles.
    pub sent: f64,
    /// Compression negative log-likelihood, summed over options and
    /// averaged over oracles.
    pub comp: f64,
    /// `sent + alpha * comp`
    pub total: f64,
}

fn label_loss(logit: f64, label: Label, pos_weight: f64) -> f64 {
    match label {
        Label::Del => pos_weight * softplus(-logit),
        Label::Keep => softplus(logit),
    }
}

fn logsumexp_open(raw: &[f64], selected: &[usize]) -> f64 {
    let max = raw
        .iter()
        .enumerate()
        .filter(|(i, _)| !selected.contains(i))
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = raw
        .iter()
        .enumerate()
        .filter(|(i, _)| !selected.contains(i))
        .map(|(_, s)| (s - max).exp())
        .sum();
    max + z.ln()
}

/// Joint loss of one example; forward pass only.
pub fn example_loss(model: &Model, ex: &TrainingExample, alpha: f64, pos_weight: f64) -> LossParts {
    let m = ex.oracles.len() as f64;
    let mut sent = 0.0;
    let mut comp = 0.0;
    for (o, steps) in ex.oracles.iter().enumerate() {
        for (t, step) in steps.iter().enumerate() {
            let selected = ex.prefix(o, t);
            let raw = raw_scores(model, &step.state, &ex.doc_feats, &ex.sent_feats);
            sent += logsumexp_open(&raw, &selected) - raw[step.target];
            for (f, label) in &step.options {
                comp += label_loss(compression_forward(model, f).1, *label, pos_weight);
            }
        }
    }
    let (sent, comp) = (sent / m, comp / m);
    LossParts {
        sent,
        comp,
        total: sent + alpha * comp,
    }
}

/// Joint loss of `doc` under `model`, using the model's alpha and
/// positive-class weight.
pub fn loss_joint(
    model: &Model,
    doc: &Document,
    oracles: &[OracleCandidate],
    labels: &[Vec<LabeledOption>],
) -> Result<f64> {
    let ex = TrainingExample::new(doc, oracles, labels, model.max_sents())?;
    Ok(example_loss(model, &ex, model.config.alpha, model.config.pos_weight).total)
}

/// Loss and its gradient with respect to every parameter, by manual
/// backpropagation. The gradient is returned in a model-shaped container.
pub fn loss_and_gradient(
    model: &Model,
    ex: &TrainingExample,
    alpha: f64,
    pos_weight: f64,
) -> (LossParts, Model) {
    let mut grad = Model::zeros(&model.config);
    let h = model.hidden_size();
    let m = ex.oracles.len() as f64;
    let mut sent = 0.0;
    let mut comp = 0.0;

    for (o, steps) in ex.oracles.iter().enumerate() {
        for (t, step) in steps.iter().enumerate() {
            let selected = ex.prefix(o, t);
            let x = decoder_input(&step.state, &ex.doc_feats);
            let base = step_base(model, &x);
            let hidden: Vec<Vec<f64>> = ex
                .sent_feats
                .iter()
                .map(|hf| step_hidden(model, &base, hf))
                .collect();
            let raw: Vec<f64> = hidden.iter().map(|z| dot(&model.ext_wm, z)).collect();
            let lse = logsumexp_open(&raw, &selected);
            sent += lse - raw[step.target];

            let mut sum_da = vec![0.0; h];
            for (i, z) in hidden.iter().enumerate() {
                if selected.contains(&i) {
                    continue;
                }
                let indicator = if i == step.target { 1.0 } else { 0.0 };
                let g = ((raw[i] - lse).exp() - indicator) / m;
                let mut da = vec![0.0; h];
                for j in 0..h {
                    grad.ext_wm[j] += g * z[j];
                    da[j] = g * model.ext_wm[j] * (1.0 - z[j] * z[j]);
                    sum_da[j] += da[j];
                }
                grad.ext_wh.add_outer(&da, &ex.sent_feats[i].0, 1.0);
            }
            for (b, d) in grad.ext_b.iter_mut().zip(&sum_da) {
                *b += d;
            }
            grad.ext_wd.add_outer(&sum_da, &x, 1.0);

            for (f, label) in &step.options {
                let (v, logit) = compression_forward(model, f);
                comp += label_loss(logit, *label, pos_weight);
                let d_logit = match label {
                    Label::Del => -pos_weight * sigmoid(-logit),
                    Label::Keep => sigmoid(logit),
                } * alpha
                    / m;
                grad.comp_b2 += d_logit;
                let mut du = vec![0.0; h];
                for j in 0..h {
                    grad.comp_w2[j] += d_logit * v[j];
                    du[j] = d_logit * model.comp_w2[j] * (1.0 - v[j] * v[j]);
                    grad.comp_b1[j] += du[j];
                }
                grad.comp_w1.add_outer(&du, &f.0, 1.0);
            }
        }
    }
    let (sent, comp) = (sent / m, comp / m);
    (
        LossParts {
            sent,
            comp,
            total: sent + alpha * comp,
        },
        grad,
    )
}
