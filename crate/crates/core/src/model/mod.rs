//! Feature-based joint extraction and compression model.
//!
//! Extraction scores each remaining sentence as
//! `w_m · tanh(W_d x_t + W_h h_i + b)`, where `x_t` is the decoder state
//! concatenated with the document features and `h_i` the sentence features,
//! and normalizes with a softmax over unselected sentences. Compression is a
//! one-hidden-layer tanh MLP with a logistic output giving `p(DEL)`.

mod features;
mod network;
mod precise;
mod train;

pub use features::{
    featurize_document, featurize_option, featurize_sentence, DecoderState, DocContext,
    DocumentFeatures, OptionFeatures, SentenceFeatures, DECODER_INPUT_DIM, DOCUMENT_DIM,
    OPTION_DIM, SENTENCE_DIM, STATE_DIM,
};
pub use network::{
    classify_option, decode_greedy, decode_greedy_with, example_loss, loss_and_gradient,
    loss_joint, raw_scores, score_remaining, softmax_remaining, LossParts, TrainingExample,
    TrainingStep,
};
pub use train::{gradient_check, gradient_check_against, train, train_from, Adam, TrainReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hidden width of both networks.
pub const DEFAULT_HIDDEN: usize = 32;
/// Half-width of the uniform weight initialization interval.
pub const INIT_SCALE: f64 = 0.08;

/// Dense row-major matrix, serialized as an array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `out += self · x`
    pub fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o += self.row(r).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// `self += scale · g ⊗ x`
    pub fn add_outer(&mut self, g: &[f64], x: &[f64], scale: f64) {
        for (r, gr) in g.iter().enumerate() {
            if *gr == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, v) in row.iter_mut().zip(x) {
                *w += scale * gr * v;
            }
        }
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.data
            .chunks(m.cols.max(1))
            .take(m.rows)
            .map(<[f64]>::to_vec)
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged matrix rows".into());
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the compression loss.
    pub alpha: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Loss weight on DEL examples.
    pub pos_weight: f64,
    pub hidden_size: usize,
    /// Only the first `max_sents` sentences of a document are scoreable.
    pub max_sents: usize,
    /// Oracles per document used in the loss.
    pub m: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 1.0,
            learning_rate: 0.001,
            epochs: 2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
            pos_weight: 1.0,
            hidden_size: DEFAULT_HIDDEN,
            max_sents: 30,
            m: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be finite and >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and > 0");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("adam epsilon must be > 0");
        }
        if !(self.pos_weight > 0.0 && self.pos_weight.is_finite()) {
            return bad("pos_weight must be finite and > 0");
        }
        if self.hidden_size == 0 || self.max_sents == 0 || self.m == 0 {
            return bad("hidden_size, max_sents and m must be >= 1");
        }
        Ok(())
    }
}

/// Model parameters. The flat parameter order is the field order below.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    /// `H × DECODER_INPUT_DIM`
    pub ext_wd: Matrix,
    /// `H × SENTENCE_DIM`
    pub ext_wh: Matrix,
    pub ext_b: Vec<f64>,
    pub ext_wm: Vec<f64>,
    /// `H × OPTION_DIM`
    pub comp_w1: Matrix,
    pub comp_b1: Vec<f64>,
    pub comp_w2: Vec<f64>,
    pub comp_b2: f64,
    pub config: TrainConfig,
}

impl Model {
    /// All parameters zero.
    pub fn zeros(config: &TrainConfig) -> Self {
        let h = config.hidden_size;
        Model {
            ext_wd: Matrix::zeros(h, DECODER_INPUT_DIM),
            ext_wh: Matrix::zeros(h, SENTENCE_DIM),
            ext_b: vec![0.0; h],
            ext_wm: vec![0.0; h],
            comp_w1: Matrix::zeros(h, OPTION_DIM),
            comp_b1: vec![0.0; h],
            comp_w2: vec![0.0; h],
            comp_b2: 0.0,
            config: config.clone(),
        }
    }

    /// Weights uniform in `[-INIT_SCALE, INIT_SCALE]` from `config.seed`;
    /// biases zero.
    pub fn init(config: &TrainConfig) -> Self {
        Model::init_uniform(config, INIT_SCALE)
    }

    /// Weights uniform in `[-scale, scale]` from `config.seed`; biases zero.
    pub fn init_uniform(config: &TrainConfig, scale: f64) -> Self {
        let mut model = Model::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for w in [
            model.ext_wd.as_mut_slice(),
            model.ext_wh.as_mut_slice(),
            &mut model.ext_wm[..],
            model.comp_w1.as_mut_slice(),
            &mut model.comp_w2[..],
        ] {
            for v in w.iter_mut() {
                *v = rng.gen_range(-scale..=scale);
            }
        }
        model
    }

    pub fn hidden_size(&self) -> usize {
        self.ext_b.len()
    }

    pub fn max_sents(&self) -> usize {
        self.config.max_sents
    }

    pub fn tensors(&self) -> [&[f64]; 8] {
        [
            self.ext_wd.as_slice(),
            self.ext_wh.as_slice(),
            &self.ext_b,
            &self.ext_wm,
            self.comp_w1.as_slice(),
            &self.comp_b1,
            &self.comp_w2,
            std::slice::from_ref(&self.comp_b2),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 8] {
        [
            self.ext_wd.as_mut_slice(),
            self.ext_wh.as_mut_slice(),
            &mut self.ext_b,
            &mut self.ext_wm,
            self.comp_w1.as_mut_slice(),
            &mut self.comp_b1,
            &mut self.comp_w2,
            std::slice::from_mut(&mut self.comp_b2),
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        let mut rest = flat;
        for t in self.tensors_mut() {
            let (head, tail) = rest.split_at(t.len());
            t.copy_from_slice(head);
            rest = tail;
        }
    }

    /// Checks every tensor against the configured hidden size and the
    /// feature dimensions, and that all weights are finite.
    pub fn validate(&self) -> Result<()> {
        let h = self.config.hidden_size;
        let shapes = [
            (
                "ext_wd",
                self.ext_wd.rows(),
                self.ext_wd.cols(),
                h,
                DECODER_INPUT_DIM,
            ),
            (
                "ext_wh",
                self.ext_wh.rows(),
                self.ext_wh.cols(),
                h,
                SENTENCE_DIM,
            ),
            (
                "comp_w1",
                self.comp_w1.rows(),
                self.comp_w1.cols(),
                h,
                OPTION_DIM,
            ),
        ];
        for (name, r, c, er, ec) in shapes {
            if (r, c) != (er, ec) {
                return Err(Error::ModelFormat(format!(
                    "{name} is {r}x{c}, expected {er}x{ec}"
                )));
            }
        }
        for (name, len) in [
            ("ext_b", self.ext_b.len()),
            ("ext_wm", self.ext_wm.len()),
            ("comp_b1", self.comp_b1.len()),
            ("comp_w2", self.comp_w2.len()),
        ] {
            if len != h {
                return Err(Error::ModelFormat(format!(
                    "{name} has length {len}, expected {h}"
                )));
            }
        }
        if self
            .tensors()
            .iter()
            .any(|t| t.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::ModelFormat("non-finite weight".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = TrainConfig::default();
        let a = Model::init(&cfg);
        assert_eq!(a, Model::init(&cfg));
        assert_ne!(
            a,
            Model::init(&TrainConfig {
                seed: 7,
                ..cfg.clone()
            })
        );
        assert!(a.flat_params().iter().all(|v| v.abs() <= INIT_SCALE));
        assert!(a.ext_b.iter().all(|v| *v == 0.0));
        assert!(a.validate().is_ok());
    }

    #[test]
    fn flat_round_trip() {
        let mut m = Model::init(&TrainConfig::default());
        let flat: Vec<f64> = (0..m.num_params()).map(|i| i as f64).collect();
        m.set_flat_params(&flat);
        assert_eq!(m.flat_params(), flat);
        assert_eq!(m.comp_b2, (m.num_params() - 1) as f64);
    }

    #[test]
    fn matrix_serializes_as_rows() {
        let mut m = Matrix::zeros(2, 3);
        m.set(1, 2, 5.0);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[0.0,0.0,0.0],[0.0,0.0,5.0]]");
        let back: Matrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Matrix>("[[1.0],[1.0,2.0]]").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig {
            alpha: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            learning_rate: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
