use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::network::{example_loss, loss_and_gradient, TrainingExample};
use super::precise::{self, Part};
use super::{Model, TrainConfig};

/// Finite-difference step for [`gradient_check`].
pub const GRADCHECK_STEP: f64 = 1e-5;

/// Adaptive-moment optimizer over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n: usize, cfg: &TrainConfig) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (i, p) in params.iter_mut().enumerate() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss before the first update.
    pub initial_loss: f64,
    /// Mean training loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

fn mean_loss(model: &Model, examples: &[TrainingExample], cfg: &TrainConfig) -> f64 {
    examples
        .iter()
        .map(|ex| example_loss(model, ex, cfg.alpha, cfg.pos_weight).total)
        .sum::<f64>()
        / examples.len() as f64
}

/// Trains a freshly initialized model.
pub fn train(examples: &[TrainingExample], cfg: &TrainConfig) -> Result<(Model, TrainReport)> {
    cfg.validate()?;
    train_from(Model::init(cfg), examples, cfg)
}

/// One Adam step per document, documents shuffled each epoch by a
/// generator seeded from `cfg.seed`.
pub fn train_from(
    mut model: Model,
    examples: &[TrainingExample],
    cfg: &TrainConfig,
) -> Result<(Model, TrainReport)> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if model.hidden_size() != cfg.hidden_size {
        return Err(Error::Config(format!(
            "model hidden size {} does not match config {}",
            model.hidden_size(),
            cfg.hidden_size
        )));
    }
    model.config = cfg.clone();
    let initial_loss = mean_loss(&model, examples, cfg);
    let mut adam = Adam::new(model.num_params(), cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut params = model.flat_params();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (_, grad) = loss_and_gradient(&model, &examples[i], cfg.alpha, cfg.pos_weight);
            adam.step(&mut params, &grad.flat_params());
            model.set_flat_params(&params);
        }
        let loss = mean_loss(&model, examples, cfg);
        log::info!("epoch {}: mean loss {loss:.6}", epoch + 1);
        epoch_losses.push(loss);
    }
    Ok((
        model,
        TrainReport {
            initial_loss,
            epoch_losses,
        },
    ))
}

fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / (a.abs() + n.abs()).max(1e-8)
}

/// Largest relative error between the backpropagated gradient and central
/// finite differences, over all parameters.
pub fn gradient_check(model: &Model, ex: &TrainingExample) -> f64 {
    let (_, grad) = loss_and_gradient(model, ex, model.config.alpha, model.config.pos_weight);
    gradient_check_against(model, ex, &grad.flat_params())
}

/// Compares `analytic` (flat parameter order) against central finite
/// differences of a double-double evaluation of the loss.
pub fn gradient_check_against(model: &Model, ex: &TrainingExample, analytic: &[f64]) -> f64 {
    let (alpha, pw) = (model.config.alpha, model.config.pos_weight);
    let base = model.flat_params();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let mut params = base.clone();
    // Extraction tensors come first in flat order; the other part of the
    // loss is bit-identical on both sides of the difference.
    let ext_len: usize = model.tensors()[..4].iter().map(|t| t.len()).sum();
    for (i, ga) in analytic.iter().enumerate() {
        let part = if i < ext_len {
            Part::Extraction
        } else {
            Part::Compression
        };
        let (hi, lo) = (base[i] + GRADCHECK_STEP, base[i] - GRADCHECK_STEP);
        params[i] = hi;
        probe.set_flat_params(&params);
        let plus = precise::loss_part(&probe, ex, alpha, pw, part);
        params[i] = lo;
        probe.set_flat_params(&params);
        let minus = precise::loss_part(&probe, ex, alpha, pw, part);
        params[i] = base[i];
        // The realized step, not the nominal one, divides the difference.
        let gn = f64::from((plus - minus) / (hi - lo));
        worst = worst.max(relative_error(*ga, gn));
    }
    worst
}
