//! Double-double forward pass of the training loss, used only by the
//! gradient check.
//!
//! Central differences at a step of 1e-5 cannot resolve gradients much
//! below 1e-7 in f64: the loss difference sits near the rounding noise of
//! the loss itself. Evaluating the same forward pass with ~32 significant
//! digits pushes that floor below 1e-15.
//!
//! `twofloat` supplies the error-free sums and products. Its transcendental
//! functions are only accurate to about 1e-14 and its double-double quotient
//! to about 1e-17, so `exp`, `ln`, `tanh` and division are rebuilt here from
//! sums and products alone.

use twofloat::TwoFloat;

use crate::oracle::Label;

use super::features::{OptionFeatures, SentenceFeatures};
use super::network::TrainingExample;
use super::Model;

type Dd = TwoFloat;

const LN2: Dd = TwoFloat::from_f64(std::f64::consts::LN_2);
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;
/// `|r| <= ln2 / 2 / 2^10` after reduction, so 14 Taylor terms exceed
/// double-double precision. The squarings scale the relative error by
/// 2^10, leaving about 1e-29.
const EXP_SQUARINGS: i32 = 10;
const EXP_TERMS: u32 = 14;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

fn ln2() -> Dd {
    LN2 + LN2_LO
}

fn scale_pow2(x: Dd, k: i32) -> Dd {
    let s = 2f64.powi(k);
    Dd::new_add(x.hi() * s, x.lo() * s)
}

/// Long division: three f64 quotient digits, each correcting the exact
/// remainder of the previous ones.
fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

pub(super) fn exp(x: Dd) -> Dd {
    if x.hi() > 709.0 {
        return dd(f64::INFINITY);
    }
    if x.hi() < -745.0 {
        return dd(0.0);
    }
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = scale_pow2(x - ln2() * k, -EXP_SQUARINGS);
    let mut sum = dd(1.0);
    let mut term = dd(1.0);
    for n in 1..=EXP_TERMS {
        term = term * r / f64::from(n);
        sum += term;
    }
    for _ in 0..EXP_SQUARINGS {
        sum = sum * sum;
    }
    // k fits easily: |x| <= 745
    let k = k as i32;
    // Split the power so neither factor overflows near the range limits.
    scale_pow2(scale_pow2(sum, k / 2), k - k / 2)
}

/// Natural log for positive finite `x`: two Newton steps on `exp(y) = x`
/// from the f64 estimate.
pub(super) fn ln(x: Dd) -> Dd {
    let mut y = dd(x.hi().ln());
    for _ in 0..2 {
        y = y + x * exp(-y) - 1.0;
    }
    y
}

pub(super) fn tanh(x: Dd) -> Dd {
    let neg = x.hi() < 0.0;
    let e = exp(if neg { x * 2.0 } else { -x * 2.0 });
    let t = div(1.0 - e, 1.0 + e);
    if neg {
        -t
    } else {
        t
    }
}

fn softplus(x: Dd) -> Dd {
    let abs = if x.hi() < 0.0 { -x } else { x };
    let pos = if x.hi() > 0.0 { x } else { dd(0.0) };
    pos + ln(1.0 + exp(-abs))
}

/// `Σ a_i b_i` with exact products.
fn dot(a: &[f64], b: &[f64]) -> Dd {
    a.iter()
        .zip(b)
        .fold(dd(0.0), |acc, (x, y)| acc + Dd::new_mul(*x, *y))
}

fn dot_dd(a: &[f64], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(dd(0.0), |acc, (x, y)| acc + *y * *x)
}

fn extraction_scores(model: &Model, x: &[f64], sents: &[SentenceFeatures]) -> Vec<Dd> {
    let h = model.hidden_size();
    let base: Vec<Dd> = (0..h)
        .map(|j| dot(model.ext_wd.row(j), x) + model.ext_b[j])
        .collect();
    sents
        .iter()
        .map(|s| {
            let z: Vec<Dd> = (0..h)
                .map(|j| tanh(base[j] + dot(model.ext_wh.row(j), &s.0)))
                .collect();
            dot_dd(&model.ext_wm, &z)
        })
        .collect()
}

fn compression_logit(model: &Model, f: &OptionFeatures) -> Dd {
    let v: Vec<Dd> = (0..model.hidden_size())
        .map(|j| tanh(dot(model.comp_w1.row(j), &f.0) + model.comp_b1[j]))
        .collect();
    dot_dd(&model.comp_w2, &v) + model.comp_b2
}

/// Which terms of the loss a parameter can affect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Part {
    Extraction,
    Compression,
}

/// One part of the loss of `ex`, identical in definition to
/// [`example_loss`](super::example_loss) but carried in double-double.
/// The parts sum to the total.
pub(super) fn loss_part(
    model: &Model,
    ex: &TrainingExample,
    alpha: f64,
    pos_weight: f64,
    part: Part,
) -> Dd {
    let mut sum = dd(0.0);
    for steps in &ex.oracles {
        for (t, step) in steps.iter().enumerate() {
            if part == Part::Compression {
                for (f, label) in &step.options {
                    let logit = compression_logit(model, f);
                    sum += match label {
                        Label::Del => softplus(-logit) * pos_weight,
                        Label::Keep => softplus(logit),
                    };
                }
                continue;
            }
            let selected: Vec<usize> = steps[..t].iter().map(|s| s.target).collect();
            let x: Vec<f64> = step
                .state
                .0
                .iter()
                .chain(&ex.doc_feats.0)
                .copied()
                .collect();
            let raw = extraction_scores(model, &x, &ex.sent_feats);
            let open: Vec<Dd> = raw
                .iter()
                .enumerate()
                .filter(|(i, _)| !selected.contains(i))
                .map(|(_, s)| *s)
                .collect();
            let max = open.iter().copied().fold(dd(f64::NEG_INFINITY), Dd::max);
            let z = open.iter().fold(dd(0.0), |acc, s| acc + exp(*s - max));
            sum += max + ln(z) - raw[step.target];
        }
    }
    let scale = if part == Part::Compression {
        alpha
    } else {
        1.0
    };
    sum * scale / ex.oracles.len() as f64
}
