use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Matrix, Model, TrainConfig, DECODER_INPUT_DIM, DOCUMENT_DIM, OPTION_DIM, SENTENCE_DIM,
    STATE_DIM,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDims {
    pub sentence: usize,
    pub document: usize,
    pub state: usize,
    pub decoder_input: usize,
    pub option: usize,
}

impl FeatureDims {
    pub fn current() -> Self {
        FeatureDims {
            sentence: SENTENCE_DIM,
            document: DOCUMENT_DIM,
            state: STATE_DIM,
            decoder_input: DECODER_INPUT_DIM,
            option: OPTION_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Weights {
    ext_wd: Matrix,
    ext_wh: Matrix,
    ext_b: Vec<f64>,
    ext_wm: Vec<f64>,
    comp_w1: Matrix,
    comp_b1: Vec<f64>,
    comp_w2: Vec<f64>,
    comp_b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    feature_dims: FeatureDims,
    hidden_size: usize,
    weights: Weights,
    train_config: TrainConfig,
    seed: u64,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn model_to_json(model: &Model) -> Result<String> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        feature_dims: FeatureDims::current(),
        hidden_size: model.hidden_size(),
        weights: Weights {
            ext_wd: model.ext_wd.clone(),
            ext_wh: model.ext_wh.clone(),
            ext_b: model.ext_b.clone(),
            ext_wm: model.ext_wm.clone(),
            comp_w1: model.comp_w1.clone(),
            comp_b1: model.comp_b1.clone(),
            comp_w2: model.comp_w2.clone(),
            comp_b2: model.comp_b2,
        },
        train_config: model.config.clone(),
        seed: model.config.seed,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parses a model file, checking version first, then shapes.
pub fn model_from_json(text: &str) -> Result<Model> {
    let probe: VersionProbe =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.feature_dims != FeatureDims::current() {
        return Err(Error::ModelFormat(format!(
            "feature dimensions {:?} do not match {:?}",
            file.feature_dims,
            FeatureDims::current()
        )));
    }
    if file.hidden_size != file.train_config.hidden_size || file.seed != file.train_config.seed {
        return Err(Error::ModelFormat(
            "hidden_size or seed disagrees with train_config".into(),
        ));
    }
    let w = file.weights;
    let model = Model {
        ext_wd: w.ext_wd,
        ext_wh: w.ext_wh,
        ext_b: w.ext_b,
        ext_wm: w.ext_wm,
        comp_w1: w.comp_w1,
        comp_b1: w.comp_b1,
        comp_w2: w.comp_w2,
        comp_b2: w.comp_b2,
        config: file.train_config,
    };
    model.validate()?;
    Ok(model)
}

/// Writes through a temporary sibling file so a failed save never leaves a
/// partial model behind.
pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = model_to_json(model)?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, json).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let m = Model::init_uniform(&TrainConfig::default(), 0.7);
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bits = |m: &Model| {
            m.flat_params()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&m));
    }

    #[test]
    fn version_and_truncation_errors() {
        let json = model_to_json(&Model::init(&TrainConfig::default())).unwrap();
        let bumped = json.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            model_from_json(&bumped),
            Err(Error::ModelVersion {
                found: 2,
                expected: 1
            })
        ));
        assert!(matches!(
            model_from_json(&json[..json.len() / 2]),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let json = model_to_json(&Model::init(&TrainConfig::default())).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["weights"]["ext_b"].as_array_mut().unwrap().pop();
        assert!(matches!(
            model_from_json(&v.to_string()),
            Err(Error::ModelFormat(_))
        ));
    }
}
