mod common;

use std::io::Write;

use common::{fixture, fixture_corpus, fixture_labels};
use compsum::corpus::read_corpus;
use compsum::model::{train, Model, TrainConfig, TrainingExample};
use compsum::oracle::{
    read_oracle_cache, select_training_oracles, write_oracle_cache, OracleConfig,
};
use compsum::pipeline::{load_model, save_model, summarize, SummarizeConfig, Summary};
use compsum::Error;

fn bits(m: &Model) -> Vec<u64> {
    m.flat_params().iter().map(|v| v.to_bits()).collect()
}

fn examples() -> Vec<TrainingExample> {
    fixture_labels(&OracleConfig::default())
        .iter()
        .map(|(d, r, l)| {
            TrainingExample::new(d, &select_training_oracles(&r.oracles, 5), l, 30).unwrap()
        })
        .collect()
}

#[test]
fn same_seed_trains_identical_weights() {
    let ex = examples();
    let cfg = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let (a, ra) = train(&ex, &cfg).unwrap();
    let (b, rb) = train(&ex, &cfg).unwrap();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(ra.epoch_losses, rb.epoch_losses);
    let (c, _) = train(&ex, &TrainConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(bits(&a), bits(&c));
}

#[test]
fn save_load_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let m = Model::init_uniform(&TrainConfig::default(), 0.9);
    save_model(&m, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(bits(&back), bits(&m));
    assert_eq!(back.config, m.config);
}

#[test]
fn truncated_model_file_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let text = std::fs::read_to_string(fixture("model.json")).unwrap();
    std::fs::write(&path, &text[..text.len() / 3]).unwrap();
    assert!(matches!(load_model(&path), Err(Error::ModelFormat(_))));
}

#[test]
fn summaries_match_golden_file() {
    let model = load_model(fixture("model.json")).unwrap();
    let golden = std::fs::read_to_string(fixture("summaries.golden.jsonl")).unwrap();
    let want: Vec<Summary> = golden
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let got: Vec<Summary> = fixture_corpus()
        .iter()
        .map(|d| summarize(&model, d, &SummarizeConfig::default()).unwrap())
        .collect();
    assert_eq!(got, want);
}

#[test]
fn oracle_cache_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.jsonl");
    let records: Vec<_> = fixture_labels(&OracleConfig::default())
        .into_iter()
        .map(|(_, r, _)| r)
        .collect();
    write_oracle_cache(&path, &records).unwrap();
    assert_eq!(read_oracle_cache(&path).unwrap(), records);
}

#[test]
fn corpus_reader_skips_bad_records_and_keeps_going() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let good = std::fs::read_to_string(fixture("corpus.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    writeln!(file, "{first}").unwrap();
    writeln!(file, "{{\"id\": \"broken\", \"sentences\": [{{\"tokens\": [\"a\"], \"parse\": \"(S (NN a)\"}}]}}").unwrap();
    writeln!(file, "not json").unwrap();
    writeln!(file, "{first}").unwrap();
    let (docs, errors) = read_corpus(file.path()).unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(errors.len(), 2);
}

#[test]
fn token_and_parse_disagreement_is_rejected() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        file,
        "{{\"id\": \"d\", \"sentences\": [{{\"tokens\": [\"a\", \"c\"], \"parse\": \"(S (NN a) (NN b))\"}}], \"reference\": []}}"
    )
    .unwrap();
    let (docs, errors) = read_corpus(file.path()).unwrap();
    assert!(docs.is_empty());
    assert!(
        matches!(
            errors[0],
            Error::TokenMismatch { .. } | Error::CorpusLine { .. }
        ),
        "{:?}",
        errors[0]
    );
}
