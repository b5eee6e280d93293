//! Synthetic corpora with a known salient sentence.
//!
//! Each document holds one sentence built around capitalized names; the
//! reference is that sentence with every option of a [`DELETABLE_RULES`]
//! rule removed. All other sentences draw from a disjoint lowercase
//! vocabulary, so the salient sentence is the unique best extract and its
//! option labels follow the rule type.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::rouge::{preprocess_tokens, PreprocessConfig};
use crate::rules::{extract_options, RuleId};
use crate::treebank::{parse_ptb, SentenceTree, Span};

/// Rules whose options the reference drops.
pub const DELETABLE_RULES: [RuleId; 4] = [
    RuleId::AppositiveNp,
    RuleId::RelativeClause,
    RuleId::AdjpInNp,
    RuleId::Parenthetical,
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub docs: usize,
    pub min_sents: usize,
    pub max_sents: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            docs: 200,
            min_sents: 5,
            max_sents: 8,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    pub doc: Document,
    /// Index of the sentence the reference was built from.
    pub salient: usize,
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 5] = ["", "n", "r", "l", "k"];

struct Vocabulary {
    names: Vec<String>,
    places: Vec<String>,
    kept: Vec<String>,
    dropped: Vec<String>,
    filler: Vec<String>,
}

impl Vocabulary {
    /// Pseudo-words with pairwise distinct stems, split into disjoint pools.
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let cfg = PreprocessConfig::oracle();
        let mut stems = HashSet::new();
        let mut words = Vec::new();
        while words.len() < 400 {
            let mut w = String::new();
            for _ in 0..2 {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
            }
            w.push_str(CODAS.choose(rng).unwrap());
            let stem = preprocess_tokens(&[w.as_str()], &cfg);
            if stem.len() == 1 && stems.insert(stem[0].clone()) {
                words.push(w);
            }
        }
        let capitalize = |w: &String| {
            let mut c = w.chars();
            let first = c.next().unwrap().to_uppercase();
            first.chain(c).collect::<String>()
        };
        let mut pools = words.chunks(80);
        let mut next = || pools.next().unwrap().to_vec();
        Vocabulary {
            names: next().iter().map(capitalize).collect(),
            places: next().iter().map(capitalize).collect(),
            kept: next(),
            dropped: next(),
            filler: next(),
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String]) -> &'a str {
    pool.choose(rng).unwrap()
}

fn salient_sentence(rng: &mut ChaCha8Rng, v: &Vocabulary) -> String {
    let name = format!(
        "(NP (NNP {}) (NNP {}))",
        pick(rng, &v.names),
        pick(rng, &v.names)
    );
    let subject = if rng.gen_bool(0.5) {
        format!(
            "(NP {name} (, ,) (NP (DT a) (NN {})) (, ,))",
            pick(rng, &v.dropped)
        )
    } else {
        name
    };
    let adj = if rng.gen_bool(0.6) {
        format!(" (JJ {})", pick(rng, &v.dropped))
    } else {
        String::new()
    };
    let mut object = format!("(NP (DT the){adj} (NN {}))", pick(rng, &v.kept));
    if rng.gen_bool(0.4) {
        object = format!(
            "(NP {object} (SBAR (WHNP (WDT that)) (S (VP (VBD {}) (NP (NN {}))))))",
            pick(rng, &v.dropped),
            pick(rng, &v.dropped)
        );
    }
    let mut vp = format!("(VBD {}) {object}", pick(rng, &v.kept));
    if rng.gen_bool(0.7) {
        vp.push_str(&format!(
            " (PP (IN in) (NP (NNP {})))",
            pick(rng, &v.places)
        ));
    }
    if rng.gen_bool(0.5) {
        vp.push_str(&format!(" (ADVP (RB {}))", pick(rng, &v.kept)));
    }
    if rng.gen_bool(0.4) {
        vp.push_str(&format!(
            " (PRN (-LRB- -LRB-) (NN {}) (-RRB- -RRB-))",
            pick(rng, &v.dropped)
        ));
    }
    format!("(S {subject} (VP {vp}) (. .))")
}

fn filler_sentence(rng: &mut ChaCha8Rng, v: &Vocabulary) -> String {
    let adj = if rng.gen_bool(0.5) {
        format!(" (JJ {})", pick(rng, &v.filler))
    } else {
        String::new()
    };
    let mut vp = format!(
        "(VBD {}) (NP (NN {}))",
        pick(rng, &v.filler),
        pick(rng, &v.filler)
    );
    if rng.gen_bool(0.5) {
        vp.push_str(&format!(
            " (PP (IN near) (NP (NN {})))",
            pick(rng, &v.filler)
        ));
    }
    if rng.gen_bool(0.3) {
        vp.push_str(&format!(" (ADVP (RB {}))", pick(rng, &v.filler)));
    }
    format!(
        "(S (NP (DT the){adj} (NN {})) (VP {vp}) (. .))",
        pick(rng, &v.filler)
    )
}

/// The sentence with its deletable-rule options removed.
pub fn reference_for(tree: &SentenceTree) -> Vec<String> {
    let spans: Vec<Span> = extract_options(tree)
        .into_iter()
        .filter(|o| DELETABLE_RULES.contains(&o.rule))
        .map(|o| o.span)
        .collect();
    tree.words()
        .iter()
        .enumerate()
        .filter(|(i, _)| !spans.iter().any(|s| s.contains_index(*i)))
        .map(|(_, w)| w.to_string())
        .collect()
}

pub fn generate(cfg: &SyntheticConfig) -> Vec<SyntheticDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::new(&mut rng);
    (0..cfg.docs)
        .map(|d| {
            let n = rng.gen_range(cfg.min_sents..=cfg.max_sents.max(cfg.min_sents));
            let salient = rng.gen_range(0..n);
            let sentences: Vec<SentenceTree> = (0..n)
                .map(|i| {
                    let text = if i == salient {
                        salient_sentence(&mut rng, &vocab)
                    } else {
                        filler_sentence(&mut rng, &vocab)
                    };
                    parse_ptb(&text).expect("generated trees are well formed")
                })
                .collect();
            let reference = vec![reference_for(&sentences[salient])];
            SyntheticDocument {
                doc: Document {
                    id: format!("syn-{d:04}"),
                    sentences,
                    reference,
                },
                salient,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{label_compressions, Label};

    #[test]
    fn deterministic() {
        let cfg = SyntheticConfig {
            docs: 5,
            ..Default::default()
        };
        assert_eq!(generate(&cfg), generate(&cfg));
    }

    #[test]
    fn labels_follow_rule_type() {
        let docs = generate(&SyntheticConfig {
            docs: 40,
            ..Default::default()
        });
        let mut seen = HashSet::new();
        for sd in &docs {
            let tree = &sd.doc.sentences[sd.salient];
            let reference = sd.doc.reference_tokens();
            let opts = extract_options(tree);
            for l in label_compressions(tree, &opts, &reference, &PreprocessConfig::oracle()) {
                seen.insert(l.option.rule);
                let expected = if DELETABLE_RULES.contains(&l.option.rule) {
                    Label::Del
                } else {
                    Label::Keep
                };
                assert_eq!(l.label, expected, "{} {:?}", sd.doc.id, l.option);
            }
        }
        for r in [
            RuleId::AppositiveNp,
            RuleId::RelativeClause,
            RuleId::AdjpInNp,
            RuleId::Parenthetical,
            RuleId::PpConfig,
            RuleId::Advp,
        ] {
            assert!(seen.contains(&r), "{r} never generated");
        }
    }
}
