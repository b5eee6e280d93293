use std::collections::BTreeSet;

use compsum::rules::{extract_options, RuleId};
use compsum::treebank::{check_nest_or_disjoint, parse_ptb};
use serde::Deserialize;

#[derive(Deserialize)]
struct Fixture {
    name: String,
    parse: String,
    gold: Vec<(usize, usize, String)>,
}

fn fixtures() -> Vec<Fixture> {
    let text = include_str!("fixtures/rules.json");
    serde_json::from_str(text).unwrap()
}

#[test]
fn gold_spans_match_exactly() {
    for f in fixtures() {
        let tree = parse_ptb(&f.parse).unwrap();
        let got: Vec<(usize, usize, String)> = extract_options(&tree)
            .into_iter()
            .map(|o| (o.span.start, o.span.end, o.rule.to_string()))
            .collect();
        assert_eq!(got, f.gold, "fixture {}", f.name);
    }
}

#[test]
fn every_rule_is_covered() {
    let seen: BTreeSet<RuleId> = fixtures()
        .iter()
        .flat_map(|f| f.gold.iter().map(|g| g.2.parse::<RuleId>().unwrap()))
        .collect();
    assert_eq!(seen.len(), RuleId::ALL.len());
}

#[test]
fn portraits_sentence_has_the_four_named_options() {
    let f = fixtures()
        .into_iter()
        .find(|f| f.name == "portraits")
        .unwrap();
    let tree = parse_ptb(&f.parse).unwrap();
    let texts: Vec<String> = extract_options(&tree)
        .iter()
        .map(|o| tree.words()[o.span.start..o.span.end].join(" "))
        .collect();
    for want in [
        "intimate",
        "well-known",
        "with their furry friends",
        "featuring well-known artists with their furry friends",
    ] {
        assert!(
            texts.iter().any(|t| t == want),
            "missing {want:?} in {texts:?}"
        );
    }
}

#[test]
fn fixture_options_nest_or_are_disjoint() {
    for f in fixtures() {
        let tree = parse_ptb(&f.parse).unwrap();
        let spans: Vec<_> = extract_options(&tree).iter().map(|o| o.span).collect();
        check_nest_or_disjoint(&spans, tree.len()).unwrap();
    }
}
