//! Syntactic compression options.
//!
//! Each option is a deletable token span licensed by one tree pattern. The
//! patterns cover appositives, relative and adverbial clauses, adjectival
//! pre-modifiers, adverbials, gerundive noun modifiers, adjunct prepositional
//! phrases and parentheticals. Options returned by [`extract_options`] are
//! pairwise nested or disjoint, so any subset of them can be deleted at once.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::{SentenceTree, Span, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleId {
    AppositiveNp,
    RelativeClause,
    AdverbialClause,
    AdjpInNp,
    Advp,
    GerundiveVpInNp,
    PpConfig,
    Parenthetical,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::AppositiveNp,
        RuleId::RelativeClause,
        RuleId::AdverbialClause,
        RuleId::AdjpInNp,
        RuleId::Advp,
        RuleId::GerundiveVpInNp,
        RuleId::PpConfig,
        RuleId::Parenthetical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::AppositiveNp => "APPOSITIVE_NP",
            RuleId::RelativeClause => "RELATIVE_CLAUSE",
            RuleId::AdverbialClause => "ADVERBIAL_CLAUSE",
            RuleId::AdjpInNp => "ADJP_IN_NP",
            RuleId::Advp => "ADVP",
            RuleId::GerundiveVpInNp => "GERUNDIVE_VP_IN_NP",
            RuleId::PpConfig => "PP_CONFIG",
            RuleId::Parenthetical => "PARENTHETICAL",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown rule id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionOption {
    pub span: Span,
    pub rule: RuleId,
    /// Category of the matched node, e.g. `PP` or `JJ`.
    pub node_label: String,
    /// Whether adjacent commas or brackets were absorbed into the span.
    pub include_boundary_punct: bool,
}

/// Prepositions whose phrases are treated as deletable adjuncts wherever
/// they attach to a clause or verb phrase.
pub const DEFAULT_ADJUNCT_PREPOSITIONS: [&str; 14] = [
    "on",
    "in",
    "at",
    "by",
    "during",
    "after",
    "before",
    "over",
    "under",
    "near",
    "since",
    "until",
    "within",
    "throughout",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub adjunct_prepositions: BTreeSet<String>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            adjunct_prepositions: DEFAULT_ADJUNCT_PREPOSITIONS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

pub fn extract_options(tree: &SentenceTree) -> Vec<CompressionOption> {
    extract_options_with(tree, &RuleConfig::default())
}

pub fn extract_options_with(tree: &SentenceTree, cfg: &RuleConfig) -> Vec<CompressionOption> {
    let mut candidates = Vec::new();
    tree.root().walk(&mut |node, parent| {
        if let Some(parent) = parent {
            match_node(tree, cfg, node, parent, &mut candidates);
        }
        match_bracket_runs(node, tree, &mut candidates);
    });

    resolve_punctuation_conflicts(&mut candidates);

    let mut options: Vec<CompressionOption> = candidates.into_iter().map(|c| c.option).collect();
    options.sort_by_key(|o| (o.span.start, std::cmp::Reverse(o.span.len()), o.rule));
    options.dedup_by_key(|o| o.span);
    options.retain(|o| o.span != Span::new(0, tree.len()));
    options
}

/// Drops whole-sentence options and verifies the nest-or-disjoint property.
pub fn normalize_options(
    options: Vec<CompressionOption>,
    sentence_len: usize,
) -> Result<Vec<CompressionOption>> {
    let options: Vec<CompressionOption> = options
        .into_iter()
        .filter(|o| !(o.span.start == 0 && o.span.end == sentence_len))
        .collect();
    for (i, a) in options.iter().enumerate() {
        a.span.validate(sentence_len)?;
        for b in &options[i + 1..] {
            if !a.span.nests_with(&b.span) {
                return Err(Error::OptionOverlap {
                    a: a.span,
                    b: b.span,
                });
            }
        }
    }
    Ok(options)
}

struct Candidate {
    option: CompressionOption,
    /// The bare constituent (or bracketed run) without absorbed punctuation.
    core: Span,
}

fn candidate(node: &TreeNode, rule: RuleId) -> Candidate {
    Candidate {
        option: CompressionOption {
            span: node.span(),
            rule,
            node_label: node.category().to_string(),
            include_boundary_punct: false,
        },
        core: node.span(),
    }
}

const WH_TAGS: [&str; 4] = ["WDT", "WP", "WP$", "WRB"];
const WH_PHRASES: [&str; 3] = ["WHNP", "WHADVP", "WHPP"];
const ADJ_TAGS: [&str; 3] = ["JJ", "JJR", "JJS"];
const NOMINAL: [&str; 9] = ["NN", "NNS", "NNP", "NNPS", "NX", "NP", "PRP", "CD", "FW"];
const VERBAL: [&str; 9] = ["VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD", "TO", "VP"];
/// Complementizers introduce argument clauses, which are not deletable.
const COMPLEMENTIZERS: [&str; 2] = ["that", "whether"];

fn is_comma(node: &TreeNode) -> bool {
    node.is_leaf() && node.category() == ","
}

fn is_open_bracket(node: &TreeNode, tree: &SentenceTree) -> bool {
    node.is_leaf()
        && (node.category() == "-LRB-" || matches!(tree.word(node.span().start), "(" | "[" | "{"))
}

fn is_close_bracket(node: &TreeNode, tree: &SentenceTree) -> bool {
    node.is_leaf()
        && (node.category() == "-RRB-" || matches!(tree.word(node.span().start), ")" | "]" | "}"))
}

/// Rightmost nominal child, or the last child when none is nominal.
fn np_head_index(np: &TreeNode) -> usize {
    let children = np.children();
    children
        .iter()
        .rposition(|c| NOMINAL.contains(&c.category()))
        .unwrap_or(children.len() - 1)
}

fn head_preposition(pp: &TreeNode, tree: &SentenceTree) -> String {
    let head = pp
        .children()
        .iter()
        .find(|c| c.is_leaf() && matches!(c.category(), "IN" | "TO"))
        .unwrap_or_else(|| pp.first_leaf());
    tree.word(head.span().start).to_lowercase()
}

fn match_node(
    tree: &SentenceTree,
    cfg: &RuleConfig,
    node: &TreeNode,
    parent: &TreeNode,
    out: &mut Vec<Candidate>,
) {
    let siblings = parent.children();
    let idx = siblings
        .iter()
        .position(|s| std::ptr::eq(s, node))
        .expect("node is a child of its parent");
    let pcat = parent.category();
    let cat = node.category();

    match cat {
        "NP" if matches!(pcat, "NP" | "S") => {
            let left_comma = idx >= 2 && is_comma(&siblings[idx - 1]);
            let renames_np = left_comma && siblings[idx - 2].category() == "NP";
            let right_ok = idx + 1 == siblings.len() || is_comma(&siblings[idx + 1]);
            let coordinated = siblings
                .iter()
                .any(|s| matches!(s.category(), "CC" | "CONJP"));
            if renames_np && right_ok && !coordinated {
                let mut c = candidate(node, RuleId::AppositiveNp);
                c.option.span.start = siblings[idx - 1].span().start;
                if idx + 1 < siblings.len() {
                    c.option.span.end = siblings[idx + 1].span().end;
                }
                c.option.include_boundary_punct = true;
                out.push(c);
            }
        }
        "SBAR" if pcat == "NP" => {
            let first = node.first_leaf();
            let wh_leaf = WH_TAGS.contains(&first.category());
            let wh_phrase = WH_PHRASES.contains(&node.children()[0].category());
            if wh_leaf || wh_phrase {
                out.push(absorb_commas(
                    candidate(node, RuleId::RelativeClause),
                    siblings,
                    idx,
                ));
            }
        }
        "SBAR" if matches!(pcat, "S" | "VP") => {
            let first = &node.children()[0];
            if first.is_leaf() && first.category() == "IN" {
                let word = tree.word(first.span().start).to_lowercase();
                if !COMPLEMENTIZERS.contains(&word.as_str()) {
                    out.push(absorb_commas(
                        candidate(node, RuleId::AdverbialClause),
                        siblings,
                        idx,
                    ));
                }
            }
        }
        "ADJP" if pcat == "NP" && idx < np_head_index(parent) => {
            out.push(candidate(node, RuleId::AdjpInNp));
        }
        c if pcat == "NP" && node.is_leaf() && ADJ_TAGS.contains(&c) => {
            if idx < np_head_index(parent) {
                out.push(candidate(node, RuleId::AdjpInNp));
            }
        }
        "ADVP" if matches!(pcat, "S" | "VP") => {
            out.push(absorb_commas(candidate(node, RuleId::Advp), siblings, idx));
        }
        "RB" if pcat == "VP" && node.is_leaf() => {
            let first_verb = siblings
                .iter()
                .position(|s| VERBAL.contains(&s.category()))
                .unwrap_or(siblings.len());
            if idx < first_verb {
                out.push(absorb_commas(candidate(node, RuleId::Advp), siblings, idx));
            }
        }
        "VP" if pcat == "NP" => {
            let head = node
                .children()
                .iter()
                .find(|c| c.is_leaf() && c.category().starts_with("VB"));
            if head.is_some_and(|h| h.category() == "VBG") {
                out.push(absorb_commas(
                    candidate(node, RuleId::GerundiveVpInNp),
                    siblings,
                    idx,
                ));
            }
        }
        "PP" if matches!(pcat, "S" | "VP") => {
            let object_follows = siblings[idx + 1..].iter().any(|s| s.category() == "NP");
            let adjunct_prep = cfg
                .adjunct_prepositions
                .contains(&head_preposition(node, tree));
            if !object_follows || adjunct_prep {
                out.push(absorb_commas(
                    candidate(node, RuleId::PpConfig),
                    siblings,
                    idx,
                ));
            }
        }
        "PRN" => out.push(candidate(node, RuleId::Parenthetical)),
        _ => {}
    }
}

/// Absorbs the comma to the left of a clause-level option, else the one to
/// its right. When the option is flanked by commas on both sides, both go.
fn absorb_commas(mut c: Candidate, siblings: &[TreeNode], idx: usize) -> Candidate {
    let left = idx > 0 && is_comma(&siblings[idx - 1]);
    let right = idx + 1 < siblings.len() && is_comma(&siblings[idx + 1]);
    if left {
        c.option.span.start = siblings[idx - 1].span().start;
    }
    if right {
        c.option.span.end = siblings[idx + 1].span().end;
    }
    c.option.include_boundary_punct = left || right;
    c
}

/// A bracketed run of siblings, `( ... )`, brackets included.
fn match_bracket_runs(parent: &TreeNode, tree: &SentenceTree, out: &mut Vec<Candidate>) {
    let children = parent.children();
    let mut i = 0;
    while i < children.len() {
        if is_open_bracket(&children[i], tree) {
            if let Some(off) = children[i + 1..]
                .iter()
                .position(|c| is_close_bracket(c, tree))
            {
                let j = i + 1 + off;
                if j > i + 1 {
                    let span = Span::new(children[i].span().start, children[j].span().end);
                    out.push(Candidate {
                        option: CompressionOption {
                            span,
                            rule: RuleId::Parenthetical,
                            node_label: "PRN".to_string(),
                            include_boundary_punct: true,
                        },
                        core: span,
                    });
                }
                i = j;
            }
        }
        i += 1;
    }
}

/// Absorbed punctuation can make two options overlap without nesting. Such
/// options fall back to their bare constituent span until no conflict is
/// left; bare constituents always nest.
fn resolve_punctuation_conflicts(candidates: &mut [Candidate]) {
    loop {
        let mut changed = false;
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                let (a, b) = (candidates[i].option.span, candidates[j].option.span);
                if a.nests_with(&b) {
                    continue;
                }
                for k in [i, j] {
                    let c = &mut candidates[k];
                    if c.option.span != c.core {
                        c.option.span = c.core;
                        c.option.include_boundary_punct = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_ptb;

    fn spans(parse: &str) -> Vec<(usize, usize, RuleId)> {
        let t = parse_ptb(parse).unwrap();
        extract_options(&t)
            .into_iter()
            .map(|o| (o.span.start, o.span.end, o.rule))
            .collect()
    }

    #[test]
    fn nothing_to_compress() {
        assert!(spans("(S (NP (PRP He)) (VP (VBD ran)))").is_empty());
    }

    #[test]
    fn flat_appositive_absorbs_both_commas() {
        let opts = spans("(S (NP (NN John)) (, ,) (NP (DT a) (NN doctor)) (, ,) (VP (VBD spoke)))");
        assert_eq!(opts, vec![(1, 5, RuleId::AppositiveNp)]);
    }

    #[test]
    fn coordination_is_not_apposition() {
        let opts = spans(
            "(S (NP (NP (NNS apples)) (, ,) (NP (NNS pears)) (, ,) (CC and) (NP (NNS plums))) (VP (VBD fell)))",
        );
        assert!(opts.is_empty(), "{opts:?}");
    }

    #[test]
    fn complement_clause_is_kept() {
        let opts = spans(
            "(S (NP (PRP He)) (VP (VBD said) (SBAR (IN that) (S (NP (PRP she)) (VP (VBD left))))))",
        );
        assert!(opts.is_empty(), "{opts:?}");
    }

    #[test]
    fn adjective_head_is_not_an_option() {
        let opts = spans("(S (NP (DT the) (JJ rich)) (VP (VBD left)))");
        assert!(opts.is_empty(), "{opts:?}");
    }

    #[test]
    fn pp_before_object_needs_adjunct_preposition() {
        // "to" is not an adjunct preposition and an NP object follows.
        let kept =
            spans("(S (NP (PRP He)) (VP (VBD gave) (PP (TO to) (NP (PRP her))) (NP (NNS books))))");
        assert!(kept.is_empty(), "{kept:?}");
        let cfg = RuleConfig {
            adjunct_prepositions: ["to".to_string()].into_iter().collect(),
        };
        let t = parse_ptb(
            "(S (NP (PRP He)) (VP (VBD gave) (PP (TO to) (NP (PRP her))) (NP (NNS books))))",
        )
        .unwrap();
        let opts = extract_options_with(&t, &cfg);
        assert_eq!(opts.len(), 1);
        assert_eq!(opts[0].span, Span::new(2, 4));
    }

    #[test]
    fn shared_comma_conflict_falls_back_to_core() {
        // The adverbial clause wants the comma at 3, the ADVP wants 3 and 5.
        let t = parse_ptb(
            "(S (SBAR (IN if) (S (NP (PRP it)) (VP (VBZ rains)))) (, ,) (ADVP (RB however)) (, ,) (NP (PRP we)) (VP (VBP stay)))",
        )
        .unwrap();
        let opts = extract_options(&t);
        normalize_options(opts.clone(), t.len()).unwrap();
        let got: Vec<_> = opts.iter().map(|o| (o.span.start, o.span.end)).collect();
        assert_eq!(got, vec![(0, 3), (4, 5)]);
        assert!(opts.iter().all(|o| !o.include_boundary_punct));
    }

    #[test]
    fn bracket_run_without_prn() {
        let opts = spans(
            "(S (NP (NNP Kabul) (-LRB- -LRB-) (NNP Afghanistan) (-RRB- -RRB-)) (VP (VBD fell)))",
        );
        assert_eq!(opts, vec![(1, 4, RuleId::Parenthetical)]);
    }

    #[test]
    fn normalize_drops_whole_sentence_and_rejects_overlap() {
        assert!(normalize_options(vec![], 3).unwrap().is_empty());
        let whole = CompressionOption {
            span: Span::new(0, 3),
            rule: RuleId::PpConfig,
            node_label: "PP".into(),
            include_boundary_punct: false,
        };
        assert!(normalize_options(vec![whole.clone()], 3)
            .unwrap()
            .is_empty());
        let a = CompressionOption {
            span: Span::new(0, 2),
            ..whole.clone()
        };
        let b = CompressionOption {
            span: Span::new(1, 3),
            ..whole
        };
        assert!(matches!(
            normalize_options(vec![a, b], 4),
            Err(Error::OptionOverlap { .. })
        ));
    }

    #[test]
    fn rule_ids_round_trip_through_strings() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
            assert_eq!(
                serde_json::to_string(&r).unwrap(),
                format!("\"{}\"", r.as_str())
            );
        }
    }
}
