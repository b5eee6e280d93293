//! Bracketed constituency trees.
//!
//! Trees are read from standard treebank notation, e.g.
//! `(S (NP (PRP He)) (VP (VBD ran)) (. .))`. Every node caches the half-open
//! token span it covers, which is what the compression rules match against.
//! Bracket tokens are stored unescaped (`(` rather than `-LRB-`); escaping
//! happens only in [`SentenceTree::to_bracketed`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end, "empty span [{start}, {end})");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn is_disjoint(&self, other: &Span) -> bool {
        self.end <= other.start || other.end <= self.start
    }

    /// True when the two spans are disjoint or one contains the other.
    pub fn nests_with(&self, other: &Span) -> bool {
        self.is_disjoint(other) || self.contains(other) || other.contains(self)
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if self.start < self.end && self.end <= len {
            Ok(())
        } else {
            Err(Error::InvalidSpan {
                start: self.start,
                end: self.end,
                len,
            })
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    label: String,
    children: Vec<TreeNode>,
    span: Span,
}

impl TreeNode {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The syntactic category with function tags and indices stripped
    /// (`NP-SBJ-1` becomes `NP`). Labels that start with a dash, such as
    /// `-LRB-`, are returned unchanged.
    pub fn category(&self) -> &str {
        category_of(&self.label)
    }

    pub fn children(&self) -> &[TreeNode] {
        &self.children
    }

    pub fn span(&self) -> Span {
        self.span
    }

    /// Preterminal nodes are the leaves of the tree; each covers one token.
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order traversal that hands each node its parent.
    pub fn walk<'a, F>(&'a self, f: &mut F)
    where
        F: FnMut(&'a TreeNode, Option<&'a TreeNode>),
    {
        fn go<'a, F>(node: &'a TreeNode, parent: Option<&'a TreeNode>, f: &mut F)
        where
            F: FnMut(&'a TreeNode, Option<&'a TreeNode>),
        {
            f(node, parent);
            for child in &node.children {
                go(child, Some(node), f);
            }
        }
        go(self, None, f)
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(TreeNode::leaf_count).sum()
        }
    }

    /// First preterminal in the subtree.
    pub fn first_leaf(&self) -> &TreeNode {
        match self.children.first() {
            Some(child) => child.first_leaf(),
            None => self,
        }
    }
}

pub(crate) fn category_of(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(0) | None => label,
        Some(i) => &label[..i],
    }
}

pub fn node_span(node: &TreeNode) -> Span {
    node.span()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceTree {
    root: TreeNode,
    tokens: Vec<Token>,
}

impl SentenceTree {
    pub fn parse(text: &str) -> Result<Self> {
        parse_ptb(text)
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.tokens[i].text
    }

    /// Tokens that survive the given deletions, in order.
    pub fn surviving_words(&self, deletions: &[Span]) -> Result<Vec<&str>> {
        check_nest_or_disjoint(deletions, self.len())?;
        Ok(self
            .tokens
            .iter()
            .filter(|t| !deletions.iter().any(|s| s.contains_index(t.index)))
            .map(|t| t.text.as_str())
            .collect())
    }

    pub fn render_with_deletions(&self, deletions: &[Span]) -> Result<String> {
        Ok(self.surviving_words(deletions)?.join(" "))
    }

    /// Serializes back to bracketed notation with bracket tokens escaped.
    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        self.write_node(&self.root, &mut out);
        out
    }

    fn write_node(&self, node: &TreeNode, out: &mut String) {
        out.push('(');
        out.push_str(&node.label);
        if node.is_leaf() {
            out.push(' ');
            out.push_str(escape_token(self.word(node.span.start)));
        } else {
            for child in &node.children {
                out.push(' ');
                self.write_node(child, out);
            }
        }
        out.push(')');
    }
}

pub fn render_with_deletions(tree: &SentenceTree, deletions: &[Span]) -> Result<String> {
    tree.render_with_deletions(deletions)
}

/// Validates a deletion set: every span lies inside the sentence and any two
/// spans are disjoint or nested.
pub fn check_nest_or_disjoint(spans: &[Span], len: usize) -> Result<()> {
    for s in spans {
        s.validate(len)?;
    }
    for (i, a) in spans.iter().enumerate() {
        for b in &spans[i + 1..] {
            if !a.nests_with(b) {
                return Err(Error::OverlappingSpans { a: *a, b: *b });
            }
        }
    }
    Ok(())
}

const ESCAPES: [(&str, &str); 6] = [
    ("-LRB-", "("),
    ("-RRB-", ")"),
    ("-LSB-", "["),
    ("-RSB-", "]"),
    ("-LCB-", "{"),
    ("-RCB-", "}"),
];

pub fn unescape_token(token: &str) -> &str {
    ESCAPES
        .iter()
        .find(|(esc, _)| *esc == token)
        .map_or(token, |(_, raw)| raw)
}

pub fn escape_token(token: &str) -> &str {
    ESCAPES
        .iter()
        .find(|(_, raw)| *raw == token)
        .map_or(token, |(esc, _)| esc)
}

// ---------------------------------------------------------------------------
// Reader

#[derive(Debug, PartialEq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

/// Splits bracketed text into lexemes tagged with their character offset.
fn lex(text: &str) -> Vec<(usize, Lexeme<'_>)> {
    let mut out = Vec::new();
    let mut atom_start: Option<(usize, usize)> = None;
    for (chars, (byte, c)) in text.char_indices().enumerate() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some((b, ch)) = atom_start.take() {
                out.push((ch, Lexeme::Atom(&text[b..byte])));
            }
            match c {
                '(' => out.push((chars, Lexeme::Open)),
                ')' => out.push((chars, Lexeme::Close)),
                _ => {}
            }
        } else if atom_start.is_none() {
            atom_start = Some((byte, chars));
        }
    }
    if let Some((b, ch)) = atom_start {
        out.push((ch, Lexeme::Atom(&text[b..])));
    }
    out
}

enum Raw {
    Node {
        label: Option<String>,
        offset: usize,
        children: Vec<Raw>,
    },
    Word(String),
}

struct Open {
    label: Option<String>,
    offset: usize,
    children: Vec<Raw>,
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

/// Reads one bracketed tree.
///
/// A single unlabeled outer wrapper, `( (S ...) )`, is removed. Empty
/// elements (`-NONE-`) are dropped together with any constituent that is left
/// without children.
pub fn parse_ptb(text: &str) -> Result<SentenceTree> {
    let lexemes = lex(text);
    if lexemes.is_empty() {
        return Err(parse_error(0, "empty input"));
    }

    let mut stack: Vec<Open> = Vec::new();
    let mut root: Option<Raw> = None;
    let mut iter = lexemes.into_iter().peekable();
    while let Some((offset, lexeme)) = iter.next() {
        if root.is_some() {
            return Err(parse_error(offset, "trailing content after tree"));
        }
        match lexeme {
            Lexeme::Open => {
                let label = match iter.peek() {
                    Some((_, Lexeme::Atom(a))) => {
                        let a = a.to_string();
                        iter.next();
                        Some(a)
                    }
                    _ => None,
                };
                stack.push(Open {
                    label,
                    offset,
                    children: Vec::new(),
                });
            }
            Lexeme::Atom(word) => match stack.last_mut() {
                Some(top) => top
                    .children
                    .push(Raw::Word(unescape_token(word).to_string())),
                None => return Err(parse_error(offset, "token outside of brackets")),
            },
            Lexeme::Close => {
                let node = stack
                    .pop()
                    .ok_or_else(|| parse_error(offset, "unbalanced closing bracket"))?;
                if node.children.is_empty() {
                    return Err(parse_error(node.offset, "node without children"));
                }
                let raw = Raw::Node {
                    label: node.label,
                    offset: node.offset,
                    children: node.children,
                };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(raw),
                    None => root = Some(raw),
                }
            }
        }
    }
    if let Some(open) = stack.last() {
        return Err(parse_error(open.offset, "unclosed bracket"));
    }
    let root = match root {
        Some(r) => r,
        None => return Err(parse_error(0, "input contains no bracketed tree")),
    };

    let root = unwrap_root(root)?;
    let root = strip_empty(root).ok_or_else(|| parse_error(0, "tree has no tokens"))?;

    let mut tokens = Vec::new();
    let root = build(root, &mut tokens)?;
    Ok(SentenceTree { root, tokens })
}

fn unwrap_root(root: Raw) -> Result<Raw> {
    match root {
        Raw::Node {
            label: None,
            offset,
            mut children,
        } => {
            if children.len() == 1 {
                match children.pop() {
                    Some(inner @ Raw::Node { .. }) => Ok(inner),
                    _ => Err(parse_error(offset, "unlabeled node with a bare token")),
                }
            } else {
                Ok(Raw::Node {
                    label: Some("ROOT".to_string()),
                    offset,
                    children,
                })
            }
        }
        other => Ok(other),
    }
}

fn strip_empty(raw: Raw) -> Option<Raw> {
    match raw {
        Raw::Node {
            label,
            offset,
            children,
        } => {
            if label.as_deref() == Some("-NONE-") {
                return None;
            }
            let children: Vec<Raw> = children.into_iter().filter_map(strip_empty).collect();
            if children.is_empty() {
                None
            } else {
                Some(Raw::Node {
                    label,
                    offset,
                    children,
                })
            }
        }
        word => Some(word),
    }
}

fn build(raw: Raw, tokens: &mut Vec<Token>) -> Result<TreeNode> {
    let (label, offset, children) = match raw {
        Raw::Node {
            label,
            offset,
            children,
        } => (label, offset, children),
        Raw::Word(_) => unreachable!("words are consumed by their preterminal"),
    };
    let label = label.ok_or_else(|| parse_error(offset, "unlabeled internal node"))?;
    let words = children
        .iter()
        .filter(|c| matches!(c, Raw::Word(_)))
        .count();
    if words > 0 {
        if children.len() != 1 {
            return Err(parse_error(
                offset,
                "a preterminal must dominate exactly one token",
            ));
        }
        let text = match children.into_iter().next() {
            Some(Raw::Word(w)) => w,
            _ => unreachable!(),
        };
        let index = tokens.len();
        tokens.push(Token { text, index });
        return Ok(TreeNode {
            label,
            children: Vec::new(),
            span: Span::new(index, index + 1),
        });
    }
    let start = tokens.len();
    let children = children
        .into_iter()
        .map(|c| build(c, tokens))
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeNode {
        label,
        children,
        span: Span::new(start, tokens.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(label: &str, i: usize) -> TreeNode {
        TreeNode {
            label: label.to_string(),
            children: vec![],
            span: Span::new(i, i + 1),
        }
    }

    fn node(label: &str, children: Vec<TreeNode>) -> TreeNode {
        let span = Span::new(
            children.first().unwrap().span.start,
            children.last().unwrap().span.end,
        );
        TreeNode {
            label: label.to_string(),
            children,
            span,
        }
    }

    #[test]
    fn two_leaf_np() {
        let t = parse_ptb("(NP (DT the) (NN cat))").unwrap();
        assert_eq!(t.root().label(), "NP");
        assert_eq!(t.root().span(), Span::new(0, 2));
        assert_eq!(t.words(), vec!["the", "cat"]);
    }

    #[test]
    fn spans_follow_leaf_order() {
        let t = parse_ptb("(S (NP (PRP He)) (VP (VBD ran)))").unwrap();
        let root = t.root();
        assert_eq!(root.span(), Span::new(0, 2));
        assert_eq!(node_span(&root.children()[0]), Span::new(0, 1));
        assert_eq!(node_span(&root.children()[1]), Span::new(1, 2));
    }

    #[test]
    fn leaf_and_root_spans() {
        let t = parse_ptb("(S (NP (DT a) (NN b) (NN c)) (VP (VBD d) (NP (NN e))))").unwrap();
        let mut leaves = vec![];
        t.root().walk(&mut |n, _| {
            if n.is_leaf() {
                leaves.push(n.span())
            }
        });
        assert_eq!(leaves[3], Span::new(3, 4));
        assert_eq!(t.root().span(), Span::new(0, t.len()));
    }

    #[test]
    fn wrapper_is_unwrapped() {
        // Hand-built expected trees for five wrapped fixtures.
        let cases: Vec<(&str, TreeNode)> = vec![
            (
                "((S (NP (PRP He)) (VP (VBD ran))))",
                node(
                    "S",
                    vec![
                        node("NP", vec![leaf("PRP", 0)]),
                        node("VP", vec![leaf("VBD", 1)]),
                    ],
                ),
            ),
            (
                "( (NP (DT the) (NN cat)) )",
                node("NP", vec![leaf("DT", 0), leaf("NN", 1)]),
            ),
            ("((FRAG (NN x)))", node("FRAG", vec![leaf("NN", 0)])),
            (
                "(\n  (S\n    (NP (NNP Ann))\n    (VP (VBZ sings))\n    (. .)))",
                node(
                    "S",
                    vec![
                        node("NP", vec![leaf("NNP", 0)]),
                        node("VP", vec![leaf("VBZ", 1)]),
                        leaf(".", 2),
                    ],
                ),
            ),
            (
                "((NP (NP (NN a)) (PP (IN of) (NP (NN b)))))",
                node(
                    "NP",
                    vec![
                        node("NP", vec![leaf("NN", 0)]),
                        node("PP", vec![leaf("IN", 1), node("NP", vec![leaf("NN", 2)])]),
                    ],
                ),
            ),
        ];
        for (text, expected) in cases {
            let wrapped = parse_ptb(text).unwrap();
            assert_eq!(wrapped.root(), &expected, "{text}");
            let inner = parse_ptb(&wrapped.to_bracketed()).unwrap();
            assert_eq!(inner, wrapped);
        }
    }

    #[test]
    fn bracket_tokens_are_unescaped() {
        let t = parse_ptb("(NP (NN x) (PRN (-LRB- -LRB-) (NN y) (-RRB- -RRB-)))").unwrap();
        assert_eq!(t.words(), vec!["x", "(", "y", ")"]);
        let prn = &t.root().children()[1];
        assert_eq!(prn.children()[0].label(), "-LRB-");
        assert_eq!(prn.children()[0].category(), "-LRB-");
        assert!(t.to_bracketed().contains("(-LRB- -LRB-)"));
    }

    #[test]
    fn function_tags_are_stripped_from_category() {
        assert_eq!(category_of("NP-SBJ-1"), "NP");
        assert_eq!(category_of("NP=2"), "NP");
        assert_eq!(category_of("PRP$"), "PRP$");
        assert_eq!(category_of("-NONE-"), "-NONE-");
    }

    #[test]
    fn empty_elements_are_dropped() {
        let t = parse_ptb("(S (NP (-NONE- *T*)) (VP (VBD left)))").unwrap();
        assert_eq!(t.words(), vec!["left"]);
        assert_eq!(t.root().children().len(), 1);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_ptb("") {
            Err(Error::Parse { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_ptb("   \n") {
            Err(Error::Parse { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_ptb("(S (NP (DT the) (NN cat))") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        match parse_ptb("(NP (DT the)))") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("{other:?}"),
        }
        assert!(parse_ptb("(NP )").is_err());
        assert!(parse_ptb("(NP (DT the) cat)").is_err());
        assert!(parse_ptb("(NP (DT a b))").is_err());
        assert!(parse_ptb("(NP (DT a)) (NP (DT b))").is_err());
    }

    #[test]
    fn render_identity_and_deletion() {
        let t = parse_ptb("(S (NN a) (NN b) (NN c))").unwrap();
        assert_eq!(t.render_with_deletions(&[]).unwrap(), "a b c");
        assert_eq!(t.render_with_deletions(&[Span::new(1, 2)]).unwrap(), "a c");
        assert_eq!(t.render_with_deletions(&[Span::new(0, 3)]).unwrap(), "");
    }

    #[test]
    fn render_nested_deletions() {
        let t = parse_ptb("(S (NN a) (NN b) (NN c) (NN d) (NN e))").unwrap();
        let out = t
            .render_with_deletions(&[Span::new(1, 4), Span::new(2, 3)])
            .unwrap();
        assert_eq!(out, "a e");
    }

    #[test]
    fn render_rejects_partial_overlap_and_bad_spans() {
        let t = parse_ptb("(S (NN a) (NN b) (NN c) (NN d))").unwrap();
        assert!(matches!(
            t.render_with_deletions(&[Span::new(0, 2), Span::new(1, 3)]),
            Err(Error::OverlappingSpans { .. })
        ));
        assert!(matches!(
            t.render_with_deletions(&[Span { start: 2, end: 9 }]),
            Err(Error::InvalidSpan { .. })
        ));
        assert!(matches!(
            t.render_with_deletions(&[Span { start: 2, end: 2 }]),
            Err(Error::InvalidSpan { .. })
        ));
    }
}
