//! JSONL corpus ingestion.
//!
//! One document per line:
//!
//! ```json
//! {"id": "d1",
//!  "sentences": [{"tokens": ["He", "ran", "."], "parse": "(S (NP (PRP He)) (VP (VBD ran)) (. .))"}],
//!  "reference": [["He", "ran", "."]]}
//! ```
//!
//! `reference` may be omitted for inference-only corpora.

use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::{escape_token, parse_ptb, unescape_token, SentenceTree};

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<SentenceTree>,
    /// Reference summary, one token list per sentence.
    pub reference: Vec<Vec<String>>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn has_reference(&self) -> bool {
        self.reference.iter().any(|s| !s.is_empty())
    }

    /// The reference flattened into one token sequence.
    pub fn reference_tokens(&self) -> Vec<&str> {
        self.reference
            .iter()
            .flat_map(|s| s.iter().map(String::as_str))
            .collect()
    }

    pub fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            id: self.id.clone(),
            sentences: self
                .sentences
                .iter()
                .map(|t| SentenceRecord {
                    tokens: t
                        .words()
                        .into_iter()
                        .map(|w| escape_token(w).to_string())
                        .collect(),
                    parse: t.to_bracketed(),
                })
                .collect(),
            reference: self.reference.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceRecord {
    pub tokens: Vec<String>,
    pub parse: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub id: String,
    pub sentences: Vec<SentenceRecord>,
    #[serde(default)]
    pub reference: Vec<Vec<String>>,
}

impl DocumentRecord {
    pub fn into_document(self) -> Result<Document> {
        if self.sentences.is_empty() {
            return Err(Error::Config(format!(
                "document {} has no sentences",
                self.id
            )));
        }
        let mut sentences = Vec::with_capacity(self.sentences.len());
        for (i, s) in self.sentences.into_iter().enumerate() {
            let tree = parse_ptb(&s.parse)?;
            let same = tree.len() == s.tokens.len()
                && tree
                    .words()
                    .iter()
                    .zip(&s.tokens)
                    .all(|(leaf, tok)| *leaf == unescape_token(tok));
            if !same {
                return Err(Error::TokenMismatch {
                    doc_id: self.id,
                    sent_index: i,
                });
            }
            sentences.push(tree);
        }
        let reference = self
            .reference
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .map(|t| unescape_token(&t).to_string())
                    .collect()
            })
            .collect();
        Ok(Document {
            id: self.id,
            sentences,
            reference,
        })
    }
}

/// Parses one corpus line. Errors carry the 1-based line number, except
/// token/leaf mismatches, which name the document instead.
pub fn parse_line(line: &str, line_no: usize) -> Result<Document> {
    let record: DocumentRecord = serde_json::from_str(line).map_err(|e| Error::CorpusLine {
        line: line_no,
        message: e.to_string(),
    })?;
    record.into_document().map_err(|e| match e {
        e @ Error::TokenMismatch { .. } => e,
        other => Error::CorpusLine {
            line: line_no,
            message: other.to_string(),
        },
    })
}

/// Streams documents from a JSONL file. Bad records surface as `Err` items
/// and do not stop the stream.
pub struct CorpusReader<R> {
    lines: Lines<R>,
    line_no: usize,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line_no += 1;
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(Error::CorpusLine {
                        line: self.line_no,
                        message: e.to_string(),
                    }))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(parse_line(&line, self.line_no));
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if file.metadata().map(|m| m.len() == 0).unwrap_or(false) {
        log::warn!("{}: corpus file is empty", path.display());
    }
    Ok(CorpusReader::new(BufReader::new(file)))
}

/// Loads every valid document, collecting per-record errors separately.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<(Vec<Document>, Vec<Error>)> {
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for item in load_corpus(path)? {
        match item {
            Ok(d) => docs.push(d),
            Err(e) => {
                log::warn!("skipping record: {e}");
                errors.push(e)
            }
        }
    }
    Ok((docs, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"id":"a","sentences":[{"tokens":["He","ran","-LRB-","x","-RRB-"],"parse":"(S (NP (PRP He)) (VP (VBD ran)) (PRN (-LRB- -LRB-) (NN x) (-RRB- -RRB-)))"}],"reference":[["He","ran"]]}"#;

    #[test]
    fn parses_a_record() {
        let d = parse_line(GOOD, 1).unwrap();
        assert_eq!(d.id, "a");
        assert_eq!(d.sentences[0].words(), vec!["He", "ran", "(", "x", ")"]);
        assert_eq!(d.reference_tokens(), vec!["He", "ran"]);
        let again = d.to_record().into_document().unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn mismatch_names_the_document() {
        let bad = GOOD.replace("\"ran\",", "\"walked\",");
        match parse_line(&bad, 4) {
            Err(Error::TokenMismatch { doc_id, sent_index }) => {
                assert_eq!(doc_id, "a");
                assert_eq!(sent_index, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_json_names_the_line() {
        match parse_line("{\"id\": ", 7) {
            Err(Error::CorpusLine { line: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reader_skips_blank_lines_and_continues_after_errors() {
        let bad = GOOD.replace("\"ran\",", "\"walked\",");
        let text = format!("{GOOD}\n\n{bad}\n{}\n", GOOD.replace("\"a\"", "\"b\""));
        let items: Vec<_> = CorpusReader::new(text.as_bytes()).collect();
        assert_eq!(items.len(), 3);
        assert!(items[0].is_ok());
        assert!(items[1].is_err());
        assert_eq!(items[2].as_ref().unwrap().id, "b");
    }

    #[test]
    fn reference_is_optional() {
        let text = r#"{"id":"x","sentences":[{"tokens":["Hi"],"parse":"(INTJ (UH Hi))"}]}"#;
        let d = parse_line(text, 1).unwrap();
        assert!(!d.has_reference());
    }
}
