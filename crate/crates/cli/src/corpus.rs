//! Whitespace-tokenized text corpora mapped to fixed-length id sequences.

use std::collections::HashMap;
use std::path::Path;

use seqgan_core::generator::Sequence;

use crate::error::{CliError, Result};

pub const UNK: &str = "<unk>";

/// Token strings by id. Id 0 is the unknown token; the generator's start
/// symbol lives past the end of the output vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusVocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl CorpusVocab {
    pub const UNK_ID: usize = 0;

    /// Frequency-ordered, ties broken lexicographically.
    pub fn build<'a>(lines: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for line in lines {
            for tok in line.split_whitespace().filter(|t| *t != UNK) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut by_freq: Vec<(&str, usize)> = counts.into_iter().collect();
        by_freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Self::from_tokens(std::iter::once(UNK).chain(by_freq.into_iter().map(|(t, _)| t)).map(String::from).collect())
    }

    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }

    /// Reads a vocabulary written by [`to_text`](Self::to_text).
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
        if tokens.first().map(String::as_str) != Some(UNK) {
            return Err(CliError::Data(format!("vocabulary must start with {UNK}")));
        }
        let v = Self::from_tokens(tokens);
        if v.index.len() != v.tokens.len() {
            return Err(CliError::Data("vocabulary has duplicate tokens".into()));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn decode(&self, seq: &Sequence) -> Vec<&str> {
        seq.tokens().iter().map(|&i| self.token(i).unwrap_or(UNK)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = self.tokens.join("\n");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines: usize,
    pub kept: usize,
    pub dropped_short: usize,
    pub dropped_long: usize,
    pub truncated: usize,
    pub unknown_tokens: usize,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} lines, {} kept, {} dropped short, {} dropped long, {} truncated, {} unknown tokens",
            self.lines, self.kept, self.dropped_short, self.dropped_long, self.truncated, self.unknown_tokens
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub sequences: Vec<Sequence>,
    pub report: IngestReport,
}

/// Maps lines to length-`horizon` sequences. Shorter lines are dropped;
/// longer ones are truncated, or dropped when `drop_long` is set. Blank lines
/// are ignored.
pub fn encode(text: &str, vocab: &CorpusVocab, horizon: usize, drop_long: bool) -> Corpus {
    let mut report = IngestReport::default();
    let mut sequences = Vec::new();
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        report.lines += 1;
        if toks.len() < horizon {
            report.dropped_short += 1;
            continue;
        }
        if toks.len() > horizon {
            if drop_long {
                report.dropped_long += 1;
                continue;
            }
            report.truncated += 1;
        }
        let ids = toks[..horizon]
            .iter()
            .map(|t| {
                vocab.id(t).unwrap_or_else(|| {
                    report.unknown_tokens += 1;
                    CorpusVocab::UNK_ID
                })
            })
            .collect();
        sequences.push(Sequence(ids));
        report.kept += 1;
    }
    Corpus { sequences, report }
}

/// Builds the vocabulary from the training split and encodes both splits.
pub fn ingest_corpus(
    train_path: &Path,
    test_path: &Path,
    horizon: usize,
    drop_long: bool,
) -> Result<(CorpusVocab, Corpus, Corpus)> {
    if horizon < 1 {
        return Err(CliError::Config("horizon must be at least 1".into()));
    }
    let train_text = std::fs::read_to_string(train_path).map_err(|e| CliError::Data(format!("{}: {e}", train_path.display())))?;
    let test_text = std::fs::read_to_string(test_path).map_err(|e| CliError::Data(format!("{}: {e}", test_path.display())))?;
    if train_text.split_whitespace().next().is_none() {
        return Err(CliError::Data(format!("{}: training file is empty", train_path.display())));
    }
    let vocab = CorpusVocab::build(train_text.lines());
    let train = encode(&train_text, &vocab, horizon, drop_long);
    let test = encode(&test_text, &vocab, horizon, drop_long);
    for (name, c) in [("training", &train), ("test", &test)] {
        if c.sequences.is_empty() {
            return Err(CliError::Data(format!(
                "no {name} line has at least {horizon} tokens ({})",
                c.report
            )));
        }
    }
    Ok((vocab, train, test))
}
