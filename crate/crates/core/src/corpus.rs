//! Dated documents, tokenization and vocabulary.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{parse_date, DateRange};
use crate::error::{Error, Result};

/// Publication channel of a communication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Announcement,
    Minutes,
    Speech,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Announcement, Channel::Minutes, Channel::Speech];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Announcement => "Announcement",
            Channel::Minutes => "Minutes",
            Channel::Speech => "Speech",
        }
    }

    /// Lowercase identifier used in configs and output tables.
    pub fn key(self) -> &'static str {
        match self {
            Channel::Announcement => "announcement",
            Channel::Minutes => "minutes",
            Channel::Speech => "speech",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "announcement" => Ok(Channel::Announcement),
            "minutes" => Ok(Channel::Minutes),
            "speech" => Ok(Channel::Speech),
            other => Err(Error::InvalidArgument(format!("unknown channel {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub channel: Channel,
    pub date: NaiveDate,
    pub raw_text: String,
}

/// Normalized token stream of one document.
///
/// `sentence_spans` are half-open `(start, end)` token ranges that partition
/// `0..tokens.len()` in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub sentence_spans: Vec<(usize, usize)>,
}

impl TokenizedDocument {
    /// Builds a document from pre-split tokens as a single sentence.
    pub fn from_tokens<S: AsRef<str>>(doc_id: &str, tokens: &[S]) -> Self {
        let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        let sentence_spans = if tokens.is_empty() {
            Vec::new()
        } else {
            vec![(0, tokens.len())]
        };
        Self {
            doc_id: doc_id.to_string(),
            tokens,
            sentence_spans,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of the sentence containing token `idx`.
    pub fn sentence_of(&self, idx: usize) -> Option<usize> {
        let pos = self.sentence_spans.partition_point(|&(_, end)| end <= idx);
        match self.sentence_spans.get(pos) {
            Some(&(start, end)) if start <= idx && idx < end => Some(pos),
            _ => None,
        }
    }
}

/// Tokenizer options. Lowercasing and hyphen handling are fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationRules {
    pub keep_digits: bool,
    pub sentence_terminators: Vec<char>,
}

impl Default for NormalizationRules {
    fn default() -> Self {
        Self {
            keep_digits: true,
            sentence_terminators: vec!['.', '!', '?', ';'],
        }
    }
}

/// Splits raw text into lowercase tokens and sentence spans.
///
/// Tokens are maximal runs of alphanumeric characters and hyphens; leading
/// and trailing hyphens are stripped so only internal ones survive
/// (`sars-cov`). A terminator closes a sentence when followed by whitespace
/// or the end of the text.
pub fn tokenize(doc: &Document, rules: &NormalizationRules) -> TokenizedDocument {
    tokenize_text(&doc.id, &doc.raw_text, rules)
}

pub fn tokenize_text(doc_id: &str, text: &str, rules: &NormalizationRules) -> TokenizedDocument {
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut sentence_start = 0usize;
    let mut current = String::new();

    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        let trimmed = current.trim_matches('-');
        if !trimmed.is_empty() && (rules.keep_digits || !trimmed.chars().all(|c| c.is_numeric() || c == '-')) {
            tokens.push(trimmed.to_string());
        }
        current.clear();
    };

    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() || c == '-' {
            current.extend(c.to_lowercase());
            continue;
        }
        flush(&mut current, &mut tokens);
        if rules.sentence_terminators.contains(&c) {
            let at_boundary = chars.peek().is_none_or(|n| n.is_whitespace());
            if at_boundary && tokens.len() > sentence_start {
                spans.push((sentence_start, tokens.len()));
                sentence_start = tokens.len();
            }
        }
    }
    flush(&mut current, &mut tokens);
    if tokens.len() > sentence_start {
        spans.push((sentence_start, tokens.len()));
    }

    TokenizedDocument {
        doc_id: doc_id.to_string(),
        tokens,
        sentence_spans: spans,
    }
}

/// Dense token ↔ id mapping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_words(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self { words, index }
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub tokenized: BTreeMap<String, TokenizedDocument>,
    pub vocab: Vocabulary,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Manifest {
                    row: i + 1,
                    message: format!("duplicate id {:?}", doc.id),
                });
            }
        }
        Ok(Self {
            documents,
            ..Default::default()
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn tokens(&self, id: &str) -> Option<&TokenizedDocument> {
        self.tokenized.get(id)
    }

    /// Tokenizes every document; runs on the current rayon pool.
    pub fn tokenize_all(&mut self, rules: &NormalizationRules) {
        let tokenized: Vec<TokenizedDocument> = self
            .documents
            .par_iter()
            .map(|d| tokenize(d, rules))
            .collect();
        self.tokenized = tokenized
            .into_iter()
            .map(|t| (t.doc_id.clone(), t))
            .collect();
    }

    /// Tokenized documents in manifest order.
    pub fn tokenized_in_order(&self) -> impl Iterator<Item = (&Document, &TokenizedDocument)> {
        self.documents
            .iter()
            .filter_map(move |d| self.tokenized.get(&d.id).map(|t| (d, t)))
    }

    /// Keeps the documents selected by `keep`, dropping the vocabulary.
    pub fn filtered(&self, keep: impl Fn(&Document) -> bool) -> Corpus {
        let documents: Vec<Document> = self.documents.iter().filter(|d| keep(d)).cloned().collect();
        let tokenized = documents
            .iter()
            .filter_map(|d| self.tokenized.get(&d.id).map(|t| (d.id.clone(), t.clone())))
            .collect();
        Corpus {
            documents,
            tokenized,
            vocab: Vocabulary::default(),
        }
    }

    /// Assigns ids to every token seen at least `min_count` times: most
    /// frequent first, ties in lexicographic order.
    pub fn build_vocab(&mut self, min_count: usize) -> Result<()> {
        if self.tokenized.len() != self.documents.len() {
            return Err(Error::InvalidArgument(
                "build_vocab needs every document tokenized".into(),
            ));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in self.tokenized.values() {
            for t in &doc.tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        self.vocab = Vocabulary::from_words(ranked.into_iter().map(|(w, _)| w.to_string()).collect());
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id: String,
    channel: String,
    date: String,
    filename: String,
}

/// Reads `manifest_path` (`id,channel,date,filename`) and the referenced
/// text files under `root`. Documents are returned in manifest order and
/// are not tokenized.
pub fn load_corpus(root: &Path, manifest_path: &Path) -> Result<Corpus> {
    load_corpus_within(root, manifest_path, None)
}

/// Like [`load_corpus`], rejecting documents dated outside `window`.
pub fn load_corpus_within(
    root: &Path,
    manifest_path: &Path,
    window: Option<DateRange>,
) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest_path)
        .map_err(|e| Error::csv(manifest_path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(manifest_path, e))?.clone();
    for required in ["id", "channel", "date", "filename"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Manifest {
                row: 0,
                message: format!("missing column {required:?}"),
            });
        }
    }

    let mut documents = Vec::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Manifest {
            row: row_no,
            message: e.to_string(),
        })?;
        let manifest_err = |message: String| Error::Manifest {
            row: row_no,
            message: format!("{} ({})", message, row.id),
        };
        let channel: Channel = row.channel.parse().map_err(|e: Error| manifest_err(e.to_string()))?;
        let date = parse_date(&row.date).map_err(|e| manifest_err(e.to_string()))?;
        if let Some(w) = window {
            if !w.contains(date) {
                return Err(manifest_err(format!("date {date} outside sample window {w}")));
            }
        }
        let path = root.join(&row.filename);
        let raw_text = std::fs::read_to_string(&path)
            .map_err(|e| manifest_err(format!("cannot read {}: {e}", path.display())))?;
        documents.push(Document {
            id: row.id.clone(),
            channel,
            date,
            raw_text,
        });
    }
    Corpus::new(documents)
}

/// Consuming form of [`Corpus::build_vocab`].
pub fn build_vocab(mut corpus: Corpus, min_count: usize) -> Result<Corpus> {
    corpus.build_vocab(min_count)?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(text: &str) -> Document {
        Document {
            id: "d".into(),
            channel: Channel::Speech,
            date: NaiveDate::from_ymd_opt(2020, 3, 3).unwrap(),
            raw_text: text.into(),
        }
    }

    fn tok(text: &str) -> TokenizedDocument {
        tokenize(&doc(text), &NormalizationRules::default())
    }

    #[test]
    fn empty_text() {
        let t = tok("");
        assert!(t.tokens.is_empty());
        assert!(t.sentence_spans.is_empty());
    }

    #[test]
    fn negation_phrase() {
        let t = tok("Not good.");
        assert_eq!(t.tokens, ["not", "good"]);
        assert_eq!(t.sentence_spans, [(0, 2)]);
    }

    #[test]
    fn hyphens_and_sentences() {
        let t = tok("SARS-CoV outbreak. Vaccines soon!");
        assert_eq!(t.tokens, ["sars-cov", "outbreak", "vaccines", "soon"]);
        assert_eq!(t.sentence_spans, [(0, 2), (2, 4)]);
    }

    #[test]
    fn edge_hyphens_stripped_and_digits_kept() {
        let t = tok("-- rates at 0-0.25 percent; well-known -policy-");
        assert_eq!(
            t.tokens,
            ["rates", "at", "0-0", "25", "percent", "well-known", "policy"]
        );
        assert_eq!(t.sentence_spans, [(0, 5), (5, 7)]);
    }

    #[test]
    fn terminator_without_whitespace_does_not_split() {
        let t = tok("rate 1.5 now");
        assert_eq!(t.sentence_spans, [(0, 4)]);
    }

    #[test]
    fn digits_can_be_dropped() {
        let rules = NormalizationRules {
            keep_digits: false,
            ..Default::default()
        };
        let t = tokenize(&doc("In 2020 covid-19 hit"), &rules);
        assert_eq!(t.tokens, ["in", "covid-19", "hit"]);
    }

    #[test]
    fn sentence_lookup() {
        let t = tok("a b. c d e. f");
        assert_eq!(t.sentence_of(0), Some(0));
        assert_eq!(t.sentence_of(2), Some(1));
        assert_eq!(t.sentence_of(5), Some(2));
        assert_eq!(t.sentence_of(6), None);
    }

    fn corpus_of(docs: &[&[&str]]) -> Corpus {
        let documents = docs
            .iter()
            .enumerate()
            .map(|(i, _)| Document {
                id: format!("d{i}"),
                channel: Channel::Minutes,
                date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
                raw_text: String::new(),
            })
            .collect();
        let mut c = Corpus::new(documents).unwrap();
        for (i, toks) in docs.iter().enumerate() {
            let id = format!("d{i}");
            c.tokenized
                .insert(id.clone(), TokenizedDocument::from_tokens(&id, toks));
        }
        c
    }

    #[test]
    fn vocab_ordering() {
        let mut c = corpus_of(&[&["a", "a", "b"]]);
        c.build_vocab(1).unwrap();
        assert_eq!(c.vocab.words(), ["a", "b"]);
        c.build_vocab(2).unwrap();
        assert_eq!(c.vocab.words(), ["a"]);
    }

    #[test]
    fn vocab_ties_are_lexicographic() {
        let mut c = corpus_of(&[&["zeta", "beta"], &["alpha", "zeta", "beta"]]);
        c.build_vocab(1).unwrap();
        assert_eq!(c.vocab.words(), ["beta", "zeta", "alpha"]);
        assert_eq!(c.vocab.id("alpha"), Some(2));
    }

    #[test]
    fn vocab_requires_tokenization() {
        let mut c = corpus_of(&[&["a"]]);
        c.tokenized.clear();
        assert!(c.build_vocab(1).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let d = doc("x");
        assert!(Corpus::new(vec![d.clone(), d]).is_err());
    }

    #[test]
    fn channel_parse() {
        assert_eq!("speech".parse::<Channel>().unwrap(), Channel::Speech);
        assert_eq!("Minutes".parse::<Channel>().unwrap(), Channel::Minutes);
        assert!("blog".parse::<Channel>().is_err());
    }

    proptest! {
        #[test]
        fn tokenization_invariants(text in "[ a-zA-Z0-9.;!?,'\\-\n]{0,200}") {
            let a = tok(&text);
            let b = tok(&text);
            prop_assert_eq!(&a, &b);
            let mut next = 0;
            for &(s, e) in &a.sentence_spans {
                prop_assert_eq!(s, next);
                prop_assert!(e > s);
                next = e;
            }
            prop_assert_eq!(next, a.tokens.len());
            for t in &a.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_uppercase));
                prop_assert!(!t.starts_with('-') && !t.ends_with('-'));
            }
        }

        #[test]
        fn vocab_size_is_distinct_count(docs in proptest::collection::vec(
            proptest::collection::vec("[a-e]{1,2}", 0..20), 1..6)) {
            let refs: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
            let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
            let mut c = corpus_of(&slices);
            c.build_vocab(1).unwrap();
            let distinct: HashSet<&String> = docs.iter().flatten().collect();
            prop_assert_eq!(c.vocab.len(), distinct.len());
        }
    }
}
