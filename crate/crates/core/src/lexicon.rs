//! Dictionaries and their matching rules.
//!
//! Four on-disk formats are supported, all UTF-8 with `#` comments and blank
//! lines ignored:
//!
//! * term lexicon (`.lex`): one phrase of 1 to 4 space-separated tokens per
//!   line, a trailing `*` turning the last token into a root;
//! * sentiment lexicon: `word,class` with class `positive`, `negative` or
//!   `uncertainty`;
//! * weighted lexicon: `word,weight` with weight in `[-1, 1]`;
//! * valence shifters: `word,kind[,value]` with kind `negator`, `amplifier`
//!   or `deamplifier`.
//!
//! Entries are lowercased on load so they line up with tokenizer output.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use crate::corpus::TokenizedDocument;
use crate::error::{Error, Result};

pub const MAX_PHRASE_TOKENS: usize = 4;
pub const DEFAULT_AMPLIFIER_BOOST: f64 = 0.8;
pub const DEFAULT_DEAMPLIFIER_DAMP: f64 = 0.5;

const UMP_TERMS: &str = include_str!("../data/lexicons/ump_terms.lex");
const COVID_TERMS: &str = include_str!("../data/lexicons/covid_terms.lex");
const SHIFTERS: &str = include_str!("../data/lexicons/shifters.csv");

/// Does root `pattern` accept `token`?
pub fn prefix_matches(pattern: &str, token: &str) -> bool {
    token.starts_with(pattern)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermPattern {
    pub tokens: Vec<String>,
    /// The final token matches as a root.
    pub prefix: bool,
}

impl TermPattern {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tests the pattern against `tokens[at..]`.
    pub fn matches_at(&self, tokens: &[String], at: usize) -> bool {
        let Some(window) = tokens.get(at..at + self.tokens.len()) else {
            return false;
        };
        let last = self.tokens.len() - 1;
        self.tokens.iter().zip(window).enumerate().all(|(i, (p, t))| {
            if i == last && self.prefix {
                prefix_matches(p, t)
            } else {
                p == t
            }
        })
    }
}

impl std::fmt::Display for TermPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.tokens.join(" "), if self.prefix { "*" } else { "" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermLexicon {
    pub name: String,
    pub entries: Vec<TermPattern>,
}

impl TermLexicon {
    pub fn parse(name: &str, text: &str, source: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Lexicon {
                path: source.to_path_buf(),
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (body, prefix) = match line.strip_suffix('*') {
                Some(b) => (b.trim_end(), true),
                None => (line, false),
            };
            let tokens: Vec<String> = body.split_whitespace().map(str::to_lowercase).collect();
            if tokens.is_empty() {
                return Err(err("entry has no tokens".into()));
            }
            if tokens.len() > MAX_PHRASE_TOKENS {
                return Err(err(format!(
                    "{} tokens, at most {MAX_PHRASE_TOKENS} allowed",
                    tokens.len()
                )));
            }
            for t in &tokens {
                let valid = t.chars().all(|c| c.is_alphanumeric() || c == '-')
                    && !t.starts_with('-')
                    && !t.ends_with('-');
                if !valid {
                    return Err(err(format!("token {t:?} would not survive tokenization")));
                }
            }
            let pattern = TermPattern { tokens, prefix };
            if !seen.insert(pattern.clone()) {
                return Err(err(format!("duplicate entry {pattern}")));
            }
            entries.push(pattern);
        }
        if entries.is_empty() {
            return Err(Error::Lexicon {
                path: source.to_path_buf(),
                line: 0,
                message: "lexicon has no entries".into(),
            });
        }
        Ok(Self {
            name: name.to_string(),
            entries,
        })
    }

    pub fn contains(&self, phrase: &str) -> bool {
        let tokens: Vec<&str> = phrase.split_whitespace().collect();
        self.entries
            .iter()
            .any(|e| e.tokens.iter().map(String::as_str).eq(tokens.iter().copied()))
    }

    pub fn longest_pattern(&self) -> usize {
        self.entries.iter().map(TermPattern::len).max().unwrap_or(0)
    }
}

pub fn load_term_lexicon(path: &Path) -> Result<TermLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TermLexicon::parse(&stem(path), &text, path)
}

/// The shipped unconventional-monetary-policy term list.
pub fn ump_terms() -> TermLexicon {
    TermLexicon::parse("ump_terms", UMP_TERMS, Path::new("ump_terms.lex"))
        .expect("shipped lexicon parses")
}

/// The shipped COVID-19 term list.
pub fn covid_terms() -> TermLexicon {
    TermLexicon::parse("covid_terms", COVID_TERMS, Path::new("covid_terms.lex"))
        .expect("shipped lexicon parses")
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub count: usize,
    /// `(token_start, token_len)`, sorted and non-overlapping.
    pub spans: Vec<(usize, usize)>,
}

impl MatchResult {
    fn push(&mut self, start: usize, len: usize) {
        self.spans.push((start, len));
        self.count += 1;
    }
}

/// Greedy left-to-right longest match. A phrase never crosses a sentence
/// boundary and tokens consumed by one match are not reused.
pub fn match_terms(doc: &TokenizedDocument, lex: &TermLexicon) -> MatchResult {
    let mut result = MatchResult::default();
    for &(start, end) in &doc.sentence_spans {
        let sentence = &doc.tokens[..end];
        let mut i = start;
        while i < end {
            let best = lex
                .entries
                .iter()
                .filter(|p| i + p.len() <= end && p.matches_at(sentence, i))
                .map(TermPattern::len)
                .max();
            match best {
                Some(len) => {
                    result.push(i, len);
                    i += len;
                }
                None => i += 1,
            }
        }
    }
    result
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SentimentClass {
    Positive,
    Negative,
    Uncertainty,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    pub name: String,
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
    pub uncertainty: BTreeSet<String>,
}

impl SentimentLexicon {
    /// Builds a lexicon, rejecting words listed under more than one class.
    pub fn new<I, S>(name: &str, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, SentimentClass)>,
        S: Into<String>,
    {
        let mut lex = Self {
            name: name.to_string(),
            ..Default::default()
        };
        for (word, class) in entries {
            let word = word.into().to_lowercase();
            lex.insert(word, class)
                .map_err(|m| Error::InvalidArgument(format!("{name}: {m}")))?;
        }
        Ok(lex)
    }

    fn insert(&mut self, word: String, class: SentimentClass) -> std::result::Result<(), String> {
        if let Some(existing) = self.class_of(&word) {
            if existing != class {
                return Err(format!("{word:?} listed as both {existing:?} and {class:?}"));
            }
            return Ok(());
        }
        match class {
            SentimentClass::Positive => self.positive.insert(word),
            SentimentClass::Negative => self.negative.insert(word),
            SentimentClass::Uncertainty => self.uncertainty.insert(word),
        };
        Ok(())
    }

    pub fn class_of(&self, token: &str) -> Option<SentimentClass> {
        if self.positive.contains(token) {
            Some(SentimentClass::Positive)
        } else if self.negative.contains(token) {
            Some(SentimentClass::Negative)
        } else if self.uncertainty.contains(token) {
            Some(SentimentClass::Uncertainty)
        } else {
            None
        }
    }

    /// The same word lists with positive and negative exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            name: self.name.clone(),
            positive: self.negative.clone(),
            negative: self.positive.clone(),
            uncertainty: self.uncertainty.clone(),
        }
    }
}

pub fn load_sentiment_lexicon(path: &Path) -> Result<SentimentLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lex = SentimentLexicon {
        name: stem(path),
        ..Default::default()
    };
    for (line_no, fields) in csv_lines(&text) {
        let err = |message: String| Error::Lexicon {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if line_no == first_content_line(&text) && fields[..] == ["word", "class"] {
            continue;
        }
        let [word, class] = fields[..] else {
            return Err(err(format!("expected `word,class`, got {} fields", fields.len())));
        };
        let class = match class.to_ascii_lowercase().as_str() {
            "positive" => SentimentClass::Positive,
            "negative" => SentimentClass::Negative,
            "uncertainty" => SentimentClass::Uncertainty,
            other => return Err(err(format!("unknown class {other:?}"))),
        };
        if word.is_empty() {
            return Err(err("empty word".into()));
        }
        lex.insert(word.to_lowercase(), class).map_err(err)?;
    }
    if lex.positive.is_empty() && lex.negative.is_empty() && lex.uncertainty.is_empty() {
        return Err(Error::Lexicon {
            path: path.to_path_buf(),
            line: 0,
            message: "lexicon has no entries".into(),
        });
    }
    Ok(lex)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SentimentMatches {
    pub positive: MatchResult,
    pub negative: MatchResult,
    pub uncertainty: MatchResult,
}

/// Unigram exact matching; each token lands in at most one class.
pub fn match_sentiment(doc: &TokenizedDocument, lex: &SentimentLexicon) -> SentimentMatches {
    let mut out = SentimentMatches::default();
    for (i, token) in doc.tokens.iter().enumerate() {
        match lex.class_of(token) {
            Some(SentimentClass::Positive) => out.positive.push(i, 1),
            Some(SentimentClass::Negative) => out.negative.push(i, 1),
            Some(SentimentClass::Uncertainty) => out.uncertainty.push(i, 1),
            None => {}
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedLexicon {
    pub name: String,
    pub weights: BTreeMap<String, f64>,
}

impl WeightedLexicon {
    pub fn new<I, S>(name: &str, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut weights = BTreeMap::new();
        for (word, w) in entries {
            let word = word.into().to_lowercase();
            if !(-1.0..=1.0).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "{name}: weight {w} for {word:?} outside [-1, 1]"
                )));
            }
            weights.insert(word, w);
        }
        Ok(Self {
            name: name.to_string(),
            weights,
        })
    }
}

pub fn load_weighted_lexicon(path: &Path) -> Result<WeightedLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut weights = BTreeMap::new();
    for (line_no, fields) in csv_lines(&text) {
        let err = |message: String| Error::Lexicon {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if line_no == first_content_line(&text) && fields[..] == ["word", "weight"] {
            continue;
        }
        let [word, weight] = fields[..] else {
            return Err(err(format!("expected `word,weight`, got {} fields", fields.len())));
        };
        let w: f64 = weight
            .parse()
            .map_err(|_| err(format!("weight {weight:?} is not a number")))?;
        if !(-1.0..=1.0).contains(&w) {
            return Err(err(format!("weight {w} outside [-1, 1]")));
        }
        if weights.insert(word.to_lowercase(), w).is_some() {
            return Err(err(format!("duplicate word {word:?}")));
        }
    }
    if weights.is_empty() {
        return Err(Error::Lexicon {
            path: path.to_path_buf(),
            line: 0,
            message: "lexicon has no entries".into(),
        });
    }
    Ok(WeightedLexicon {
        name: stem(path),
        weights,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShifterKind {
    Negator,
    Amplifier,
    Deamplifier,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValenceShifterTable {
    pub negators: BTreeSet<String>,
    /// word → boost (> 0); an amplified value is scaled by `1 + boost`.
    pub amplifiers: BTreeMap<String, f64>,
    /// word → damping factor in `(0, 1]`.
    pub deamplifiers: BTreeMap<String, f64>,
}

impl ValenceShifterTable {
    pub fn kind_of(&self, token: &str) -> Option<ShifterKind> {
        if self.negators.contains(token) {
            Some(ShifterKind::Negator)
        } else if self.amplifiers.contains_key(token) {
            Some(ShifterKind::Amplifier)
        } else if self.deamplifiers.contains_key(token) {
            Some(ShifterKind::Deamplifier)
        } else {
            None
        }
    }

    /// Adds a shifter. Keys must be unique across the three kinds.
    pub fn add(&mut self, word: &str, kind: ShifterKind, value: Option<f64>) -> Result<()> {
        let word = word.to_lowercase();
        if let Some(existing) = self.kind_of(&word) {
            return Err(Error::InvalidArgument(format!(
                "shifter {word:?} already registered as {existing:?}"
            )));
        }
        match kind {
            ShifterKind::Negator => {
                if value.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "negator {word:?} takes no value"
                    )));
                }
                self.negators.insert(word);
            }
            ShifterKind::Amplifier => {
                let boost = value.unwrap_or(DEFAULT_AMPLIFIER_BOOST);
                if !(boost > 0.0 && boost.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "amplifier boost for {word:?} must be > 0, got {boost}"
                    )));
                }
                self.amplifiers.insert(word, boost);
            }
            ShifterKind::Deamplifier => {
                let damp = value.unwrap_or(DEFAULT_DEAMPLIFIER_DAMP);
                if !(damp > 0.0 && damp <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "deamplifier damp for {word:?} must be in (0, 1], got {damp}"
                    )));
                }
                self.deamplifiers.insert(word, damp);
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut table = Self::default();
        for (line_no, fields) in csv_lines(text) {
            let err = |message: String| Error::Lexicon {
                path: source.to_path_buf(),
                line: line_no,
                message,
            };
            if line_no == first_content_line(text) && fields.first() == Some(&"word") {
                continue;
            }
            let (word, kind, value) = match fields[..] {
                [w, k] => (w, k, None),
                [w, k, v] => (w, k, Some(v)),
                _ => {
                    return Err(err(format!(
                        "expected `word,kind[,value]`, got {} fields",
                        fields.len()
                    )))
                }
            };
            let kind = match kind.to_ascii_lowercase().as_str() {
                "negator" => ShifterKind::Negator,
                "amplifier" => ShifterKind::Amplifier,
                "deamplifier" | "de-amplifier" => ShifterKind::Deamplifier,
                other => return Err(err(format!("unknown shifter kind {other:?}"))),
            };
            let value = value
                .map(|v| v.parse::<f64>().map_err(|_| err(format!("value {v:?} is not a number"))))
                .transpose()?;
            table
                .add(word, kind, value)
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(table)
    }
}

/// The shipped shifter list (boost 0.8, damp 0.5).
pub fn default_shifters() -> ValenceShifterTable {
    ValenceShifterTable::parse(SHIFTERS, Path::new("shifters.csv"))
        .expect("shipped shifter table parses")
}

pub fn load_shifters(path: &Path) -> Result<ValenceShifterTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ValenceShifterTable::parse(&text, path)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Non-comment, non-blank lines split on commas, with 1-based line numbers.
fn csv_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split(',').map(str::trim).collect()))
        }
    })
}

fn first_content_line(text: &str) -> usize {
    csv_lines(text).next().map(|(n, _)| n).unwrap_or(0)
}
