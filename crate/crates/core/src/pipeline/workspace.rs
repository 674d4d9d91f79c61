use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::calendar::{parse_date, DateRange};
use crate::corpus::{load_corpus_within, Corpus, NormalizationRules};
use crate::error::{Error, Result};
use crate::lexicon::{
    covid_terms, default_shifters, load_sentiment_lexicon, load_shifters, load_term_lexicon, load_weighted_lexicon,
    ump_terms, SentimentLexicon, TermLexicon, ValenceShifterTable, WeightedLexicon,
};
use crate::sentiment::{aggregate_sentiment, Indicator, IndicatorKind, ScoreRecord};
use crate::timeseries::{align, build_series, load_external_csv, Aggregation, ChannelFilter, Join, TimeSeries};

use super::config::{IndicatorKindConfig, LexiconFormat, RunConfig, VariableRef};

#[derive(Clone, Debug)]
pub enum LoadedLexicon {
    Sentiment(SentimentLexicon),
    Weighted(WeightedLexicon),
    Terms(TermLexicon),
}

/// Inputs of a run, loaded on first use and cached.
pub struct Workspace<'c> {
    pub config: &'c RunConfig,
    corpus: Option<Corpus>,
    lexicons: Option<BTreeMap<String, LoadedLexicon>>,
    records: Option<Vec<ScoreRecord>>,
    externals: BTreeMap<usize, TimeSeries>,
    nber: Option<Vec<DateRange>>,
}

impl<'c> Workspace<'c> {
    pub fn new(config: &'c RunConfig) -> Self {
        Self {
            config,
            corpus: None,
            lexicons: None,
            records: None,
            externals: BTreeMap::new(),
            nber: None,
        }
    }

    /// The tokenized corpus (vocabulary not built).
    pub fn corpus(&mut self) -> Result<&Corpus> {
        if self.corpus.is_none() {
            let cfg = &self.config.corpus;
            let mut corpus = load_corpus_within(&cfg.root, &cfg.manifest, self.config.sample_window())
                .map_err(|e| e.context(format!("loading corpus {}", cfg.manifest.display())))?;
            if corpus.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "manifest {} lists no documents",
                    cfg.manifest.display()
                )));
            }
            corpus.tokenize_all(&NormalizationRules::default());
            log::info!("corpus: {} documents", corpus.len());
            self.corpus = Some(corpus);
        }
        Ok(self.corpus.as_ref().expect("loaded above"))
    }

    pub fn lexicons(&mut self) -> Result<&BTreeMap<String, LoadedLexicon>> {
        if self.lexicons.is_none() {
            let mut map = BTreeMap::new();
            for (name, lc) in &self.config.lexicons {
                let ctx = |e: Error| e.context(format!("lexicon `{name}`"));
                let loaded = match (lc.format, &lc.path, lc.builtin.as_deref()) {
                    (LexiconFormat::Terms, None, Some("ump")) => LoadedLexicon::Terms(ump_terms()),
                    (LexiconFormat::Terms, None, Some(_)) => LoadedLexicon::Terms(covid_terms()),
                    (LexiconFormat::Terms, Some(p), _) => LoadedLexicon::Terms(load_term_lexicon(p).map_err(ctx)?),
                    (LexiconFormat::Sentiment, Some(p), _) => {
                        LoadedLexicon::Sentiment(load_sentiment_lexicon(p).map_err(ctx)?)
                    }
                    (LexiconFormat::Weighted, Some(p), _) => {
                        LoadedLexicon::Weighted(load_weighted_lexicon(p).map_err(ctx)?)
                    }
                    _ => return Err(Error::config(format!("lexicons.{name}.path"), "missing lexicon path")),
                };
                map.insert(name.clone(), loaded);
            }
            self.lexicons = Some(map);
        }
        Ok(self.lexicons.as_ref().expect("loaded above"))
    }

    fn shifters(&self) -> Result<ValenceShifterTable> {
        match &self.config.shifters {
            Some(p) => load_shifters(p).map_err(|e| e.context("valence shifters")),
            None => Ok(default_shifters()),
        }
    }

    pub fn indicators(&mut self) -> Result<Vec<Indicator>> {
        let shifters = self.shifters()?;
        let config = self.config;
        let lexicons = self.lexicons()?;
        config
            .indicators
            .iter()
            .map(|ic| {
                let lex = &lexicons[&ic.lexicon];
                let sh = if ic.shifters { shifters.clone() } else { ValenceShifterTable::default() };
                let kind = match (ic.kind, lex) {
                    (IndicatorKindConfig::Ratio, LoadedLexicon::Sentiment(l)) => IndicatorKind::Ratio(l.clone()),
                    (IndicatorKindConfig::Net, LoadedLexicon::Sentiment(l)) => IndicatorKind::Net(l.clone()),
                    (IndicatorKindConfig::Uncertainty, LoadedLexicon::Sentiment(l)) => {
                        IndicatorKind::Uncertainty(l.clone())
                    }
                    (IndicatorKindConfig::Polarity, LoadedLexicon::Sentiment(l)) => {
                        IndicatorKind::PolarityClasses(l.clone(), sh)
                    }
                    (IndicatorKindConfig::Polarity, LoadedLexicon::Weighted(l)) => {
                        IndicatorKind::PolarityWeighted(l.clone(), sh)
                    }
                    (IndicatorKindConfig::Terms, LoadedLexicon::Terms(l)) => IndicatorKind::Terms {
                        lexicon: l.clone(),
                        per_token: ic.per_token,
                    },
                    _ => {
                        return Err(Error::config(
                            format!("indicators.{}.kind", ic.name),
                            "kind does not fit lexicon format",
                        ))
                    }
                };
                Ok(Indicator::new(ic.name.clone(), kind))
            })
            .collect()
    }

    /// Every indicator on every document, in manifest then indicator order.
    pub fn records(&mut self) -> Result<&[ScoreRecord]> {
        if self.records.is_none() {
            let indicators = self.indicators()?;
            let corpus = self.corpus()?;
            let per_doc: Vec<Result<Vec<ScoreRecord>>> = corpus
                .tokenized_in_order()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(doc, toks)| {
                    indicators
                        .iter()
                        .map(|ind| {
                            ind.score(toks)
                                .map(|v| ScoreRecord::new(doc, &ind.name, v))
                                .map_err(|e| e.context(format!("scoring {} with {}", doc.id, ind.name)))
                        })
                        .collect()
                })
                .collect();
            let mut records = Vec::new();
            for r in per_doc {
                records.extend(r?);
            }
            self.records = Some(records);
        }
        Ok(self.records.as_deref().expect("computed above"))
    }

    pub fn external(&mut self, idx: usize) -> Result<&TimeSeries> {
        if !self.externals.contains_key(&idx) {
            let ec = &self.config.external[idx];
            let s = load_external_csv(&ec.path, &ec.date_col, &ec.value_col)
                .map_err(|e| e.context(format!("external series `{}`", ec.name)))?
                .renamed(ec.name.clone());
            self.externals.insert(idx, s);
        }
        Ok(&self.externals[&idx])
    }

    pub fn nber(&mut self) -> Result<&[DateRange]> {
        if self.nber.is_none() {
            let mut windows = Vec::new();
            if let Some(path) = &self.config.nber {
                let mut reader = csv::ReaderBuilder::new()
                    .trim(csv::Trim::All)
                    .from_path(path)
                    .map_err(|e| Error::csv(path, e))?;
                for (i, row) in reader.records().enumerate() {
                    let row = row.map_err(|e| Error::csv(path, e))?;
                    let bad = |message: String| Error::Parse {
                        path: path.clone(),
                        row: i + 1,
                        message,
                    };
                    let start = parse_date(row.get(0).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
                    let end = parse_date(row.get(1).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
                    windows.push(DateRange::new(start, end).map_err(|e| bad(e.to_string()))?);
                }
            }
            self.nber = Some(windows);
        }
        Ok(self.nber.as_deref().expect("loaded above"))
    }

    pub fn in_recession(&mut self, date: NaiveDate) -> Result<bool> {
        let freq = self.config.frequency;
        Ok(self.nber()?.iter().any(|w| {
            // a bucket counts when any day of it overlaps the window
            w.contains(date) || (freq.bucket(w.start) == date)
        }))
    }

    pub fn crisis_label(&self, date: NaiveDate) -> &str {
        self.config
            .crises
            .iter()
            .find(|c| c.range().contains(date))
            .map_or("", |c| c.label.as_str())
    }

    /// Raw series for `name` and how it collapses into calendar buckets.
    fn raw_series(&mut self, name: &str) -> Result<(TimeSeries, Aggregation)> {
        let freq = self.config.frequency;
        let reference = self
            .config
            .resolve_variable(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        match reference {
            VariableRef::Indicator { name: ind, channel } => {
                let filter = channel.map_or(ChannelFilter::All, ChannelFilter::Only);
                let s = build_series(self.records()?, &ind, filter, freq, Aggregation::Mean)?;
                Ok((s.renamed(name), Aggregation::Mean))
            }
            VariableRef::Aggregate => {
                let names = self.config.aggregate_indicators();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let weights = self.config.channel_weights();
                let s = aggregate_sentiment(self.records()?, &refs, &weights, freq)?;
                Ok((s, Aggregation::Mean))
            }
            VariableRef::External(idx) => {
                let policy = self.config.external[idx].policy;
                Ok((self.external(idx)?.clone(), policy))
            }
        }
    }

    /// `name` bucketed to the run frequency.
    pub fn series(&mut self, name: &str) -> Result<TimeSeries> {
        let (s, agg) = self.raw_series(name)?;
        let panel = align(&[(&s, agg)], self.config.frequency, Join::Outer)?;
        panel.series(name, self.config.frequency)
    }
}
