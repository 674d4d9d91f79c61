//! Per-document indicator values and the cross-indicator aggregate.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::Frequency;
use crate::corpus::{Channel, Document, TokenizedDocument};
use crate::error::{Error, Result};
use crate::lexicon::{
    match_sentiment, match_terms, SentimentClass, SentimentLexicon, ShifterKind, TermLexicon,
    ValenceShifterTable, WeightedLexicon,
};
use crate::timeseries::TimeSeries;

/// Preceding tokens inspected for valence shifters.
pub const SHIFTER_WINDOW: usize = 3;

/// Ratio score reported when a document has no positive or negative hits.
pub const NEUTRAL_RATIO: f64 = 0.5;

/// The eight indicators averaged into the aggregate sentiment series.
pub const AGGREGATE_INDICATORS: [&str; 8] = [
    "lm_score",
    "lm_polarity",
    "huliu_polarity",
    "jockers_polarity",
    "nrc_polarity",
    "sentiwords_polarity",
    "ump_sentiment",
    "fss",
];

/// One indicator value for one document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub doc_id: String,
    pub date: NaiveDate,
    pub channel: Channel,
    pub indicator: String,
    pub value: f64,
}

impl ScoreRecord {
    pub fn new(doc: &Document, indicator: &str, value: f64) -> Self {
        Self {
            doc_id: doc.id.clone(),
            date: doc.date,
            channel: doc.channel,
            indicator: indicator.to_string(),
            value,
        }
    }
}

/// `pos / (pos + neg)`, or [`NEUTRAL_RATIO`] without hits.
pub fn ratio_score(pos: usize, neg: usize) -> f64 {
    let total = pos + neg;
    if total == 0 {
        NEUTRAL_RATIO
    } else {
        pos as f64 / total as f64
    }
}

/// `(pos - neg) / total_tokens`.
pub fn net_score(pos: usize, neg: usize, total_tokens: usize) -> Result<f64> {
    if total_tokens == 0 {
        return Err(Error::EmptyDocument);
    }
    Ok((pos as f64 - neg as f64) / total_tokens as f64)
}

pub fn uncertainty_ratio(unc: usize, total_tokens: usize) -> Result<f64> {
    if total_tokens == 0 {
        return Err(Error::EmptyDocument);
    }
    Ok(unc as f64 / total_tokens as f64)
}

/// Base values for polarity scoring.
#[derive(Clone, Copy, Debug)]
pub enum PolarityLexicon<'a> {
    /// Positive words count +1, negative −1; uncertainty words are ignored.
    Classes(&'a SentimentLexicon),
    Weighted(&'a WeightedLexicon),
}

impl PolarityLexicon<'_> {
    fn base_value(&self, token: &str) -> Option<f64> {
        match self {
            PolarityLexicon::Classes(lex) => match lex.class_of(token) {
                Some(SentimentClass::Positive) => Some(1.0),
                Some(SentimentClass::Negative) => Some(-1.0),
                _ => None,
            },
            PolarityLexicon::Weighted(lex) => lex.weights.get(token).copied(),
        }
    }
}

/// Mean shifter-adjusted value of the sentiment tokens in `doc`.
///
/// Each matched token looks back at up to [`SHIFTER_WINDOW`] tokens of its
/// own sentence: a negator flips the sign, an amplifier scales the magnitude
/// by `1 + boost` and a deamplifier by `damp`. Returns 0 without matches.
pub fn polarity_score(
    doc: &TokenizedDocument,
    lex: PolarityLexicon<'_>,
    shifters: &ValenceShifterTable,
) -> f64 {
    let mut sum = 0.0;
    let mut matched = 0usize;
    for &(start, end) in &doc.sentence_spans {
        for i in start..end {
            let Some(mut value) = lex.base_value(&doc.tokens[i]) else {
                continue;
            };
            for prev in &doc.tokens[i.saturating_sub(SHIFTER_WINDOW).max(start)..i] {
                match shifters.kind_of(prev) {
                    Some(ShifterKind::Negator) => value = -value,
                    Some(ShifterKind::Amplifier) => value *= 1.0 + shifters.amplifiers[prev],
                    Some(ShifterKind::Deamplifier) => value *= shifters.deamplifiers[prev],
                    None => {}
                }
            }
            sum += value;
            matched += 1;
        }
    }
    if matched == 0 {
        0.0
    } else {
        sum / matched as f64
    }
}

/// How an indicator turns a tokenized document into a number.
#[derive(Clone, Debug)]
pub enum IndicatorKind {
    /// Positive share of polar hits.
    Ratio(SentimentLexicon),
    /// Net polar hits per token.
    Net(SentimentLexicon),
    /// Uncertainty hits per token.
    Uncertainty(SentimentLexicon),
    PolarityClasses(SentimentLexicon, ValenceShifterTable),
    PolarityWeighted(WeightedLexicon, ValenceShifterTable),
    /// Term-lexicon hit count, optionally per token.
    Terms { lexicon: TermLexicon, per_token: bool },
}

#[derive(Clone, Debug)]
pub struct Indicator {
    pub name: String,
    pub kind: IndicatorKind,
}

impl Indicator {
    pub fn new(name: impl Into<String>, kind: IndicatorKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn score(&self, doc: &TokenizedDocument) -> Result<f64> {
        let n = doc.len();
        match &self.kind {
            IndicatorKind::Ratio(lex) => {
                let m = match_sentiment(doc, lex);
                Ok(ratio_score(m.positive.count, m.negative.count))
            }
            IndicatorKind::Net(lex) => {
                let m = match_sentiment(doc, lex);
                net_score(m.positive.count, m.negative.count, n)
            }
            IndicatorKind::Uncertainty(lex) => {
                uncertainty_ratio(match_sentiment(doc, lex).uncertainty.count, n)
            }
            IndicatorKind::PolarityClasses(lex, sh) => {
                Ok(polarity_score(doc, PolarityLexicon::Classes(lex), sh))
            }
            IndicatorKind::PolarityWeighted(lex, sh) => {
                Ok(polarity_score(doc, PolarityLexicon::Weighted(lex), sh))
            }
            IndicatorKind::Terms { lexicon, per_token } => {
                let count = match_terms(doc, lexicon).count;
                if *per_token {
                    if n == 0 {
                        return Err(Error::EmptyDocument);
                    }
                    Ok(count as f64 / n as f64)
                } else {
                    Ok(count as f64)
                }
            }
        }
    }
}

/// Relative weight of each channel when channels are merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelWeights(pub BTreeMap<Channel, f64>);

impl Default for ChannelWeights {
    fn default() -> Self {
        Self(BTreeMap::from([
            (Channel::Announcement, 3.0),
            (Channel::Minutes, 2.0),
            (Channel::Speech, 1.0),
        ]))
    }
}

impl ChannelWeights {
    pub fn weight(&self, channel: Channel) -> f64 {
        self.0.get(&channel).copied().unwrap_or(0.0)
    }
}

/// Per-bucket value of one indicator with channels merged by weight.
///
/// Each channel is first averaged within the bucket; channel means are then
/// combined with weights renormalized over the channels present.
pub fn channel_weighted_buckets<'a>(
    records: impl IntoIterator<Item = &'a ScoreRecord>,
    weights: &ChannelWeights,
    frequency: Frequency,
) -> BTreeMap<NaiveDate, f64> {
    let mut cells: BTreeMap<NaiveDate, BTreeMap<Channel, (f64, usize)>> = BTreeMap::new();
    for r in records {
        let cell = cells
            .entry(frequency.bucket(r.date))
            .or_default()
            .entry(r.channel)
            .or_insert((0.0, 0));
        cell.0 += r.value;
        cell.1 += 1;
    }
    cells
        .into_iter()
        .filter_map(|(date, by_channel)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (channel, (sum, n)) in by_channel {
                let w = weights.weight(channel);
                num += w * sum / n as f64;
                den += w;
            }
            (den > 0.0).then(|| (date, num / den))
        })
        .collect()
}

/// Z-score with sample standard deviation; a constant input maps to zeros.
fn standardize_or_zero(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let sd = var.sqrt();
    if sd <= f64::EPSILON * mean.abs().max(1.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Equal-weight average of the standardized `indicators`.
///
/// Channels are merged per bucket with `weights`, each indicator is
/// z-scored over the full sample (a constant indicator contributes zeros),
/// and the average is taken over the dates shared by every indicator.
pub fn aggregate_sentiment(
    records: &[ScoreRecord],
    indicators: &[&str],
    weights: &ChannelWeights,
    frequency: Frequency,
) -> Result<TimeSeries> {
    let present: BTreeSet<&str> = records.iter().map(|r| r.indicator.as_str()).collect();
    let missing: Vec<String> = indicators
        .iter()
        .filter(|name| !present.contains(**name))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIndicators(missing));
    }

    let mut standardized: Vec<BTreeMap<NaiveDate, f64>> = Vec::with_capacity(indicators.len());
    for name in indicators {
        let buckets = channel_weighted_buckets(
            records.iter().filter(|r| r.indicator == *name),
            weights,
            frequency,
        );
        let values: Vec<f64> = buckets.values().copied().collect();
        let z = standardize_or_zero(&values);
        standardized.push(buckets.keys().copied().zip(z).collect());
    }

    let mut common: BTreeSet<NaiveDate> = standardized[0].keys().copied().collect();
    for s in &standardized[1..] {
        common.retain(|d| s.contains_key(d));
    }
    if common.is_empty() {
        return Err(Error::InsufficientData(
            "indicators share no calendar bucket".into(),
        ));
    }
    let k = indicators.len() as f64;
    let points = common
        .into_iter()
        .map(|d| (d, standardized.iter().map(|s| s[&d]).sum::<f64>() / k))
        .collect();
    TimeSeries::new("aggregate_sentiment", frequency, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::default_shifters;
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument::from_tokens("d", tokens)
    }

    fn good_bad() -> SentimentLexicon {
        SentimentLexicon::new(
            "gb",
            [
                ("good", SentimentClass::Positive),
                ("strong", SentimentClass::Positive),
                ("bad", SentimentClass::Negative),
                ("uncertain", SentimentClass::Uncertainty),
            ],
        )
        .unwrap()
    }

    fn shifters(boost: f64) -> ValenceShifterTable {
        let mut t = ValenceShifterTable::default();
        t.add("not", ShifterKind::Negator, None).unwrap();
        t.add("very", ShifterKind::Amplifier, Some(boost)).unwrap();
        t.add("somewhat", ShifterKind::Deamplifier, Some(0.5)).unwrap();
        t
    }

    fn polarity(tokens: &[&str]) -> f64 {
        let lex = good_bad();
        polarity_score(&doc(tokens), PolarityLexicon::Classes(&lex), &shifters(0.8))
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(ratio_score(3, 1), 0.75);
        assert_eq!(ratio_score(0, 0), 0.5);
        for k in 1..50 {
            assert_eq!(ratio_score(k, k), 0.5);
        }
    }

    #[test]
    fn net_examples() {
        assert_eq!(net_score(0, 0, 100).unwrap(), 0.0);
        assert!((net_score(5, 2, 100).unwrap() - 0.03).abs() < 1e-15);
        assert!(matches!(net_score(1, 0, 0), Err(Error::EmptyDocument)));
    }

    #[test]
    fn uncertainty_examples() {
        assert_eq!(uncertainty_ratio(0, 400).unwrap(), 0.0);
        assert_eq!(uncertainty_ratio(4, 400).unwrap(), 0.01);
        assert!(uncertainty_ratio(4, 0).is_err());
    }

    #[test]
    fn shifter_canonical_cases() {
        assert_eq!(polarity(&["good"]), 1.0);
        assert_eq!(polarity(&["not", "good"]), -1.0);
        assert_eq!(polarity(&["very", "good"]), 1.8);
        assert_eq!(polarity(&["somewhat", "good"]), 0.5);
        assert_eq!(polarity(&["not", "not", "good"]), 1.0);
        assert_eq!(polarity(&["very", "bad"]), -1.8);
        assert_eq!(polarity(&["not", "very", "bad"]), 1.8);
    }

    #[test]
    fn shifter_window_is_three_tokens() {
        assert_eq!(polarity(&["not", "a", "b", "good"]), -1.0);
        assert_eq!(polarity(&["not", "a", "b", "c", "good"]), 1.0);
    }

    #[test]
    fn shifters_stop_at_sentence_boundary() {
        let d = crate::corpus::tokenize_text("d", "It is not. Good times.", &Default::default());
        let lex = good_bad();
        assert_eq!(polarity_score(&d, PolarityLexicon::Classes(&lex), &shifters(0.8)), 1.0);
    }

    #[test]
    fn polarity_averages_over_matches() {
        // (+1 + -1.8) / 2
        assert!((polarity(&["good", "x", "x", "x", "very", "bad"]) + 0.4).abs() < 1e-12);
        assert_eq!(polarity(&[]), 0.0);
        assert_eq!(polarity(&["uncertain", "x"]), 0.0);
    }

    #[test]
    fn weighted_polarity() {
        let lex = WeightedLexicon::new("w", [("calm", 0.4), ("panic", -0.9)]).unwrap();
        let d = doc(&["very", "calm", "panic"]);
        let v = polarity_score(&d, PolarityLexicon::Weighted(&lex), &shifters(0.5));
        // calm: 0.4 * 1.5 = 0.6; panic: window [very, calm] amplifies -> -1.35
        assert!((v - (0.6 - 1.35) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn shipped_shifters_apply() {
        let lex = good_bad();
        let d = doc(&["growth", "remained", "very", "strong"]);
        assert_eq!(
            polarity_score(&d, PolarityLexicon::Classes(&lex), &default_shifters()),
            1.8
        );
    }

    #[test]
    fn net_is_antisymmetric_under_class_swap() {
        let lex = good_bad();
        let ind = Indicator::new("net", IndicatorKind::Net(lex.clone()));
        let swapped = Indicator::new("net", IndicatorKind::Net(lex.swapped()));
        let d = doc(&["good", "bad", "bad", "x", "strong", "bad", "x"]);
        assert_eq!(ind.score(&d).unwrap(), -swapped.score(&d).unwrap());
    }

    #[test]
    fn term_indicator() {
        let d = doc(&["quantitative", "easing", "and", "forward", "guidance"]);
        let raw = Indicator::new(
            "ump",
            IndicatorKind::Terms {
                lexicon: crate::lexicon::ump_terms(),
                per_token: false,
            },
        );
        assert_eq!(raw.score(&d).unwrap(), 2.0);
        let scaled = Indicator::new(
            "ump",
            IndicatorKind::Terms {
                lexicon: crate::lexicon::ump_terms(),
                per_token: true,
            },
        );
        assert_eq!(scaled.score(&d).unwrap(), 0.4);
    }

    fn rec(ind: &str, date: &str, channel: Channel, value: f64) -> ScoreRecord {
        ScoreRecord {
            doc_id: format!("{ind}-{date}-{channel}"),
            date: crate::calendar::parse_date(date).unwrap(),
            channel,
            indicator: ind.to_string(),
            value,
        }
    }

    const DATES: [&str; 5] = [
        "2020-01-06",
        "2020-01-13",
        "2020-01-20",
        "2020-01-27",
        "2020-02-03",
    ];

    #[test]
    fn constant_indicators_aggregate_to_zero() {
        let records: Vec<ScoreRecord> = AGGREGATE_INDICATORS
            .iter()
            .enumerate()
            .flat_map(|(i, ind)| DATES.iter().map(move |d| rec(ind, d, Channel::Speech, i as f64)))
            .collect();
        let agg = aggregate_sentiment(
            &records,
            &AGGREGATE_INDICATORS,
            &ChannelWeights::default(),
            Frequency::Weekly,
        )
        .unwrap();
        assert_eq!(agg.len(), 5);
        assert!(agg.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_trend_is_divided_by_eight() {
        let records: Vec<ScoreRecord> = AGGREGATE_INDICATORS
            .iter()
            .enumerate()
            .flat_map(|(i, ind)| {
                DATES.iter().enumerate().map(move |(t, d)| {
                    let v = if i == 0 { t as f64 + 1.0 } else { 0.25 };
                    rec(ind, d, Channel::Minutes, v)
                })
            })
            .collect();
        let agg = aggregate_sentiment(
            &records,
            &AGGREGATE_INDICATORS,
            &ChannelWeights::default(),
            Frequency::Weekly,
        )
        .unwrap();
        // z of 1..5 is (t - 3)/sqrt(2.5); divided by 8
        let expected = [-0.158113883008419, -0.0790569415042095, 0.0, 0.0790569415042095, 0.158113883008419];
        for (got, want) in agg.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn missing_indicator_is_listed() {
        let records = vec![rec("lm_score", "2020-01-06", Channel::Speech, 0.5)];
        match aggregate_sentiment(&records, &AGGREGATE_INDICATORS, &ChannelWeights::default(), Frequency::Weekly) {
            Err(Error::MissingIndicators(names)) => {
                assert_eq!(names.len(), 7);
                assert!(names.contains(&"fss".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn channel_weighting() {
        let records = vec![
            rec("x", "2020-01-06", Channel::Announcement, 1.0),
            rec("x", "2020-01-07", Channel::Speech, 0.0),
            rec("x", "2020-01-08", Channel::Speech, 0.5),
            rec("x", "2020-01-13", Channel::Minutes, 0.2),
        ];
        let b = channel_weighted_buckets(&records, &ChannelWeights::default(), Frequency::Weekly);
        let v: Vec<f64> = b.values().copied().collect();
        // week 1: (3*1.0 + 1*0.25) / 4
        assert!((v[0] - 0.8125).abs() < 1e-15);
        assert!((v[1] - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ratio_matches_fraction(pos in 0usize..10_000, neg in 0usize..10_000) {
            let expected = if pos + neg == 0 { 0.5 } else { pos as f64 / (pos + neg) as f64 };
            prop_assert!((ratio_score(pos, neg) - expected).abs() <= 1e-12);
        }

        #[test]
        fn ratio_is_scale_invariant(pos in 0usize..1000, neg in 0usize..1000, c in 1usize..50) {
            prop_assert_eq!(ratio_score(pos, neg), ratio_score(c * pos, c * neg));
        }

        #[test]
        fn neutral_sentences_do_not_change_polarity(
            words in proptest::collection::vec(prop_oneof!["good", "bad", "not", "very", "x", "somewhat"], 0..30),
            extra in 1usize..4,
        ) {
            let lex = good_bad();
            let text: String = words.join(" ") + ".";
            let base = crate::corpus::tokenize_text("d", &text, &Default::default());
            let padded_text = format!("{text}{}", " filler words here.".repeat(extra));
            let padded = crate::corpus::tokenize_text("d", &padded_text, &Default::default());
            let sh = shifters(0.8);
            prop_assert_eq!(
                polarity_score(&base, PolarityLexicon::Classes(&lex), &sh),
                polarity_score(&padded, PolarityLexicon::Classes(&lex), &sh)
            );
        }
    }
}
