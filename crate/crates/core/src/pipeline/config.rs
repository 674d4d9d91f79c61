use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::calendar::{DateRange, Frequency};
use crate::corpus::Channel;
use crate::error::{Error, Result};
use crate::sentiment::{ChannelWeights, AGGREGATE_INDICATORS};
use crate::timeseries::Aggregation;
use crate::topics::{DEFAULT_BETA, DEFAULT_ITERATIONS, DEFAULT_TOP_N};

pub const AGGREGATE_NAME: &str = "aggregate_sentiment";

/// Everything a run needs, read from one TOML file. Relative paths are
/// resolved against the directory holding the file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_frequency")]
    pub frequency: Frequency,
    pub corpus: CorpusConfig,
    /// Valence shifter table; the built-in one when absent.
    pub shifters: Option<PathBuf>,
    #[serde(default)]
    pub lexicons: BTreeMap<String, LexiconConfig>,
    #[serde(default)]
    pub indicators: Vec<IndicatorConfig>,
    /// Channel weights for merged series, e.g. `{ announcement = 3.0 }`.
    pub channel_weights: Option<BTreeMap<String, f64>>,
    /// Indicators averaged into `aggregate_sentiment`.
    pub aggregate: Option<Vec<String>>,
    #[serde(default)]
    pub external: Vec<ExternalConfig>,
    #[serde(default)]
    pub crises: Vec<CrisisConfig>,
    /// Two-column `start,end` file of recession windows.
    pub nber: Option<PathBuf>,
    pub topics: Option<TopicsConfig>,
    pub econ: Option<EconConfig>,
    #[serde(default)]
    pub figures: FiguresConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub root: PathBuf,
    pub manifest: PathBuf,
    #[serde(default, deserialize_with = "opt_date")]
    pub start: Option<NaiveDate>,
    #[serde(default, deserialize_with = "opt_date")]
    pub end: Option<NaiveDate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconFormat {
    /// `word,class` rows.
    Sentiment,
    /// `word,weight` rows.
    Weighted,
    /// One term per line, `*` marking a root.
    Terms,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconConfig {
    pub format: LexiconFormat,
    pub path: Option<PathBuf>,
    /// `ump` or `covid` for the shipped term lists.
    pub builtin: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKindConfig {
    Ratio,
    Net,
    Uncertainty,
    Polarity,
    Terms,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    pub name: String,
    pub kind: IndicatorKindConfig,
    pub lexicon: String,
    #[serde(default = "yes")]
    pub shifters: bool,
    #[serde(default)]
    pub per_token: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_date_col")]
    pub date_col: String,
    pub value_col: String,
    /// Downsampling: `last` for market levels, `sum` for flows.
    #[serde(default)]
    pub policy: Aggregation,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrisisConfig {
    pub label: String,
    #[serde(deserialize_with = "date")]
    pub start: NaiveDate,
    #[serde(deserialize_with = "date")]
    pub end: NaiveDate,
}

impl CrisisConfig {
    pub fn range(&self) -> DateRange {
        DateRange {
            start: self.start,
            end: self.end,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicsConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    pub alpha: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "one")]
    pub min_count: usize,
    #[serde(default)]
    pub stop_words: Vec<String>,
    pub stop_words_path: Option<PathBuf>,
    /// KL permutation test draws; 0 disables the test.
    #[serde(default)]
    pub permutations: usize,
    pub slices: Vec<SliceConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub name: String,
    /// Empty means every channel.
    #[serde(default)]
    pub channels: Vec<String>,
    pub k: Option<usize>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl SliceConfig {
    pub fn channel_set(&self) -> Vec<Channel> {
        if self.channels.is_empty() {
            return Channel::ALL.to_vec();
        }
        self.channels.iter().filter_map(|c| c.parse().ok()).collect()
    }

    /// 6 topics for a single channel, 10 for pooled slices.
    pub fn topic_count(&self) -> usize {
        self.k.unwrap_or(if self.channel_set().len() == 1 { 6 } else { 10 })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DifferenceConfig {
    /// `"auto"`: difference whatever ADF cannot reject a unit root for.
    Mode(String),
    List(Vec<String>),
}

impl Default for DifferenceConfig {
    fn default() -> Self {
        DifferenceConfig::List(Vec::new())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrangerMode {
    #[default]
    Bivariate,
    Block,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrangerConfig {
    pub cause: String,
    pub effect: String,
    pub lag: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconConfig {
    pub variables: Vec<String>,
    #[serde(default)]
    pub difference: DifferenceConfig,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    /// Fixed VAR lag; BIC-selected when absent.
    pub lag: Option<usize>,
    #[serde(default = "default_p_max")]
    pub adf_max_lag: usize,
    #[serde(default)]
    pub granger: Vec<GrangerConfig>,
    #[serde(default)]
    pub granger_mode: GrangerMode,
    #[serde(default = "default_trim")]
    pub break_trim: f64,
    #[serde(default)]
    pub break_indicators: Vec<String>,
    /// Pairs of crisis labels whose break magnitudes are compared.
    #[serde(default)]
    pub welch: Vec<[String; 2]>,
    #[serde(default)]
    pub correlations: Vec<[String; 2]>,
}

impl EconConfig {
    pub fn auto_difference(&self) -> bool {
        matches!(&self.difference, DifferenceConfig::Mode(m) if m == "auto")
    }

    pub fn differenced(&self) -> &[String] {
        match &self.difference {
            DifferenceConfig::List(v) => v,
            DifferenceConfig::Mode(_) => &[],
        }
    }
}

/// Which series feed the plot-ready tables.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiguresConfig {
    pub sentiment: Vec<String>,
    pub fss: String,
    pub ump: String,
    pub covid: String,
    pub uncertainty: String,
    pub vix: String,
    pub cases: String,
    pub assets: String,
    pub ffr: String,
    pub neer: String,
    pub unemployment: String,
    /// Topic slice used for the per-crisis topic table.
    pub topic_slice: String,
    /// Crisis windows shown in the per-crisis topic table; all when empty.
    pub topic_crises: Vec<String>,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        let s = |v: &str| v.to_string();
        Self {
            sentiment: vec![
                s("lm_score"),
                s("lm_uncertainty"),
                s("lm_polarity"),
                s("huliu_polarity"),
                s("jockers_polarity"),
                s("nrc_polarity"),
                s("sentiwords_polarity"),
                s("ump_sentiment"),
                s("fss"),
            ],
            fss: s("fss"),
            ump: s("ump_terms"),
            covid: s("covid_terms"),
            uncertainty: s("lm_uncertainty"),
            vix: s("vix"),
            cases: s("covid_cases"),
            assets: s("fed_assets"),
            ffr: s("ffr"),
            neer: s("neer"),
            unemployment: s("unemployment"),
            topic_slice: s("announcement"),
            topic_crises: Vec::new(),
        }
    }
}

/// A bare TOML date (`2020-03-01`) or the same text quoted.
#[derive(Deserialize)]
#[serde(untagged)]
enum DateValue {
    Toml(toml::value::Datetime),
    Text(String),
}

impl DateValue {
    fn into_date<E: serde::de::Error>(self) -> std::result::Result<NaiveDate, E> {
        let text = match self {
            DateValue::Toml(dt) => match (dt.date, dt.time) {
                (Some(d), None) => d.to_string(),
                _ => return Err(E::custom(format!("expected a date without time, got {dt}"))),
            },
            DateValue::Text(s) => s,
        };
        NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").map_err(|e| E::custom(format!("bad date {text:?}: {e}")))
    }
}

fn date<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<NaiveDate, D::Error> {
    DateValue::deserialize(d)?.into_date()
}

fn opt_date<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<NaiveDate>, D::Error> {
    Option::<DateValue>::deserialize(d)?.map(DateValue::into_date).transpose()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_frequency() -> Frequency {
    Frequency::Weekly
}
fn default_date_col() -> String {
    "date".into()
}
fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_top_n() -> usize {
    DEFAULT_TOP_N
}
fn default_p_max() -> usize {
    4
}
fn default_trim() -> f64 {
    crate::econometrics::DEFAULT_TRIM
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}

/// A series reference: an indicator (optionally `name@channel`), the
/// aggregate sentiment, or an external series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariableRef {
    Indicator { name: String, channel: Option<Channel> },
    Aggregate,
    External(usize),
}

/// Overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with(path, &Overrides::default())
    }

    /// Like [`RunConfig::load`], with command-line overrides applied before
    /// validation.
    pub fn load_with(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_with(&text, &base, overrides)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        Self::from_toml_with(text, base_dir, &Overrides::default())
    }

    pub fn from_toml_with(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let message = e.inner().message().trim().to_string();
            Error::config(if field == "." { "<root>".into() } else { field }, message)
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.resolve_paths();
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(out) = &overrides.output_dir {
            self.output_dir = out.clone();
        }
    }

    fn resolve_paths(&mut self) {
        let base = self.base_dir.clone();
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.corpus.root);
        fix(&mut self.corpus.manifest);
        self.shifters.iter_mut().for_each(fix);
        self.nber.iter_mut().for_each(fix);
        for lex in self.lexicons.values_mut() {
            lex.path.iter_mut().for_each(fix);
        }
        for ext in &mut self.external {
            fix(&mut ext.path);
        }
        if let Some(t) = &mut self.topics {
            t.stop_words_path.iter_mut().for_each(fix);
        }
    }

    /// Path relative to the config directory when possible, for manifests.
    pub fn display_path(&self, path: &Path) -> String {
        path.strip_prefix(&self.base_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    pub fn sample_window(&self) -> Option<DateRange> {
        match (self.corpus.start, self.corpus.end) {
            (None, None) => None,
            (start, end) => Some(DateRange {
                start: start.unwrap_or(NaiveDate::MIN),
                end: end.unwrap_or(NaiveDate::MAX),
            }),
        }
    }

    pub fn channel_weights(&self) -> ChannelWeights {
        match &self.channel_weights {
            None => ChannelWeights::default(),
            Some(map) => ChannelWeights(
                map.iter()
                    .filter_map(|(k, v)| k.parse::<Channel>().ok().map(|c| (c, *v)))
                    .collect(),
            ),
        }
    }

    /// Indicators averaged into the aggregate; by default the standard
    /// eight when all are configured.
    pub fn aggregate_indicators(&self) -> Vec<String> {
        match &self.aggregate {
            Some(list) => list.clone(),
            None => {
                let names: BTreeSet<&str> = self.indicators.iter().map(|i| i.name.as_str()).collect();
                if AGGREGATE_INDICATORS.iter().all(|n| names.contains(n)) {
                    AGGREGATE_INDICATORS.iter().map(|s| s.to_string()).collect()
                } else {
                    Vec::new()
                }
            }
        }
    }

    pub fn indicator(&self, name: &str) -> Option<&IndicatorConfig> {
        self.indicators.iter().find(|i| i.name == name)
    }

    pub fn crisis(&self, label: &str) -> Option<&CrisisConfig> {
        self.crises.iter().find(|c| c.label == label)
    }

    pub fn resolve_variable(&self, name: &str) -> Option<VariableRef> {
        if name == AGGREGATE_NAME {
            return (!self.aggregate_indicators().is_empty()).then_some(VariableRef::Aggregate);
        }
        if let Some((ind, channel)) = name.split_once('@') {
            let channel = channel.parse::<Channel>().ok()?;
            return self.indicator(ind).map(|_| VariableRef::Indicator {
                name: ind.to_string(),
                channel: Some(channel),
            });
        }
        if self.indicator(name).is_some() {
            return Some(VariableRef::Indicator {
                name: name.to_string(),
                channel: None,
            });
        }
        self.external.iter().position(|e| e.name == name).map(VariableRef::External)
    }

    fn validate(&self) -> Result<()> {
        let need_file = |field: &str, p: &Path| -> Result<()> {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::config(field, format!("file not found: {}", p.display())))
            }
        };

        if !self.corpus.root.is_dir() {
            return Err(Error::config(
                "corpus.root",
                format!("directory not found: {}", self.corpus.root.display()),
            ));
        }
        need_file("corpus.manifest", &self.corpus.manifest)?;
        if let (Some(s), Some(e)) = (self.corpus.start, self.corpus.end) {
            if e < s {
                return Err(Error::config("corpus.end", "ends before corpus.start"));
            }
        }
        if let Some(p) = &self.shifters {
            need_file("shifters", p)?;
        }
        if let Some(p) = &self.nber {
            need_file("nber", p)?;
        }

        for (name, lex) in &self.lexicons {
            let field = format!("lexicons.{name}");
            match (&lex.path, &lex.builtin) {
                (Some(p), None) => need_file(&format!("{field}.path"), p)?,
                (None, Some(b)) => {
                    if lex.format != LexiconFormat::Terms || !matches!(b.as_str(), "ump" | "covid") {
                        return Err(Error::config(
                            format!("{field}.builtin"),
                            "built-in lexicons are the `ump` and `covid` term lists (format = \"terms\")",
                        ));
                    }
                }
                (None, None) => return Err(Error::config(format!("{field}.path"), "missing lexicon path")),
                (Some(_), Some(_)) => {
                    return Err(Error::config(field, "give either `path` or `builtin`, not both"));
                }
            }
        }

        let mut names = BTreeSet::new();
        for (i, ind) in self.indicators.iter().enumerate() {
            let field = format!("indicators[{i}]");
            if ind.name.is_empty() || ind.name.contains('@') || ind.name.contains(',') || ind.name == AGGREGATE_NAME {
                return Err(Error::config(format!("{field}.name"), format!("invalid name {:?}", ind.name)));
            }
            if !names.insert(ind.name.as_str()) {
                return Err(Error::config(format!("{field}.name"), format!("duplicate indicator {:?}", ind.name)));
            }
            let Some(lex) = self.lexicons.get(&ind.lexicon) else {
                return Err(Error::config(
                    format!("{field}.lexicon"),
                    format!("no lexicon named {:?}", ind.lexicon),
                ));
            };
            let ok = match ind.kind {
                IndicatorKindConfig::Ratio | IndicatorKindConfig::Net | IndicatorKindConfig::Uncertainty => {
                    lex.format == LexiconFormat::Sentiment
                }
                IndicatorKindConfig::Polarity => lex.format != LexiconFormat::Terms,
                IndicatorKindConfig::Terms => lex.format == LexiconFormat::Terms,
            };
            if !ok {
                return Err(Error::config(
                    format!("{field}.kind"),
                    format!("kind does not fit lexicon {:?}", ind.lexicon),
                ));
            }
            if ind.per_token && ind.kind != IndicatorKindConfig::Terms {
                return Err(Error::config(format!("{field}.per_token"), "only term indicators have per_token"));
            }
        }

        if let Some(weights) = &self.channel_weights {
            for (k, v) in weights {
                if k.parse::<Channel>().is_err() {
                    return Err(Error::config(format!("channel_weights.{k}"), "unknown channel"));
                }
                if !(*v >= 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("channel_weights.{k}"), "weights must be nonnegative"));
                }
            }
            if !weights.values().any(|&v| v > 0.0) {
                return Err(Error::config("channel_weights", "at least one weight must be positive"));
            }
        }
        if let Some(list) = &self.aggregate {
            for (i, n) in list.iter().enumerate() {
                if self.indicator(n).is_none() {
                    return Err(Error::config(format!("aggregate[{i}]"), format!("unknown indicator {n:?}")));
                }
            }
        }

        for (i, ext) in self.external.iter().enumerate() {
            let field = format!("external[{i}]");
            if ext.name.is_empty() || ext.name.contains('@') || ext.name == AGGREGATE_NAME {
                return Err(Error::config(format!("{field}.name"), format!("invalid name {:?}", ext.name)));
            }
            if !names.insert(ext.name.as_str()) {
                return Err(Error::config(format!("{field}.name"), format!("name {:?} already used", ext.name)));
            }
            need_file(&format!("{field}.path"), &ext.path)?;
        }

        let mut labels = BTreeSet::new();
        for (i, c) in self.crises.iter().enumerate() {
            if c.end < c.start {
                return Err(Error::config(format!("crises[{i}].end"), "ends before start"));
            }
            if !labels.insert(c.label.as_str()) {
                return Err(Error::config(format!("crises[{i}].label"), format!("duplicate label {:?}", c.label)));
            }
        }

        if let Some(t) = &self.topics {
            self.validate_topics(t)?;
        }
        if let Some(e) = &self.econ {
            self.validate_econ(e)?;
        }
        Ok(())
    }

    fn validate_topics(&self, t: &TopicsConfig) -> Result<()> {
        if self.seed.is_none() {
            return Err(Error::config("seed", "a seed is required when topics are configured"));
        }
        if t.iterations == 0 {
            return Err(Error::config("topics.iterations", "must be >= 1"));
        }
        if t.top_n < 2 {
            return Err(Error::config("topics.top_n", "must be >= 2"));
        }
        if !(t.beta.is_finite() && t.beta > 0.0) || t.alpha.is_some_and(|a| !(a.is_finite() && a > 0.0)) {
            return Err(Error::config("topics.beta", "priors must be positive"));
        }
        if let Some(p) = &t.stop_words_path {
            if !p.is_file() {
                return Err(Error::config("topics.stop_words_path", format!("file not found: {}", p.display())));
            }
        }
        if t.slices.is_empty() {
            return Err(Error::config("topics.slices", "at least one slice is required"));
        }
        let mut names = BTreeSet::new();
        for (i, s) in t.slices.iter().enumerate() {
            let field = format!("topics.slices[{i}]");
            if s.name.is_empty() || !names.insert(s.name.as_str()) {
                return Err(Error::config(format!("{field}.name"), format!("missing or duplicate name {:?}", s.name)));
            }
            for (j, c) in s.channels.iter().enumerate() {
                if c.parse::<Channel>().is_err() {
                    return Err(Error::config(format!("{field}.channels[{j}]"), format!("unknown channel {c:?}")));
                }
            }
            if s.topic_count() < 2 {
                return Err(Error::config(format!("{field}.k"), "must be >= 2"));
            }
            if s.labels.len() > s.topic_count() {
                return Err(Error::config(format!("{field}.labels"), "more labels than topics"));
            }
        }
        Ok(())
    }

    fn validate_econ(&self, e: &EconConfig) -> Result<()> {
        let known = |field: String, name: &str| -> Result<()> {
            if self.resolve_variable(name).is_some() {
                Ok(())
            } else {
                Err(Error::config(field, format!("unknown series {name:?}")))
            }
        };
        if e.variables.len() < 2 {
            return Err(Error::config("econ.variables", "need at least two variables"));
        }
        let vars: BTreeSet<&str> = e.variables.iter().map(String::as_str).collect();
        if vars.len() != e.variables.len() {
            return Err(Error::config("econ.variables", "duplicate variable"));
        }
        for (i, v) in e.variables.iter().enumerate() {
            known(format!("econ.variables[{i}]"), v)?;
        }
        match &e.difference {
            DifferenceConfig::Mode(m) if m != "auto" => {
                return Err(Error::config("econ.difference", "expected \"auto\" or a list of variables"));
            }
            DifferenceConfig::List(list) => {
                for (i, v) in list.iter().enumerate() {
                    if !vars.contains(v.as_str()) {
                        return Err(Error::config(format!("econ.difference[{i}]"), format!("{v:?} is not a VAR variable")));
                    }
                }
            }
            _ => {}
        }
        if e.p_max == 0 {
            return Err(Error::config("econ.p_max", "must be >= 1"));
        }
        if e.lag == Some(0) {
            return Err(Error::config("econ.lag", "must be >= 1"));
        }
        for (i, g) in e.granger.iter().enumerate() {
            for (field, v) in [("cause", &g.cause), ("effect", &g.effect)] {
                if !vars.contains(v.as_str()) {
                    return Err(Error::config(format!("econ.granger[{i}].{field}"), format!("{v:?} is not a VAR variable")));
                }
            }
            if g.cause == g.effect {
                return Err(Error::config(format!("econ.granger[{i}]"), "identical variable"));
            }
            if g.lag == Some(0) {
                return Err(Error::config(format!("econ.granger[{i}].lag"), "must be >= 1"));
            }
        }
        if !(0.05..=0.25).contains(&e.break_trim) {
            return Err(Error::config("econ.break_trim", "must lie in [0.05, 0.25]"));
        }
        for (i, v) in e.break_indicators.iter().enumerate() {
            known(format!("econ.break_indicators[{i}]"), v)?;
        }
        for (i, pair) in e.welch.iter().enumerate() {
            for (j, label) in pair.iter().enumerate() {
                if self.crisis(label).is_none() {
                    return Err(Error::config(format!("econ.welch[{i}][{j}]"), format!("unknown crisis {label:?}")));
                }
            }
        }
        for (i, pair) in e.correlations.iter().enumerate() {
            for (j, v) in pair.iter().enumerate() {
                known(format!("econ.correlations[{i}][{j}]"), v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("docs")).unwrap();
        std::fs::write(dir.path().join("manifest.csv"), "id,channel,date,filename\n").unwrap();
        std::fs::write(dir.path().join("lm.csv"), "good,positive\n").unwrap();
        dir
    }

    const BASE: &str = r#"
        [corpus]
        root = "docs"
        manifest = "manifest.csv"
        [lexicons.lm]
        format = "sentiment"
        path = "lm.csv"
        [lexicons.ump]
        format = "terms"
        builtin = "ump"
        [[indicators]]
        name = "lm_score"
        kind = "ratio"
        lexicon = "lm"
        [[indicators]]
        name = "ump_terms"
        kind = "terms"
        lexicon = "ump"
    "#;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_loads() {
        let dir = setup();
        let cfg = RunConfig::from_toml(BASE, dir.path()).unwrap();
        assert_eq!(cfg.frequency, Frequency::Weekly);
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(
            cfg.resolve_variable("lm_score@minutes"),
            Some(VariableRef::Indicator {
                name: "lm_score".into(),
                channel: Some(Channel::Minutes)
            })
        );
        assert_eq!(cfg.resolve_variable("vix"), None);
    }

    #[test]
    fn missing_lexicon_file_names_the_field() {
        let dir = setup();
        std::fs::remove_file(dir.path().join("lm.csv")).unwrap();
        let err = RunConfig::from_toml(BASE, dir.path()).unwrap_err();
        assert!(err.is_config());
        assert_eq!(field_of(err), "lexicons.lm.path");
    }

    #[test]
    fn type_errors_carry_the_path() {
        let dir = setup();
        let text = BASE.replace("kind = \"ratio\"", "kind = \"sideways\"");
        assert_eq!(field_of(RunConfig::from_toml(&text, dir.path()).unwrap_err()), "indicators[0].kind");
        let text = format!("frequency = 3\n{BASE}");
        assert_eq!(field_of(RunConfig::from_toml(&text, dir.path()).unwrap_err()), "frequency");
    }

    #[test]
    fn semantic_errors() {
        let dir = setup();
        let text = BASE.replace("lexicon = \"ump\"", "lexicon = \"lm\"");
        assert_eq!(field_of(RunConfig::from_toml(&text, dir.path()).unwrap_err()), "indicators[1].kind");
        let text = format!("{BASE}\n[topics]\n[[topics.slices]]\nname = \"a\"\n");
        assert_eq!(field_of(RunConfig::from_toml(&text, dir.path()).unwrap_err()), "seed");
        let text = format!("seed = 1\n{BASE}\n[econ]\nvariables = [\"lm_score\", \"nope\"]\n");
        assert_eq!(field_of(RunConfig::from_toml(&text, dir.path()).unwrap_err()), "econ.variables[1]");
    }
}
