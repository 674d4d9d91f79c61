use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::calendar::DateRange;
use crate::corpus::{Channel, Corpus};
use crate::econometrics::{
    adf_test, compare_break_magnitudes, detect_break_in_series, fit_var, format_p_value, granger_test,
    granger_test_block, kpss_test, select_lag_bic, BreakResult, GrangerResult, UnitRootResult, VarData,
};
use crate::error::{Error, Result};
use crate::lexicon::match_terms;
use crate::timeseries::{align, correlation_of_pairs, Join, TimeSeries};
use crate::topics::{
    fit_lda, kl_divergence, kl_permutation_test, npmi_coherence, period_topic_distribution, write_phi,
    write_coherence, write_theta, LdaParams, PeriodTopicDistribution, TopicModel,
};

use super::config::{GrangerMode, RunConfig, SliceConfig};
use super::figures;
use super::output::{fmt_fixed, fmt_value, sha256_bytes, sha256_file, OutputDir};
use super::workspace::{LoadedLexicon, Workspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Score,
    Topics,
    Counts,
    Series,
    Econ,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Ingest,
        Command::Score,
        Command::Topics,
        Command::Counts,
        Command::Series,
        Command::Econ,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Score => "score",
            Command::Topics => "topics",
            Command::Counts => "counts",
            Command::Series => "series",
            Command::Econ => "econ",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command {s:?}")))
    }
}

/// Runs `command`, writing into the configured output directory.
/// Returns the files written, relative to that directory.
pub fn run(command: Command, config: &RunConfig, force: bool) -> Result<Vec<String>> {
    let mut out = OutputDir::new(&config.output_dir, force)?;
    let mut ws = Workspace::new(config);
    match command {
        Command::Ingest => cmd_ingest(&mut ws, &mut out)?,
        Command::Score => cmd_score(&mut ws, &mut out)?,
        Command::Topics => {
            cmd_topics(&mut ws, &mut out)?;
        }
        Command::Counts => cmd_counts(&mut ws, &mut out)?,
        Command::Series => cmd_series(&mut ws, &mut out)?,
        Command::Econ => {
            cmd_econ(&mut ws, &mut out)?;
        }
        Command::Report => cmd_report(&mut ws, &mut out)?,
    }
    Ok(out.written().to_vec())
}

fn word_count(corpus: &Corpus, id: &str) -> usize {
    corpus.tokens(id).map_or(0, |t| t.len())
}

/// `corpus_summary.csv`: documents and mean word count per channel.
pub fn cmd_ingest(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let corpus = ws.corpus()?;
    let mut rows = Vec::new();
    let mut all = (0usize, 0usize);
    for channel in Channel::ALL {
        let words: Vec<usize> = corpus
            .documents
            .iter()
            .filter(|d| d.channel == channel)
            .map(|d| word_count(corpus, &d.id))
            .collect();
        let total: usize = words.iter().sum();
        all.0 += words.len();
        all.1 += total;
        rows.push(summary_row(channel.key(), words.len(), total));
    }
    rows.push(summary_row("all", all.0, all.1));
    out.write_table("corpus_summary.csv", &["channel", "texts", "words_average"], rows)
}

fn summary_row(label: &str, texts: usize, words: usize) -> Vec<String> {
    let avg = if texts == 0 { 0.0 } else { words as f64 / texts as f64 };
    vec![label.to_string(), texts.to_string(), fmt_fixed(avg, 1)]
}

/// `scores.csv` (long form) and `indicator_series.csv` (one column per
/// indicator and channel at the run frequency).
pub fn cmd_score(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let records = ws.records()?;
    let rows = records.iter().map(|r| {
        vec![
            r.doc_id.clone(),
            r.date.to_string(),
            r.channel.key().to_string(),
            r.indicator.clone(),
            fmt_value(Some(r.value)),
        ]
    });
    out.write_table("scores.csv", &["doc_id", "date", "channel", "indicator", "value"], rows.collect::<Vec<_>>())?;

    let mut names = Vec::new();
    for ind in &ws.config.indicators {
        names.push(ind.name.clone());
        for c in Channel::ALL {
            names.push(format!("{}@{}", ind.name, c.key()));
        }
    }
    write_panel(ws, out, "indicator_series.csv", &names)
}

/// Aligns the named series (outer join) and writes them with ISO dates.
fn write_panel(ws: &mut Workspace, out: &mut OutputDir, file: &str, names: &[String]) -> Result<()> {
    let mut series = Vec::new();
    for n in names {
        match ws.series(n) {
            Ok(s) => series.push(s),
            Err(Error::InsufficientData(msg)) => log::debug!("{file}: skipping {n}: {msg}"),
            Err(e) => return Err(e),
        }
    }
    if series.is_empty() {
        return Err(Error::InsufficientData(format!("{file}: no series to write")));
    }
    let refs: Vec<_> = series.iter().map(|s| (s, Default::default())).collect();
    let panel = align(&refs, ws.config.frequency, Join::Outer)?;
    out.write_with(file, |w| panel.write_csv(w))
}

/// `term_counts.csv`: per-document hits of every term lexicon.
pub fn cmd_counts(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let lexicons: Vec<(String, crate::lexicon::TermLexicon)> = ws
        .lexicons()?
        .iter()
        .filter_map(|(n, l)| match l {
            LoadedLexicon::Terms(t) => Some((n.clone(), t.clone())),
            _ => None,
        })
        .collect();
    if lexicons.is_empty() {
        return Err(Error::config("lexicons", "no term lexicon configured"));
    }
    let corpus = ws.corpus()?;
    let mut rows = Vec::new();
    for (doc, toks) in corpus.tokenized_in_order() {
        for (name, lex) in &lexicons {
            let m = match_terms(toks, lex);
            rows.push(vec![
                doc.id.clone(),
                doc.date.to_string(),
                doc.channel.key().to_string(),
                name.clone(),
                m.count.to_string(),
                toks.len().to_string(),
            ]);
        }
    }
    out.write_table("term_counts.csv", &["doc_id", "date", "channel", "lexicon", "count", "tokens"], rows)
}

/// `panel.csv`: every indicator, the aggregate and every external series on
/// one grid; `aggregate_sentiment.csv` when the aggregate is configured.
pub fn cmd_series(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let cfg = ws.config;
    let mut names: Vec<String> = cfg.indicators.iter().map(|i| i.name.clone()).collect();
    let has_aggregate = !cfg.aggregate_indicators().is_empty();
    if has_aggregate {
        names.push(super::config::AGGREGATE_NAME.to_string());
    }
    names.extend(cfg.external.iter().map(|e| e.name.clone()));
    write_panel(ws, out, "panel.csv", &names)?;
    if has_aggregate {
        let agg = ws.series(super::config::AGGREGATE_NAME)?;
        out.write_with("aggregate_sentiment.csv", |w| agg.write_csv(w))?;
    }
    Ok(())
}

/// A fitted slice with the sub-corpus it was fit on.
pub struct FittedSlice {
    pub config: SliceConfig,
    pub corpus: Corpus,
    pub model: TopicModel,
    pub periods: Vec<PeriodTopicDistribution>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceRecord {
    pub slice: String,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub documents: usize,
    pub vocabulary: usize,
}

fn read_stop_words(path: &std::path::Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// Per slice: phi, theta, coherence and crisis-period topic mixes; across
/// crisis pairs: `topics_kl.csv`.
pub fn cmd_topics(ws: &mut Workspace, out: &mut OutputDir) -> Result<Vec<FittedSlice>> {
    let cfg = ws.config;
    let Some(tc) = &cfg.topics else {
        return Err(Error::config("topics", "no [topics] section"));
    };
    let seed = cfg
        .seed
        .ok_or_else(|| Error::config("seed", "a seed is required when topics are configured"))?;
    let mut stop: BTreeSet<String> = tc.stop_words.iter().map(|w| w.to_lowercase()).collect();
    if let Some(p) = &tc.stop_words_path {
        stop.extend(read_stop_words(p)?);
    }
    let corpus = ws.corpus()?;

    let mut fitted = Vec::new();
    for (i, slice) in tc.slices.iter().enumerate() {
        let channels = slice.channel_set();
        let mut sub = corpus.filtered(|d| channels.contains(&d.channel));
        sub.build_vocab(tc.min_count)?;
        let k = slice.topic_count();
        let params = LdaParams {
            k,
            alpha: tc.alpha.unwrap_or(50.0 / k as f64),
            beta: tc.beta,
            iterations: tc.iterations,
            seed: seed.wrapping_add(i as u64),
            stop_words: stop.clone(),
        };
        let ctx = |e: Error| e.context(format!("topic slice `{}`", slice.name));
        let mut model = fit_lda(&sub, &params).map_err(ctx)?;
        model.set_labels(slice.labels.iter().cloned());
        log::info!("topics: slice {} fitted (K={k}, D={})", slice.name, sub.len());

        let prefix = format!("topics_{}", slice.name);
        out.write_with(&format!("{prefix}_phi.csv"), |w| write_phi(&model, w))?;
        out.write_with(&format!("{prefix}_theta.csv"), |w| write_theta(&model, w))?;
        let coherence = npmi_coherence(&model, &sub, tc.top_n).map_err(ctx)?;
        out.write_with(&format!("{prefix}_coherence.csv"), |w| write_coherence(&coherence, w))?;

        let mut periods = Vec::new();
        for crisis in &cfg.crises {
            match period_topic_distribution(&model, &sub, &crisis.range(), &crisis.label) {
                Ok(p) => periods.push(p),
                Err(Error::InsufficientData(msg)) => {
                    log::warn!("topics: slice {} has no documents in crisis {}: {msg}", slice.name, crisis.label)
                }
                Err(e) => return Err(ctx(e)),
            }
        }
        out.write_table(
            &format!("{prefix}_periods.csv"),
            &["crisis", "documents", "topic", "label", "prob"],
            periods.iter().flat_map(|p| {
                p.probs.iter().enumerate().map(|(t, v)| {
                    vec![p.label.clone(), p.n_docs.to_string(), t.to_string(), model.label(t), fmt_value(Some(*v))]
                })
            }),
        )?;
        fitted.push(FittedSlice {
            config: slice.clone(),
            corpus: sub,
            model,
            periods,
        });
    }

    let mut rows = Vec::new();
    for (i, f) in fitted.iter().enumerate() {
        for a in &f.periods {
            for b in &f.periods {
                if a.label == b.label {
                    continue;
                }
                let kl = kl_divergence(&a.probs, &b.probs)?;
                let p = if tc.permutations > 0 {
                    let (ra, rb) = (window(cfg, &a.label)?, window(cfg, &b.label)?);
                    let test = kl_permutation_test(
                        &f.model,
                        &f.corpus,
                        &ra,
                        &rb,
                        tc.permutations,
                        seed.wrapping_add(1000 + i as u64),
                    )?;
                    format_p_value(test.p_value)
                } else {
                    String::new()
                };
                rows.push(vec![f.config.name.clone(), a.label.clone(), b.label.clone(), fmt_fixed(kl, 6), p]);
            }
        }
    }
    out.write_table("topics_kl.csv", &["slice", "from", "to", "kl", "permutation_p"], rows)?;
    Ok(fitted)
}

fn window(cfg: &RunConfig, label: &str) -> Result<DateRange> {
    cfg.crisis(label)
        .map(|c| c.range())
        .ok_or_else(|| Error::InvalidArgument(format!("unknown crisis {label}")))
}

fn unit_root_row(variable: &str, transform: &str, r: &UnitRootResult) -> Vec<String> {
    vec![
        variable.to_string(),
        transform.to_string(),
        r.test.to_string(),
        fmt_fixed(r.statistic, 4),
        r.lags_used.to_string(),
        r.nobs.to_string(),
        fmt_fixed(r.critical_values[0], 4),
        fmt_fixed(r.critical_values[1], 4),
        fmt_fixed(r.critical_values[2], 4),
        r.p_band.to_string(),
        r.reject_at_5pct.to_string(),
    ]
}

fn first_difference(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Outputs of the econometrics stage kept for the report.
#[derive(Debug, Default)]
pub struct EconOutputs {
    pub breaks: Vec<(String, String, BreakResult)>,
    pub granger: Vec<GrangerResult>,
}

/// Unit roots, VAR, Granger tests, breaks and correlations.
pub fn cmd_econ(ws: &mut Workspace, out: &mut OutputDir) -> Result<EconOutputs> {
    let cfg = ws.config;
    let Some(ec) = &cfg.econ else {
        return Err(Error::config("econ", "no [econ] section"));
    };
    let freq = cfg.frequency;

    let mut level_series = Vec::new();
    for v in &ec.variables {
        level_series.push(ws.series(v).map_err(|e| e.context(format!("VAR variable `{v}`")))?);
    }
    let refs: Vec<(&TimeSeries, _)> = level_series.iter().map(|s| (s, Default::default())).collect();
    let panel = align(&refs, freq, Join::Inner).map_err(|e| e.context("aligning VAR variables"))?;
    let levels = VarData::from_panel(&panel)?;

    let mut unit_rows = Vec::new();
    let mut to_difference = Vec::new();
    for (name, col) in levels.names.iter().zip(&levels.columns) {
        let ctx = |e: Error| e.context(format!("unit-root tests on `{name}`"));
        let adf = adf_test(col, ec.adf_max_lag).map_err(ctx)?;
        let kpss = kpss_test(col).map_err(ctx)?;
        unit_rows.push(unit_root_row(name, "level", &adf));
        unit_rows.push(unit_root_row(name, "level", &kpss));
        let flagged = if ec.auto_difference() {
            !adf.reject_at_5pct
        } else {
            ec.differenced().contains(name)
        };
        if flagged {
            let d = first_difference(col);
            unit_rows.push(unit_root_row(name, "diff", &adf_test(&d, ec.adf_max_lag).map_err(ctx)?));
            unit_rows.push(unit_root_row(name, "diff", &kpss_test(&d).map_err(ctx)?));
            to_difference.push(name.clone());
        }
    }
    out.write_table(
        "unit_roots.csv",
        &["variable", "transform", "test", "statistic", "lags", "nobs", "cv_1pct", "cv_5pct", "cv_10pct", "p_band", "reject_5pct"],
        unit_rows,
    )?;

    let data = if to_difference.is_empty() {
        levels
    } else {
        let columns = levels
            .names
            .iter()
            .zip(&levels.columns)
            .map(|(n, c)| if to_difference.contains(n) { first_difference(c) } else { c[1..].to_vec() })
            .collect();
        VarData::new(levels.names.clone(), columns)?
    };

    let (lag, method) = match ec.lag {
        Some(l) => (l, "fixed"),
        None => (select_lag_bic(&data, ec.p_max).map_err(|e| e.context("BIC lag selection"))?, "bic"),
    };
    out.write_table(
        "var_lag.csv",
        &["method", "p_max", "lag", "rows", "differenced"],
        [vec![
            method.to_string(),
            ec.p_max.to_string(),
            lag.to_string(),
            data.n_rows().to_string(),
            to_difference.join(" "),
        ]],
    )?;
    let model = fit_var(&data, lag).map_err(|e| e.context("VAR estimation"))?;
    out.write_with("var_report.csv", |w| model.write_report(w))?;

    let mut granger = Vec::new();
    for g in &ec.granger {
        let k = g.lag.unwrap_or(lag);
        let r = match ec.granger_mode {
            GrangerMode::Bivariate => granger_test(&data, &g.cause, &g.effect, k),
            GrangerMode::Block => granger_test_block(&data, &g.cause, &g.effect, k),
        }
        .map_err(|e| e.context(format!("Granger {} -> {}", g.cause, g.effect)))?;
        granger.push(r);
    }
    out.write_with("granger.csv", |w| crate::econometrics::write_granger_report(&granger, w))?;

    let mut breaks = Vec::new();
    for crisis in &cfg.crises {
        for ind in &ec.break_indicators {
            let s = ws.series(ind)?;
            let window: Vec<_> = s.points().iter().copied().filter(|(d, _)| crisis.range().contains(*d)).collect();
            let clipped = TimeSeries::new(ind.clone(), freq, window)?;
            match detect_break_in_series(&clipped, ec.break_trim) {
                Ok(b) => breaks.push((crisis.label.clone(), ind.clone(), b)),
                Err(e @ (Error::InsufficientData(_) | Error::ZeroVariance | Error::Context { .. })) => {
                    log::warn!("break search skipped for {ind} in {}: {e}", crisis.label)
                }
                Err(e) => return Err(e),
            }
        }
    }
    out.write_table(
        "breaks.csv",
        &["crisis", "series", "break_date", "sup_wald", "cv_5pct", "significant_5pct", "pre_mean", "post_mean", "magnitude"],
        breaks.iter().map(|(c, s, b)| {
            vec![
                c.clone(),
                s.clone(),
                b.break_date.map(|d| d.to_string()).unwrap_or_default(),
                fmt_fixed(b.sup_statistic, 4),
                fmt_fixed(b.critical_value_5pct, 2),
                b.significant_at_5pct.to_string(),
                fmt_fixed(b.pre_mean, 6),
                fmt_fixed(b.post_mean, 6),
                fmt_fixed(b.magnitude, 6),
            ]
        }),
    )?;

    let mut welch_rows = Vec::new();
    for [a, b] in &ec.welch {
        let mags = |label: &str| -> Vec<f64> {
            breaks.iter().filter(|(c, _, _)| c == label).map(|(_, _, r)| r.magnitude).collect()
        };
        let (ga, gb) = (mags(a), mags(b));
        let r = compare_break_magnitudes(&ga, &gb).map_err(|e| e.context(format!("break magnitudes {a} vs {b}")))?;
        log::info!("{a} vs {b}: T-statistic: {:.2}; p value : {}", r.t, format_p_value(r.p_value));
        welch_rows.push(vec![
            a.clone(),
            b.clone(),
            ga.len().to_string(),
            gb.len().to_string(),
            fmt_fixed(r.mean_a, 6),
            fmt_fixed(r.mean_b, 6),
            fmt_fixed(r.t, 4),
            fmt_fixed(r.df, 2),
            format_p_value(r.p_value),
        ]);
    }
    out.write_table(
        "welch.csv",
        &["crisis_a", "crisis_b", "n_a", "n_b", "mean_a", "mean_b", "t", "df", "p"],
        welch_rows,
    )?;

    let mut corr_rows = Vec::new();
    for [a, b] in &ec.correlations {
        let (sa, sb) = (ws.series(a)?, ws.series(b)?);
        let panel = align(&[(&sa, Default::default()), (&sb, Default::default())], freq, Join::Inner)?;
        let pairs: Vec<(f64, f64)> = panel.complete_rows().iter().map(|r| (r[0], r[1])).collect();
        let r = correlation_of_pairs(&pairs).map_err(|e| e.context(format!("correlation {a} ~ {b}")))?;
        corr_rows.push(vec![a.clone(), b.clone(), pairs.len().to_string(), fmt_fixed(r, 4)]);
    }
    out.write_table("correlations.csv", &["a", "b", "n", "r"], corr_rows)?;

    Ok(EconOutputs { breaks, granger })
}

#[derive(Serialize)]
struct InputRecord {
    role: String,
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct OutputRecord {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    frequency: String,
    documents: usize,
    corpus_sha256: String,
    inputs: Vec<InputRecord>,
    topic_models: Vec<SliceRecord>,
    figures: Vec<String>,
    skipped_figures: BTreeMap<String, String>,
    outputs: Vec<OutputRecord>,
}

/// Every stage, then the plot-ready figure tables and `run_manifest.json`.
pub fn cmd_report(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let cfg = ws.config;
    cmd_ingest(ws, out)?;
    cmd_score(ws, out)?;
    if cfg.lexicons.values().any(|l| l.format == super::config::LexiconFormat::Terms) {
        cmd_counts(ws, out)?;
    }
    cmd_series(ws, out)?;
    let slices = if cfg.topics.is_some() { cmd_topics(ws, out)? } else { Vec::new() };
    if cfg.econ.is_some() {
        cmd_econ(ws, out)?;
    }
    let (made, skipped) = figures::write_figures(ws, out, &slices)?;

    let mut inputs = Vec::new();
    let mut add = |role: String, path: &std::path::Path| -> Result<()> {
        inputs.push(InputRecord {
            role,
            path: cfg.display_path(path),
            sha256: sha256_file(path)?,
        });
        Ok(())
    };
    add("manifest".into(), &cfg.corpus.manifest)?;
    for (name, l) in &cfg.lexicons {
        if let Some(p) = &l.path {
            add(format!("lexicon:{name}"), p)?;
        }
    }
    if let Some(p) = &cfg.shifters {
        add("shifters".into(), p)?;
    }
    for e in &cfg.external {
        add(format!("external:{}", e.name), &e.path)?;
    }
    if let Some(p) = &cfg.nber {
        add("nber".into(), p)?;
    }

    let corpus = ws.corpus()?;
    let mut joined = Vec::new();
    for d in &corpus.documents {
        joined.extend_from_slice(d.id.as_bytes());
        joined.push(0);
        joined.extend_from_slice(d.raw_text.as_bytes());
        joined.push(0);
    }
    let topic_models = slices
        .iter()
        .map(|f| SliceRecord {
            slice: f.config.name.clone(),
            k: f.model.k,
            alpha: f.model.alpha,
            beta: f.model.beta,
            iterations: f.model.iterations,
            seed: f.model.seed,
            documents: f.model.doc_ids.len(),
            vocabulary: f.model.words.len(),
        })
        .collect();
    let mut outputs = Vec::new();
    let mut files: Vec<String> = out.written().to_vec();
    files.sort();
    for f in files {
        outputs.push(OutputRecord {
            sha256: sha256_file(&out.root().join(&f))?,
            file: f,
        });
    }
    let manifest = RunManifest {
        tool: "cbtext",
        version: env!("CARGO_PKG_VERSION"),
        command: "report",
        seed: cfg.seed,
        frequency: cfg.frequency.to_string(),
        documents: corpus.len(),
        corpus_sha256: sha256_bytes(&joined),
        inputs,
        topic_models,
        figures: made,
        skipped_figures: skipped,
        outputs,
    };
    out.write_json("run_manifest.json", &manifest)
}
