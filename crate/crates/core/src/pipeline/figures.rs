//! Plot-ready tables, one per figure family.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::calendar::Frequency;
use crate::corpus::Channel;
use crate::error::{Error, Result};
use crate::timeseries::{align, zscore, Join, TimeSeries};
use crate::topics::top_topics;

use super::commands::FittedSlice;
use super::output::{fmt_value, OutputDir};
use super::workspace::Workspace;

/// True for errors that mean "an input for this table is not configured".
fn is_missing(e: &Error) -> bool {
    match e {
        Error::UnknownVariable(_) | Error::InsufficientData(_) | Error::MissingIndicators(_) => true,
        Error::Context { source, .. } => is_missing(source),
        _ => false,
    }
}

fn header_of(name: &str) -> String {
    name.replace('@', "_")
}

/// Wide table: `date`, one column per series, then recession and crisis tags.
fn wide(ws: &mut Workspace, out: &mut OutputDir, file: &str, names: &[String], rescale: &[String]) -> Result<()> {
    let mut series: Vec<TimeSeries> = Vec::new();
    for n in names {
        let s = ws.series(n)?;
        let s = if rescale.contains(n) {
            zscore(&s)?.renamed(format!("{}_rescaled", header_of(n)))
        } else {
            s.renamed(header_of(n))
        };
        series.push(s);
    }
    let refs: Vec<_> = series.iter().map(|s| (s, Default::default())).collect();
    let panel = align(&refs, ws.config.frequency, Join::Outer)?;
    let mut header: Vec<&str> = vec!["date"];
    header.extend(panel.names.iter().map(String::as_str));
    header.extend(["nber_recession", "crisis"]);
    let mut rows = Vec::with_capacity(panel.n_rows());
    for (r, date) in panel.dates.iter().enumerate() {
        let mut row = vec![date.to_string()];
        row.extend(panel.columns.iter().map(|c| fmt_value(c[r])));
        row.push(u8::from(ws.in_recession(*date)?).to_string());
        row.push(ws.crisis_label(*date).to_string());
        rows.push(row);
    }
    out.write_table(file, &header, rows)
}

fn configured_sentiment(ws: &Workspace) -> Vec<String> {
    ws.config
        .figures
        .sentiment
        .iter()
        .filter(|n| ws.config.indicator(n).is_some())
        .cloned()
        .collect()
}

/// Long sentiment table: every sentiment indicator for each channel and for
/// all channels together.
fn fig1(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let indicators = configured_sentiment(ws);
    if indicators.is_empty() {
        return Err(Error::InsufficientData("no sentiment indicators configured".into()));
    }
    let panels: Vec<(String, Option<Channel>)> = Channel::ALL
        .iter()
        .map(|c| (c.key().to_string(), Some(*c)))
        .chain([("all".to_string(), None)])
        .collect();
    let mut rows = Vec::new();
    for (panel, channel) in &panels {
        for ind in &indicators {
            let name = match channel {
                Some(c) => format!("{ind}@{}", c.key()),
                None => ind.clone(),
            };
            let s = match ws.series(&name) {
                Ok(s) => s,
                Err(e) if is_missing(&e) => continue,
                Err(e) => return Err(e),
            };
            for (d, v) in s.points() {
                rows.push(vec![
                    d.to_string(),
                    panel.clone(),
                    ind.clone(),
                    fmt_value(Some(*v)),
                    ws.crisis_label(*d).to_string(),
                ]);
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no sentiment series".into()));
    }
    out.write_table("fig1_sentiment.csv", &["date", "panel", "indicator", "value", "crisis"], rows)
}

/// Announcement sentiment over the whole sample with recession tags.
fn fig2(ws: &mut Workspace, out: &mut OutputDir) -> Result<()> {
    let mut rows = Vec::new();
    for ind in configured_sentiment(ws) {
        let s = match ws.series(&format!("{ind}@announcement")) {
            Ok(s) => s,
            Err(e) if is_missing(&e) => continue,
            Err(e) => return Err(e),
        };
        for (d, v) in s.points() {
            rows.push(vec![
                d.to_string(),
                ind.clone(),
                fmt_value(Some(*v)),
                u8::from(ws.in_recession(*d)?).to_string(),
            ]);
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no announcement sentiment".into()));
    }
    out.write_table("fig2_three_crises.csv", &["date", "indicator", "value", "nber_recession"], rows)
}

/// Six most prevalent topics of the chosen slice, per crisis window.
fn fig3(ws: &Workspace, out: &mut OutputDir, slices: &[FittedSlice]) -> Result<()> {
    let fig = &ws.config.figures;
    let slice = slices
        .iter()
        .find(|s| s.config.name == fig.topic_slice)
        .ok_or_else(|| Error::InsufficientData(format!("no topic slice named {:?}", fig.topic_slice)))?;
    let top = top_topics(&slice.model, 6);
    let mut rows = Vec::new();
    for p in &slice.periods {
        if !fig.topic_crises.is_empty() && !fig.topic_crises.contains(&p.label) {
            continue;
        }
        for &t in &top {
            rows.push(vec![p.label.clone(), t.to_string(), slice.model.label(t), fmt_value(Some(p.probs[t]))]);
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no crisis window holds documents of the topic slice".into()));
    }
    out.write_table("fig3_crisis_topics.csv", &["crisis", "topic", "label", "prob"], rows)
}

/// Monthly mean topic probabilities per slice: the six leading topics for
/// single-channel slices, every topic for pooled ones.
fn fig4(out: &mut OutputDir, slices: &[FittedSlice]) -> Result<()> {
    if slices.is_empty() {
        return Err(Error::InsufficientData("no topic slices".into()));
    }
    let mut rows = Vec::new();
    for s in slices {
        let n = if s.config.channel_set().len() == 1 { 6 } else { s.model.k };
        let top = top_topics(&s.model, n);
        let mut months: BTreeMap<NaiveDate, (Vec<f64>, usize)> = BTreeMap::new();
        for (doc_id, theta) in s.model.doc_ids.iter().zip(&s.model.theta) {
            let Some(doc) = s.corpus.document(doc_id) else { continue };
            let cell = months
                .entry(Frequency::Monthly.bucket(doc.date))
                .or_insert_with(|| (vec![0.0; s.model.k], 0));
            cell.0.iter_mut().zip(theta).for_each(|(a, p)| *a += p);
            cell.1 += 1;
        }
        for (month, (sums, count)) in &months {
            for &t in &top {
                rows.push(vec![
                    month.to_string(),
                    s.config.name.clone(),
                    t.to_string(),
                    s.model.label(t),
                    fmt_value(Some(sums[t] / *count as f64)),
                ]);
            }
        }
    }
    out.write_table("fig4_topics.csv", &["date", "slice", "topic", "label", "prob"], rows)
}

fn per_channel(base: &str) -> Vec<String> {
    Channel::ALL.iter().map(|c| format!("{base}@{}", c.key())).collect()
}

fn at(base: &str, channel: &str) -> String {
    format!("{base}@{channel}")
}

/// Writes every figure table it can. Returns the tables written and, for
/// the rest, why they were skipped.
pub fn write_figures(
    ws: &mut Workspace,
    out: &mut OutputDir,
    slices: &[FittedSlice],
) -> Result<(Vec<String>, BTreeMap<String, String>)> {
    let f = ws.config.figures.clone();
    let mut made = Vec::new();
    let mut skipped = BTreeMap::new();

    let mut record = |name: &str, result: Result<()>| -> Result<()> {
        match result {
            Ok(()) => {
                made.push(name.to_string());
                Ok(())
            }
            Err(e) if is_missing(&e) => {
                log::warn!("figure table {name} skipped: {e}");
                skipped.insert(name.to_string(), e.to_string());
                Ok(())
            }
            Err(e) => Err(e.context(format!("figure table {name}"))),
        }
    };

    record("fig1_sentiment.csv", fig1(ws, out))?;
    record("fig2_three_crises.csv", fig2(ws, out))?;
    record("fig3_crisis_topics.csv", fig3(ws, out, slices))?;
    record("fig4_topics.csv", fig4(out, slices))?;

    let mut v = per_channel(&f.ump);
    v.push(f.assets.clone());
    record("fig5_ump_counts.csv", wide(ws, out, "fig5_ump_counts.csv", &v, &[]))?;

    let mut v = per_channel(&f.covid);
    v.push(f.cases.clone());
    record("fig6_covid_counts.csv", wide(ws, out, "fig6_covid_counts.csv", &v, &[]))?;

    let v = vec![f.covid.clone(), f.ump.clone(), f.cases.clone(), f.vix.clone()];
    record("fig7_covid_ump_vix.csv", wide(ws, out, "fig7_covid_ump_vix.csv", &v, &[]))?;

    let v = vec![f.covid.clone(), f.ump.clone(), f.uncertainty.clone(), f.cases.clone()];
    record("fig8_covid_ump_uncertainty.csv", wide(ws, out, "fig8_covid_ump_uncertainty.csv", &v, &[]))?;

    let v = vec![f.covid.clone(), f.ump.clone(), f.fss.clone(), f.cases.clone()];
    let rescale = [f.fss.clone()];
    record("fig9_covid_ump_fss.csv", wide(ws, out, "fig9_covid_ump_fss.csv", &v, &rescale))?;

    let v = vec![at(&f.fss, "announcement"), at(&f.ump, "announcement"), at(&f.uncertainty, "announcement"), f.vix.clone()];
    record("fig10_fss_announcements.csv", wide(ws, out, "fig10_fss_announcements.csv", &v, &[]))?;

    let v = vec![at(&f.fss, "minutes"), at(&f.ump, "minutes"), at(&f.uncertainty, "minutes"), f.ffr.clone(), f.vix.clone()];
    record("fig11_fss_minutes.csv", wide(ws, out, "fig11_fss_minutes.csv", &v, &[]))?;

    let v = vec![at(&f.fss, "speech"), at(&f.ump, "speech"), at(&f.uncertainty, "speech"), f.ffr.clone(), f.vix.clone()];
    record("fig12_fss_speeches.csv", wide(ws, out, "fig12_fss_speeches.csv", &v, &[]))?;

    let v = vec![f.fss.clone(), f.ump.clone(), f.uncertainty.clone(), f.ffr.clone(), f.vix.clone()];
    record("fig13_fss_all.csv", wide(ws, out, "fig13_fss_all.csv", &v, &[]))?;

    let v = vec![at(&f.fss, "announcement"), at(&f.ump, "announcement"), at(&f.uncertainty, "announcement"), f.neer.clone()];
    record("fig14_fss_neer.csv", wide(ws, out, "fig14_fss_neer.csv", &v, &[]))?;

    let v = vec![super::config::AGGREGATE_NAME.to_string(), f.unemployment.clone()];
    record("fig15_sentiment_unemployment.csv", wide(ws, out, "fig15_sentiment_unemployment.csv", &v, &[]))?;

    Ok((made, skipped))
}
