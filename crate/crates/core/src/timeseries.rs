//! Calendar series, panels and simple transforms.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::{parse_date, Frequency};
use crate::corpus::Channel;
use crate::error::{Error, Result};
use crate::sentiment::ScoreRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    pub frequency: Frequency,
    points: Vec<(NaiveDate, f64)>,
}

impl TimeSeries {
    /// Fails unless dates are strictly increasing.
    pub fn new(name: impl Into<String>, frequency: Frequency, points: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let name = name.into();
        if let Some(w) = points.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(format!(
                "series {name}: dates not strictly increasing at {} -> {}",
                w[0].0, w[1].0
            )));
        }
        Ok(Self {
            name,
            frequency,
            points,
        })
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by_key(&date, |p| p.0)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Writes `date,<name>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::csv(&self.name, e);
        w.write_record(["date", self.name.as_str()]).map_err(io)?;
        for (d, v) in &self.points {
            w.write_record([d.to_string(), v.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(&self.name, e))
    }
}

/// How several observations in one calendar bucket collapse to one value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Sentiment and other ratios.
    #[default]
    Mean,
    /// Flows such as case counts.
    Sum,
    /// Market levels: last observation in the bucket.
    Last,
}

impl Aggregation {
    fn reduce(self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Sum => values.iter().sum(),
            Aggregation::Last => *values.last().expect("bucket is nonempty"),
        }
    }
}

/// Collapses dated observations into calendar buckets. Observations must
/// be sorted by date for [`Aggregation::Last`] to mean "latest"; ties keep
/// input order.
fn bucketize(
    observations: impl IntoIterator<Item = (NaiveDate, f64)>,
    frequency: Frequency,
    aggregation: Aggregation,
) -> Vec<(NaiveDate, f64)> {
    let mut buckets: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for (d, v) in observations {
        buckets.entry(frequency.bucket(d)).or_default().push(v);
    }
    buckets
        .into_iter()
        .map(|(d, vs)| (d, aggregation.reduce(&vs)))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelFilter {
    #[default]
    All,
    Only(Channel),
}

impl ChannelFilter {
    pub fn accepts(self, channel: Channel) -> bool {
        match self {
            ChannelFilter::All => true,
            ChannelFilter::Only(c) => c == channel,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChannelFilter::All => "all",
            ChannelFilter::Only(Channel::Announcement) => "announcement",
            ChannelFilter::Only(Channel::Minutes) => "minutes",
            ChannelFilter::Only(Channel::Speech) => "speech",
        }
    }
}

/// Calendar series of one indicator. Records are bucketed by `frequency`
/// (weeks start Monday) and reduced with `aggregation`; empty buckets are
/// omitted.
pub fn build_series(
    records: &[ScoreRecord],
    indicator: &str,
    filter: ChannelFilter,
    frequency: Frequency,
    aggregation: Aggregation,
) -> Result<TimeSeries> {
    let mut selected: Vec<(NaiveDate, f64)> = records
        .iter()
        .filter(|r| r.indicator == indicator && filter.accepts(r.channel))
        .map(|r| (r.date, r.value))
        .collect();
    if selected.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no {indicator} records for channel filter {}",
            filter.label()
        )));
    }
    // Sum and mean are order-free; sorting makes `Last` and float rounding
    // independent of record order.
    selected.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    TimeSeries::new(indicator, frequency, bucketize(selected, frequency, aggregation))
}

fn infer_frequency(dates: &[NaiveDate]) -> Frequency {
    let mut gaps: Vec<i64> = dates.windows(2).map(|w| (w[1] - w[0]).num_days()).collect();
    if gaps.is_empty() {
        return Frequency::Daily;
    }
    gaps.sort_unstable();
    match gaps[gaps.len() / 2] {
        ..=4 => Frequency::Daily,
        5..=10 => Frequency::Weekly,
        _ => Frequency::Monthly,
    }
}

/// Reads one value column keyed by an ISO date column. Rows are sorted by
/// date; the frequency is inferred from the median spacing.
pub fn load_external_csv(path: &Path, date_col: &str, value_col: &str) -> Result<TimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_csv(file, path, date_col, value_col)
}

pub fn read_external_csv<R: Read>(
    input: R,
    path: &Path,
    date_col: &str,
    value_col: &str,
) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: format!("no column {name:?}"),
        })
    };
    let (di, vi) = (find(date_col)?, find(value_col)?);
    let mut points = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            message,
        };
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let date = parse_date(rec.get(di).unwrap_or("")).map_err(|e| perr(e.to_string()))?;
        let raw = rec.get(vi).unwrap_or("");
        let value: f64 = raw
            .parse()
            .map_err(|_| perr(format!("cannot parse {raw:?} as a number")))?;
        if !value.is_finite() {
            return Err(perr(format!("non-finite value {raw:?}")));
        }
        if !seen.insert(date) {
            return Err(perr(format!("duplicate date {date}")));
        }
        points.push((date, value));
    }
    points.sort_by_key(|p| p.0);
    let dates: Vec<NaiveDate> = points.iter().map(|p| p.0).collect();
    TimeSeries::new(value_col, infer_frequency(&dates), points)
}

pub fn dump_series(series: &TimeSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    series.write_csv(file)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Join {
    #[default]
    Inner,
    Outer,
}

/// Named columns over a shared date grid; `None` marks a missing cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignedPanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

impl AlignedPanel {
    /// Panel from fully observed columns of equal length.
    pub fn from_columns(dates: Vec<NaiveDate>, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut panel = AlignedPanel {
            dates,
            ..Default::default()
        };
        for (name, values) in columns {
            if values.len() != panel.dates.len() {
                return Err(Error::LengthMismatch {
                    left: panel.dates.len(),
                    right: values.len(),
                });
            }
            panel.names.push(name);
            panel.columns.push(values.into_iter().map(Some).collect());
        }
        Ok(panel)
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    /// Sub-panel with the given columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<AlignedPanel> {
        let mut out = AlignedPanel {
            dates: self.dates.clone(),
            ..Default::default()
        };
        for name in names {
            let i = self.index_of(name)?;
            out.names.push(self.names[i].clone());
            out.columns.push(self.columns[i].clone());
        }
        Ok(out)
    }

    /// Rows where every column is observed.
    pub fn complete_cases(&self) -> AlignedPanel {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&r| self.columns.iter().all(|c| c[r].is_some()))
            .collect();
        AlignedPanel {
            dates: keep.iter().map(|&r| self.dates[r]).collect(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| keep.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    /// Complete-case values as row-major observations.
    pub fn complete_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .filter_map(|r| self.columns.iter().map(|c| c[r]).collect::<Option<Vec<f64>>>())
            .collect()
    }

    /// Complete-case values of one column.
    pub fn complete_column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index_of(name)?;
        Ok(self.complete_rows().into_iter().map(|r| r[i]).collect())
    }

    /// Column as a series over its observed dates.
    pub fn series(&self, name: &str, frequency: Frequency) -> Result<TimeSeries> {
        let col = self.column(name)?;
        let points = self
            .dates
            .iter()
            .zip(col)
            .filter_map(|(d, v)| v.map(|v| (*d, v)))
            .collect();
        TimeSeries::new(name, frequency, points)
    }

    /// Replaces or appends a column.
    pub fn set_column(&mut self, name: &str, values: Vec<Option<f64>>) -> Result<()> {
        if values.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: self.n_rows(),
                right: values.len(),
            });
        }
        match self.names.iter().position(|n| n == name) {
            Some(i) => self.columns[i] = values,
            None => {
                self.names.push(name.to_string());
                self.columns.push(values);
            }
        }
        Ok(())
    }

    /// `date,<var>...`; empty cell for missing values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::csv("panel", e);
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (r, d) in self.dates.iter().enumerate() {
            let mut row = vec![d.to_string()];
            row.extend(
                self.columns
                    .iter()
                    .map(|c| c[r].map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("panel", e))
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, path)
    }

    pub fn read_csv<R: Read>(input: R, path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        if headers.get(0) != Some("date") {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: 0,
                message: "first column must be `date`".into(),
            });
        }
        let mut panel = AlignedPanel {
            names: headers.iter().skip(1).map(str::to_string).collect(),
            ..Default::default()
        };
        panel.columns = vec![Vec::new(); panel.names.len()];
        for (i, rec) in reader.records().enumerate() {
            let row = i + 1;
            let perr = |message: String| Error::Parse {
                path: path.to_path_buf(),
                row,
                message,
            };
            let rec = rec.map_err(|e| perr(e.to_string()))?;
            let date = parse_date(&rec[0]).map_err(|e| perr(e.to_string()))?;
            if panel.dates.last().is_some_and(|&last| last >= date) {
                return Err(perr(format!("dates not strictly increasing at {date}")));
            }
            panel.dates.push(date);
            for (j, col) in panel.columns.iter_mut().enumerate() {
                let cell = rec.get(j + 1).unwrap_or("");
                let value = if cell.is_empty() {
                    None
                } else {
                    Some(cell.parse::<f64>().map_err(|_| perr(format!("cannot parse {cell:?}")))?)
                };
                col.push(value);
            }
        }
        Ok(panel)
    }
}

/// Buckets each series to `frequency` with its own aggregation policy and
/// joins them on the bucket dates.
pub fn align(series: &[(&TimeSeries, Aggregation)], frequency: Frequency, join: Join) -> Result<AlignedPanel> {
    let mut names = BTreeSet::new();
    let mut bucketed: Vec<BTreeMap<NaiveDate, f64>> = Vec::with_capacity(series.len());
    for (s, agg) in series {
        if !names.insert(s.name.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate series name {}", s.name)));
        }
        bucketed.push(bucketize(s.points().iter().copied(), frequency, *agg).into_iter().collect());
    }
    let mut grid: BTreeSet<NaiveDate> = BTreeSet::new();
    match join {
        Join::Outer => bucketed.iter().for_each(|b| grid.extend(b.keys())),
        Join::Inner => {
            if let Some(first) = bucketed.first() {
                grid.extend(first.keys());
                for b in &bucketed[1..] {
                    grid.retain(|d| b.contains_key(d));
                }
            }
            if grid.is_empty() {
                return Err(Error::InsufficientData(
                    "inner join of series has no common dates".into(),
                ));
            }
        }
    }
    let dates: Vec<NaiveDate> = grid.into_iter().collect();
    Ok(AlignedPanel {
        names: series.iter().map(|(s, _)| s.name.clone()).collect(),
        columns: bucketed
            .iter()
            .map(|b| dates.iter().map(|d| b.get(d).copied()).collect())
            .collect(),
        dates,
    })
}

/// Repeated first difference; each pass drops the first point.
pub fn difference(series: &TimeSeries, order: usize) -> Result<TimeSeries> {
    if order == 0 {
        return Err(Error::InvalidArgument("difference order must be >= 1".into()));
    }
    if series.len() <= order {
        return Err(Error::InsufficientData(format!(
            "{}: {} points cannot be differenced {order} times",
            series.name,
            series.len()
        )));
    }
    let mut points = series.points().to_vec();
    for _ in 0..order {
        points = points.windows(2).map(|w| (w[1].0, w[1].1 - w[0].1)).collect();
    }
    TimeSeries::new(series.name.clone(), series.frequency, points)
}

/// Product-moment correlation over the dates both series share.
pub fn pearson_correlation(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    let pairs: Vec<(f64, f64)> = a
        .points()
        .iter()
        .filter_map(|&(d, x)| b.get(d).map(|y| (x, y)))
        .collect();
    correlation_of_pairs(&pairs)
}

pub fn correlation_of_pairs(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 3 complete pairs, got {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mean 0, sample standard deviation 1.
pub fn zscore(series: &TimeSeries) -> Result<TimeSeries> {
    let values = series.values();
    if values.len() < 2 {
        return Err(Error::InsufficientData("zscore needs at least 2 points".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let points = series
        .points()
        .iter()
        .map(|&(d, v)| (d, (v - mean) / sd))
        .collect();
    TimeSeries::new(series.name.clone(), series.frequency, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn daily(name: &str, start: &str, values: &[f64]) -> TimeSeries {
        let s = d(start);
        TimeSeries::new(
            name,
            Frequency::Daily,
            values
                .iter()
                .enumerate()
                .map(|(i, v)| (s + Duration::days(i as i64), *v))
                .collect(),
        )
        .unwrap()
    }

    fn rec(date: &str, channel: Channel, value: f64) -> ScoreRecord {
        ScoreRecord {
            doc_id: format!("{date}{value}"),
            date: d(date),
            channel,
            indicator: "lm_score".into(),
            value,
        }
    }

    #[test]
    fn rejects_unsorted_points() {
        assert!(TimeSeries::new("x", Frequency::Daily, vec![(d("2020-01-02"), 1.0), (d("2020-01-01"), 2.0)]).is_err());
        assert!(TimeSeries::new("x", Frequency::Daily, vec![(d("2020-01-02"), 1.0), (d("2020-01-02"), 2.0)]).is_err());
    }

    #[test]
    fn series_from_records() {
        let one = build_series(&[rec("2020-03-04", Channel::Speech, 0.7)], "lm_score", ChannelFilter::All, Frequency::Weekly, Aggregation::Mean).unwrap();
        assert_eq!(one.points(), [(d("2020-03-02"), 0.7)]);

        let two = build_series(
            &[rec("2020-03-03", Channel::Speech, 0.2), rec("2020-03-06", Channel::Speech, 0.4)],
            "lm_score",
            ChannelFilter::All,
            Frequency::Weekly,
            Aggregation::Mean,
        )
        .unwrap();
        assert_eq!(two.len(), 1);
        assert!((two.values()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn empty_filter_names_channel() {
        let err = build_series(&[rec("2020-03-03", Channel::Speech, 0.2)], "lm_score", ChannelFilter::Only(Channel::Minutes), Frequency::Weekly, Aggregation::Mean).unwrap_err();
        assert!(err.to_string().contains("minutes"), "{err}");
    }

    #[test]
    fn monthly_buckets_match_brute_force() {
        let records: Vec<ScoreRecord> = (0..40)
            .map(|i| {
                let date = d("2020-01-01") + Duration::days(i * 3);
                let ch = Channel::ALL[(i % 3) as usize];
                let mut r = rec("2020-01-01", ch, (i as f64 * 0.37).sin());
                r.date = date;
                r
            })
            .collect();
        let s = build_series(&records, "lm_score", ChannelFilter::Only(Channel::Minutes), Frequency::Monthly, Aggregation::Mean).unwrap();
        for (date, v) in s.points() {
            let bucket: Vec<f64> = records
                .iter()
                .filter(|r| r.channel == Channel::Minutes && r.date.format("%Y-%m").to_string() == date.format("%Y-%m").to_string())
                .map(|r| r.value)
                .collect();
            let mean = bucket.iter().sum::<f64>() / bucket.len() as f64;
            assert!((v - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn external_csv_sorts_and_validates() {
        let text = "date,close\n2020-01-03,14.0\n2020-01-02,13.5\n";
        let s = read_external_csv(text.as_bytes(), Path::new("vix.csv"), "date", "close").unwrap();
        assert_eq!(s.dates(), [d("2020-01-02"), d("2020-01-03")]);
        assert_eq!(s.name, "close");

        let dup = "date,close\n2020-01-02,1\n2020-01-02,2\n";
        assert!(matches!(read_external_csv(dup.as_bytes(), Path::new("x"), "date", "close"), Err(Error::Parse { row: 2, .. })));
        let bad = "date,close\n2020-01-02,1\n2020-01-03,n/a\n";
        assert!(matches!(read_external_csv(bad.as_bytes(), Path::new("x"), "date", "close"), Err(Error::Parse { row: 2, .. })));
        let bad_date = "date,close\n01/02/2020,1\n";
        assert!(matches!(read_external_csv(bad_date.as_bytes(), Path::new("x"), "date", "close"), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn external_csv_round_trip() {
        let s = daily("vix", "2020-02-03", &[14.1, 15.25, 40.0, 82.69, 1e-3]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = read_external_csv(buf.as_slice(), Path::new("vix.csv"), "date", "vix").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn align_inner_and_outer() {
        let a = daily("a", "2020-01-06", &[1.0, 2.0, 3.0]);
        let b = daily("b", "2020-01-06", &[4.0, 5.0, 6.0]);
        let p = align(&[(&a, Aggregation::Mean), (&b, Aggregation::Mean)], Frequency::Daily, Join::Inner).unwrap();
        assert_eq!(p.n_rows(), 3);
        assert!(p.columns.iter().flatten().all(Option::is_some));

        let c = daily("c", "2021-01-06", &[1.0]);
        assert!(align(&[(&a, Aggregation::Mean), (&c, Aggregation::Mean)], Frequency::Daily, Join::Inner).is_err());
        let o = align(&[(&a, Aggregation::Mean), (&c, Aggregation::Mean)], Frequency::Daily, Join::Outer).unwrap();
        assert_eq!(o.n_rows(), 4);
        assert_eq!(o.complete_cases().n_rows(), 0);
    }

    #[test]
    fn align_downsampling_policies() {
        // Mon 2020-01-06 .. Sun 2020-01-19: two full weeks plus one day
        let market = daily("vix", "2020-01-06", &(0..15).map(|i| i as f64).collect::<Vec<_>>());
        let cases = daily("cases", "2020-01-06", &[1.0; 15]);
        let p = align(&[(&market, Aggregation::Last), (&cases, Aggregation::Sum)], Frequency::Weekly, Join::Outer).unwrap();
        assert_eq!(p.dates, [d("2020-01-06"), d("2020-01-13"), d("2020-01-20")]);
        assert_eq!(p.columns[0], [Some(6.0), Some(13.0), Some(14.0)]);
        assert_eq!(p.columns[1], [Some(7.0), Some(7.0), Some(1.0)]);
    }

    #[test]
    fn panel_csv_round_trip_with_missing() {
        let a = daily("a", "2020-01-06", &[1.5, 2.0]);
        let b = daily("b", "2020-01-07", &[-3.25, 4.0]);
        let p = align(&[(&a, Aggregation::Mean), (&b, Aggregation::Mean)], Frequency::Daily, Join::Outer).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "date,a,b\n2020-01-06,1.5,\n2020-01-07,2,-3.25\n2020-01-08,,4\n");
        assert_eq!(AlignedPanel::read_csv(buf.as_slice(), Path::new("p")).unwrap(), p);
    }

    #[test]
    fn difference_examples() {
        let c = daily("c", "2020-01-01", &[2.0; 6]);
        assert!(difference(&c, 1).unwrap().values().iter().all(|v| *v == 0.0));
        let lin = daily("l", "2020-01-01", &(0..6).map(|i| 1.5 * i as f64 - 2.0).collect::<Vec<_>>());
        let dl = difference(&lin, 1).unwrap();
        assert_eq!(dl.len(), 5);
        assert!(dl.values().iter().all(|v| (*v - 1.5).abs() < 1e-12));
        assert_eq!(difference(&lin, 2).unwrap().len(), 4);
        assert!(difference(&lin, 0).is_err());
    }

    #[test]
    fn correlation_examples() {
        let a = daily("a", "2020-01-01", &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let neg = daily("b", "2020-01-01", &[-1.0, -3.0, -2.0, -5.0, -4.0]);
        assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        let flat = daily("f", "2020-01-01", &[2.0; 5]);
        assert!(matches!(pearson_correlation(&a, &flat), Err(Error::ZeroVariance)));
        let short = daily("s", "2020-01-04", &[1.0, 2.0, 3.0]);
        assert!(pearson_correlation(&a, &short).is_err());
    }

    #[test]
    fn zscore_examples() {
        let s = daily("s", "2020-01-01", &[3.0, 7.0, 1.0, 9.0]);
        let z = zscore(&s).unwrap();
        // mean 5, sample sd sqrt(40/3)
        let sd = (40.0f64 / 3.0).sqrt();
        for (got, raw) in z.values().iter().zip([3.0, 7.0, 1.0, 9.0]) {
            assert!((got - (raw - 5.0) / sd).abs() < 1e-12);
        }
        assert!(matches!(zscore(&daily("c", "2020-01-01", &[1.0; 4])), Err(Error::ZeroVariance)));
    }

    fn values_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1e3f64..1e3, 3..40)
    }

    proptest! {
        #[test]
        fn zscore_has_zero_mean(v in values_strategy()) {
            let s = daily("s", "2020-01-01", &v);
            if let Ok(z) = zscore(&s) {
                let m = z.values().iter().sum::<f64>() / z.len() as f64;
                prop_assert!(m.abs() < 1e-12);
            }
        }

        #[test]
        fn difference_inverts_cumsum(v in values_strategy()) {
            let cum: Vec<f64> = v.iter().scan(0.0, |acc, x| { *acc += x; Some(*acc) }).collect();
            let dd = difference(&daily("c", "2020-01-01", &cum), 1).unwrap();
            for (got, want) in dd.values().iter().zip(&v[1..]) {
                prop_assert!((got - want).abs() < 1e-9);
            }
        }

        #[test]
        fn correlation_matches_covariance_formula(pairs in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 3..50)) {
            let n = pairs.len() as f64;
            let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / (n - 1.0);
            let sx = (pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let sy = (pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let r = correlation_of_pairs(&pairs).unwrap();
            prop_assert!((r - cov / (sx * sy)).abs() < 1e-12);
        }

        #[test]
        fn correlation_symmetric_and_affine_invariant(
            pairs in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 3..50),
            scale in 0.1f64..10.0, shift in -5f64..5.0,
        ) {
            let r = correlation_of_pairs(&pairs).unwrap();
            let swapped: Vec<(f64, f64)> = pairs.iter().map(|p| (p.1, p.0)).collect();
            let moved: Vec<(f64, f64)> = pairs.iter().map(|p| (scale * p.0 + shift, p.1)).collect();
            prop_assert!((r - correlation_of_pairs(&swapped).unwrap()).abs() < 1e-12);
            prop_assert!((r - correlation_of_pairs(&moved).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn build_series_ignores_record_order(
            vals in proptest::collection::vec((0i64..60, 0usize..3, -1f64..1.0), 1..40),
            seed in 0u64..1000,
        ) {
            let records: Vec<ScoreRecord> = vals.iter().map(|&(day, ch, v)| {
                let mut r = rec("2020-01-01", Channel::ALL[ch], v);
                r.date = d("2020-01-01") + Duration::days(day);
                r
            }).collect();
            let mut shuffled = records.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = build_series(&records, "lm_score", ChannelFilter::All, Frequency::Weekly, Aggregation::Mean).unwrap();
            let b = build_series(&shuffled, "lm_score", ChannelFilter::All, Frequency::Weekly, Aggregation::Mean).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
