// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV ingestion for real-world series.
//!
//! Two layouts are supported: a long table with one timestamp column and one
//! value column (e.g. minute-level exchange prices), and the wide layout used
//! by the JHU COVID-19 confirmed-cases table (`Province/State`,
//! `Country/Region`, `Lat`, `Long`, then one `M/D/YY` column per day).
//! Rows are never reordered or interpolated.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use log::warn;

use crate::error::{CpdError, Result};

const SECONDS_PER_DAY: i64 = 86_400;

/// Time-indexed series; timestamps are epoch seconds (dates map to UTC
/// midnight).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesFrame {
    pub timestamps: Vec<i64>,
    pub values: Vec<f64>,
    pub source_label: String,
    /// Rows dropped while parsing because a cell was empty or malformed.
    pub skipped_rows: usize,
}

impl TimeSeriesFrame {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Column selector: header name, or zero-based index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    /// Digits select by index, anything else by name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        }
    }

    fn resolve(&self, header: Option<&csv::StringRecord>, width: usize) -> Result<usize> {
        match self {
            Column::Index(i) if *i < width => Ok(*i),
            Column::Index(i) => Err(CpdError::MissingColumn(i.to_string())),
            Column::Name(name) => header
                .and_then(|h| h.iter().position(|c| c.trim() == name))
                .ok_or_else(|| CpdError::MissingColumn(name.clone())),
        }
    }
}

/// Parses a timestamp cell: epoch seconds (integer or decimal), `YYYY-MM-DD`,
/// `YYYY-MM-DD HH:MM:SS`, RFC 3339, or `M/D/YY`.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v.floor() as i64);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(date_to_epoch(d));
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(dt.and_utc().timestamp());
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    parse_jhu_date(s).map(date_to_epoch)
}

pub fn date_to_epoch(d: NaiveDate) -> i64 {
    d.signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch"))
        .num_days()
        * SECONDS_PER_DAY
}

/// `M/D/YY` as used in the JHU table headers.
fn parse_jhu_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%m/%d/%y").ok()
}

fn parse_value(s: &str) -> Option<f64> {
    let v = s.trim().parse::<f64>().ok()?;
    v.is_finite().then_some(v)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CpdError::io(path, e))
}

/// Reads a long-format series. Rows whose value (or timestamp) cell is empty
/// or non-numeric are skipped and counted.
pub fn read_series_csv(
    path: impl AsRef<Path>,
    time_column: &Column,
    value_column: &Column,
    header: bool,
) -> Result<TimeSeriesFrame> {
    let path = path.as_ref();
    let frame = read_series(open(path)?, time_column, value_column, header, &path.display().to_string())?;
    if frame.skipped_rows > 0 {
        warn!("{}: skipped {} unparseable rows", path.display(), frame.skipped_rows);
    }
    Ok(frame)
}

/// Same as [`read_series_csv`] over any reader.
pub fn read_series<R: Read>(
    reader: R,
    time_column: &Column,
    value_column: &Column,
    header: bool,
    label: &str,
) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .from_reader(reader);
    let head = if header { Some(rdr.headers()?.clone()) } else { None };

    let mut cols: Option<(usize, usize)> = if let Some(h) = &head {
        Some((time_column.resolve(Some(h), h.len())?, value_column.resolve(Some(h), h.len())?))
    } else {
        None
    };

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut skipped = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let (tc, vc) = match cols {
            Some(c) => c,
            None => {
                let c = (time_column.resolve(None, rec.len())?, value_column.resolve(None, rec.len())?);
                cols = Some(c);
                c
            }
        };
        let t = rec.get(tc).and_then(parse_timestamp);
        let v = rec.get(vc).and_then(parse_value);
        match (t, v) {
            (Some(t), Some(v)) => {
                if let Some(&last) = timestamps.last() {
                    if t <= last {
                        return Err(CpdError::Unsorted("timestamps"));
                    }
                }
                timestamps.push(t);
                values.push(v);
            }
            _ => skipped += 1,
        }
    }
    if values.is_empty() {
        return Err(CpdError::Empty(format!("{label}: no parseable rows")));
    }
    Ok(TimeSeriesFrame {
        timestamps,
        values,
        source_label: label.to_string(),
        skipped_rows: skipped,
    })
}

/// Keeps rows with `start <= t <= end`, then every `k`-th of those starting
/// from the first retained row.
pub fn resample_every_k(
    frame: &TimeSeriesFrame,
    k: usize,
    start: Option<i64>,
    end: Option<i64>,
) -> Result<TimeSeriesFrame> {
    if k == 0 {
        return Err(CpdError::invalid("stride k must be >= 1"));
    }
    if let (Some(s), Some(e)) = (start, end) {
        if s > e {
            return Err(CpdError::invalid(format!("start {s} is after end {e}")));
        }
    }
    let (timestamps, values): (Vec<i64>, Vec<f64>) = frame
        .timestamps
        .iter()
        .zip(&frame.values)
        .filter(|(&t, _)| start.is_none_or(|s| t >= s) && end.is_none_or(|e| t <= e))
        .step_by(k)
        .map(|(&t, &v)| (t, v))
        .unzip();
    if values.is_empty() {
        return Err(CpdError::Empty(format!("{}: window selects no rows", frame.source_label)));
    }
    Ok(TimeSeriesFrame {
        timestamps,
        values,
        source_label: frame.source_label.clone(),
        skipped_rows: frame.skipped_rows,
    })
}

/// Sums every row of a JHU wide table whose `Country/Region` equals
/// `country` (case-sensitive) over the dates in `[date_start, date_end]`.
pub fn extract_wide_row(
    path: impl AsRef<Path>,
    country: &str,
    date_start: NaiveDate,
    date_end: NaiveDate,
) -> Result<TimeSeriesFrame> {
    let path = path.as_ref();
    extract_wide(open(path)?, country, date_start, date_end, &path.display().to_string())
}

pub fn extract_wide<R: Read>(
    reader: R,
    country: &str,
    date_start: NaiveDate,
    date_end: NaiveDate,
    label: &str,
) -> Result<TimeSeriesFrame> {
    if date_start > date_end {
        return Err(CpdError::invalid(format!("start {date_start} is after end {date_end}")));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let head = rdr.headers()?.clone();
    let country_col = head
        .iter()
        .position(|c| c.trim() == "Country/Region")
        .ok_or_else(|| CpdError::MalformedHeader("no Country/Region column".into()))?;

    let dates: Vec<(usize, NaiveDate)> = head
        .iter()
        .enumerate()
        .filter_map(|(i, c)| parse_jhu_date(c).map(|d| (i, d)))
        .collect();
    if dates.is_empty() {
        return Err(CpdError::MalformedHeader("no M/D/YY date columns".into()));
    }
    if dates.windows(2).any(|w| w[0].1 >= w[1].1) {
        return Err(CpdError::MalformedHeader("date columns out of order".into()));
    }
    let selected: Vec<(usize, NaiveDate)> = dates
        .into_iter()
        .filter(|(_, d)| *d >= date_start && *d <= date_end)
        .collect();
    if selected.is_empty() {
        return Err(CpdError::Empty(format!("{label}: no dates in {date_start}..={date_end}")));
    }

    let mut sums = vec![0.0; selected.len()];
    let mut matched = false;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.get(country_col).map(str::trim) != Some(country) {
            continue;
        }
        matched = true;
        for (sum, (col, date)) in sums.iter_mut().zip(&selected) {
            let cell = rec.get(*col).unwrap_or("");
            let v = parse_value(cell).ok_or_else(|| {
                CpdError::invalid(format!("{label}: bad count {cell:?} for {country} on {date}"))
            })?;
            *sum += v;
        }
    }
    if !matched {
        return Err(CpdError::UnknownCountry(country.to_string()));
    }
    Ok(TimeSeriesFrame {
        timestamps: selected.iter().map(|(_, d)| date_to_epoch(*d)).collect(),
        values: sums,
        source_label: format!("{label}:{country}"),
        skipped_rows: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(s: &str, header: bool, t: Column, v: Column) -> Result<TimeSeriesFrame> {
        read_series(s.as_bytes(), &t, &v, header, "fixture")
    }

    fn ten_rows() -> TimeSeriesFrame {
        TimeSeriesFrame {
            timestamps: (1..=10).collect(),
            values: (1..=10).map(f64::from).collect(),
            source_label: "ten".into(),
            skipped_rows: 0,
        }
    }

    #[test]
    fn reads_by_name() {
        let f = frame("t,v\n1,1.0\n2,2.0\n3,3.0\n", true, Column::parse("t"), Column::parse("v")).unwrap();
        assert_eq!(f.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.timestamps, vec![1, 2, 3]);
        assert_eq!(f.skipped_rows, 0);
    }

    #[test]
    fn skips_blank_values() {
        let f = frame("t,v\n1,1.0\n2,\n3,3.0\n", true, Column::parse("t"), Column::parse("v")).unwrap();
        assert_eq!(f.values, vec![1.0, 3.0]);
        assert_eq!(f.skipped_rows, 1);
        let f = frame("t,v\n1,abc\n2,NaN\n3,3\n", true, Column::parse("t"), Column::parse("v")).unwrap();
        assert_eq!((f.len(), f.skipped_rows), (1, 2));
    }

    #[test]
    fn headerless_index_matches_named() {
        let named = frame("t,v\n1,1.0\n2,2.0\n3,3.0\n", true, Column::parse("t"), Column::parse("v")).unwrap();
        let idx = frame("1,1.0\n2,2.0\n3,3.0\n", false, Column::Index(0), Column::Index(1)).unwrap();
        assert_eq!(named.values, idx.values);
        assert_eq!(named.timestamps, idx.timestamps);
    }

    #[test]
    fn read_errors() {
        assert!(matches!(
            frame("t,v\n1,1\n", true, Column::parse("t"), Column::parse("close")),
            Err(CpdError::MissingColumn(_))
        ));
        assert!(matches!(
            frame("1,1\n", false, Column::Index(0), Column::Index(5)),
            Err(CpdError::MissingColumn(_))
        ));
        assert!(matches!(
            frame("t,v\n1,\n2,x\n", true, Column::parse("t"), Column::parse("v")),
            Err(CpdError::Empty(_))
        ));
        assert!(matches!(
            frame("t,v\n2,1\n1,2\n", true, Column::parse("t"), Column::parse("v")),
            Err(CpdError::Unsorted(_))
        ));
        assert!(matches!(
            read_series_csv("/nonexistent/file.csv", &Column::Index(0), &Column::Index(1), false),
            Err(CpdError::Io { .. })
        ));
    }

    #[test]
    fn timestamps_parse_locale_free() {
        assert_eq!(parse_timestamp("1325317920"), Some(1_325_317_920));
        assert_eq!(parse_timestamp("1325317920.0"), Some(1_325_317_920));
        assert_eq!(parse_timestamp("1970-01-02"), Some(86_400));
        assert_eq!(parse_timestamp("1/22/20"), parse_timestamp("2020-01-22"));
        assert_eq!(parse_timestamp("2020-07-01T00:00:00Z"), parse_timestamp("2020-07-01"));
        assert_eq!(parse_timestamp("1,000"), None);
        assert_eq!(parse_value("1,5"), None);
    }

    #[test]
    fn stride_decimation() {
        let f = resample_every_k(&ten_rows(), 3, None, None).unwrap();
        assert_eq!(f.timestamps, vec![1, 4, 7, 10]);
        let id = resample_every_k(&ten_rows(), 1, Some(3), Some(6)).unwrap();
        assert_eq!(id.timestamps, vec![3, 4, 5, 6]);
        let anchored = resample_every_k(&ten_rows(), 2, Some(4), None).unwrap();
        assert_eq!(anchored.timestamps, vec![4, 6, 8, 10]);
        assert!(resample_every_k(&ten_rows(), 0, None, None).is_err());
        assert!(resample_every_k(&ten_rows(), 1, Some(20), None).is_err());
        assert!(resample_every_k(&ten_rows(), 1, Some(5), Some(4)).is_err());
    }

    const JHU: &str = "Province/State,Country/Region,Lat,Long,1/22/20,1/23/20,1/24/20\n\
        A,Atlantis,0,0,1,2,5\n\
        B,Atlantis,0,0,3,4,5\n\
        ,Lemuria,0,0,7,8,9\n";

    #[test]
    fn wide_row_sum() {
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).unwrap();
        let f = extract_wide(JHU.as_bytes(), "Atlantis", d(1, 22), d(1, 23), "jhu").unwrap();
        assert_eq!(f.values, vec![4.0, 6.0]);
        assert_eq!(f.timestamps[1] - f.timestamps[0], SECONDS_PER_DAY);
        let f = extract_wide(JHU.as_bytes(), "Lemuria", d(1, 1), d(12, 31), "jhu").unwrap();
        assert_eq!(f.values, vec![7.0, 8.0, 9.0]);
        let err = extract_wide(JHU.as_bytes(), "atlantis", d(1, 22), d(1, 23), "jhu").unwrap_err();
        assert!(err.to_string().contains("atlantis"));
        assert!(matches!(
            extract_wide("a,b\n1,2\n".as_bytes(), "X", d(1, 22), d(1, 23), "jhu"),
            Err(CpdError::MalformedHeader(_))
        ));
    }

    #[test]
    fn inclusive_date_window_length() {
        let start = NaiveDate::from_ymd_opt(2020, 1, 22).unwrap();
        let end = NaiveDate::from_ymd_opt(2020, 10, 6).unwrap();
        let mut header = String::from("Province/State,Country/Region,Lat,Long");
        let mut row = String::from(",Russia,61.5,105.3");
        let mut d = start;
        let mut n = 0;
        while d <= NaiveDate::from_ymd_opt(2020, 12, 31).unwrap() {
            header.push_str(&format!(",{}", d.format("%-m/%-d/%y")));
            row.push_str(&format!(",{n}"));
            d = d.succ_opt().unwrap();
            n += 1;
        }
        let csv = format!("{header}\n{row}\n");
        let f = extract_wide(csv.as_bytes(), "Russia", start, end, "jhu").unwrap();
        assert_eq!(f.len(), 259);
        assert!(f.values.windows(2).all(|w| w[1] > w[0]));
    }
}
