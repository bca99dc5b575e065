//! Price-series CSV ingestion, validation and regular resampling.
//!
//! The schema is two required columns, `timestamp` (integer epoch seconds
//! or ISO-8601) and `price`; other columns are ignored and lines starting
//! with `#` are comments. A leading `# symbol=NAME` comment names the
//! series.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result, RowIssue};

const SYMBOL_TAG: &str = "# symbol=";
const GAP_WARNING_INTERVALS: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub timestamps: Vec<i64>,
    pub prices: Vec<f64>,
    pub symbol: String,
}

impl PriceSeries {
    /// Validates the invariants: equal lengths, strictly increasing
    /// timestamps and finite positive prices.
    pub fn new(timestamps: Vec<i64>, prices: Vec<f64>, symbol: impl Into<String>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::Length(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        let mut issues = Vec::new();
        for (i, p) in prices.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                issues.push(RowIssue { line: i + 1, message: format!("price {p} is not finite and positive") });
            }
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                issues.push(RowIssue {
                    line: i + 2,
                    message: format!("timestamp {} does not increase on {}", w[1], w[0]),
                });
            }
        }
        if !issues.is_empty() {
            issues.sort_by_key(|r| r.line);
            return Err(Error::Validation(issues));
        }
        Ok(Self { timestamps, prices, symbol: symbol.into() })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Overrides the symbol from the file's tag or stem.
    pub symbol: Option<String>,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

/// Parses an integer epoch-seconds value or an ISO-8601 date-time (naive
/// values are taken as UTC).
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut first = String::new();
    BufReader::new(&file).read_line(&mut first).map_err(|e| io_error(path, e))?;
    let tagged = first.trim_end().strip_prefix(SYMBOL_TAG).map(str::to_owned);
    let symbol = options
        .symbol
        .clone()
        .or(tagged)
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_default();

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing required column '{name}'") })
    };
    let (ts_col, price_col) = (column("timestamp")?, column("price")?);

    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    let mut issues = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| Error::Parse { line, message: format!("missing field {}", i + 1) })
        };
        let raw_ts = field(ts_col)?;
        let ts = parse_timestamp(raw_ts)
            .ok_or_else(|| Error::Parse { line, message: format!("bad timestamp '{raw_ts}'") })?;
        let raw_price = field(price_col)?;
        let price: f64 = raw_price
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("bad price '{raw_price}'") })?;
        if !(price.is_finite() && price > 0.0) {
            issues.push(RowIssue { line, message: format!("price {price} is not finite and positive") });
        }
        if let Some(&prev) = timestamps.last() {
            if ts <= prev {
                let what = if ts == prev { "duplicate" } else { "out-of-order" };
                issues.push(RowIssue { line, message: format!("{what} timestamp {ts} (previous {prev})") });
            }
        }
        timestamps.push(ts);
        prices.push(price);
    }
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    PriceSeries::new(timestamps, prices, symbol)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

/// Writes the series with a symbol tag, integer timestamps and prices in
/// shortest round-trip form.
pub fn save_csv(series: &PriceSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    let mut body = String::new();
    body.push_str(&format!("{SYMBOL_TAG}{}\ntimestamp,price\n", series.symbol));
    for (t, p) in series.timestamps.iter().zip(&series.prices) {
        body.push_str(&format!("{t},{p}\n"));
    }
    out.write_all(body.as_bytes()).map_err(|e| io_error(path, e))?;
    out.flush().map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWarning {
    pub from: i64,
    pub to: i64,
    pub intervals: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub series: PriceSeries,
    /// Gaps longer than ten intervals between consecutive observations.
    pub gaps: Vec<GapWarning>,
}

/// Last observation carried forward onto the grid `t₀, t₀+Δ, ...` up to the
/// final timestamp.
pub fn resample_regular(series: &PriceSeries, interval_seconds: i64) -> Result<Resampled> {
    if interval_seconds <= 0 {
        return Err(domain(format!("interval must be > 0, got {interval_seconds}")));
    }
    if series.is_empty() {
        return Err(Error::Length("cannot resample an empty series".into()));
    }
    let gaps: Vec<GapWarning> = series
        .timestamps
        .windows(2)
        .filter(|w| w[1] - w[0] > GAP_WARNING_INTERVALS * interval_seconds)
        .map(|w| GapWarning { from: w[0], to: w[1], intervals: (w[1] - w[0]) / interval_seconds })
        .collect();
    for g in &gaps {
        log::warn!("gap of {} intervals between {} and {}", g.intervals, g.from, g.to);
    }
    let start = series.timestamps[0];
    let end = *series.timestamps.last().expect("non-empty");
    let n = ((end - start) / interval_seconds) as usize + 1;
    let mut timestamps = Vec::with_capacity(n);
    let mut prices = Vec::with_capacity(n);
    let mut idx = 0;
    for k in 0..n {
        let t = start + k as i64 * interval_seconds;
        while idx + 1 < series.len() && series.timestamps[idx + 1] <= t {
            idx += 1;
        }
        timestamps.push(t);
        prices.push(series.prices[idx]);
    }
    Ok(Resampled {
        series: PriceSeries { timestamps, prices, symbol: series.symbol.clone() },
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "spx.csv", "timestamp,price\n60,100.5\n120,101\n180,99.75\n");
        let s = load_csv(&p, &CsvOptions::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.symbol, "spx");
        assert_eq!(s.prices, vec![100.5, 101.0, 99.75]);
    }

    #[test]
    fn comments_extra_columns_and_iso_dates() {
        let dir = tempfile::tempdir().unwrap();
        let body = "# vendor export\nvolume,price,timestamp\n# mid-file comment\n10,5.0,2020-01-01T00:00:00Z\n11,5.5,2020-01-01 00:01:00\n";
        let s = load_csv(write(&dir, "x.csv", body), &CsvOptions::default()).unwrap();
        assert_eq!(s.timestamps, vec![1_577_836_800, 1_577_836_860]);
        assert_eq!(s.prices, vec![5.0, 5.5]);
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "timestamp,price\n1,10\n2,-1\n3,11\n");
        match load_csv(&p, &CsvOptions::default()) {
            Err(Error::Validation(issues)) => {
                assert_eq!(issues.len(), 1);
                assert_eq!(issues[0].line, 3);
            }
            other => panic!("{other:?}"),
        }
        let p = write(&dir, "b.csv", "timestamp,price\n1,10\n1,11\n");
        assert!(matches!(load_csv(&p, &CsvOptions::default()), Err(Error::Validation(_))));
        let p = write(&dir, "c.csv", "timestamp,price\n1,10\n2,abc\n");
        assert!(matches!(load_csv(&p, &CsvOptions::default()), Err(Error::Parse { line: 3, .. })));
        let p = write(&dir, "d.csv", "time,price\n1,10\n");
        assert!(matches!(load_csv(&p, &CsvOptions::default()), Err(Error::Parse { .. })));
        assert!(matches!(
            load_csv(dir.path().join("missing.csv"), &CsvOptions::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let s = PriceSeries::new(vec![0, 60, 180], vec![1.0 / 3.0, 2.5e-7, 1e12], "ABC").unwrap();
        let p = dir.path().join("out.csv");
        save_csv(&s, &p).unwrap();
        assert_eq!(load_csv(&p, &CsvOptions::default()).unwrap(), s);
    }

    #[test]
    fn resampling() {
        let s = PriceSeries::new(vec![0, 60, 120], vec![1.0, 2.0, 3.0], "r").unwrap();
        assert_eq!(resample_regular(&s, 60).unwrap().series, s);
        let gap = PriceSeries::new(vec![0, 180], vec![1.0, 2.0], "g").unwrap();
        let r = resample_regular(&gap, 60).unwrap();
        assert_eq!(r.series.timestamps, vec![0, 60, 120, 180]);
        assert_eq!(r.series.prices, vec![1.0, 1.0, 1.0, 2.0]);
        assert!(r.gaps.is_empty());
        let long = PriceSeries::new(vec![0, 60 * 11], vec![1.0, 2.0], "l").unwrap();
        assert_eq!(resample_regular(&long, 60).unwrap().gaps.len(), 1);
        let empty = PriceSeries::new(vec![], vec![], "e").unwrap();
        assert!(resample_regular(&empty, 60).is_err());
        assert!(resample_regular(&s, 0).is_err());
    }
}
