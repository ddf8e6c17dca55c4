//! Daily market data: CSV ingestion, feature computation, windowing and
//! chronological splitting.

mod synthetic;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use synthetic::{synthetic, SyntheticSpec};

use crate::error::{Error, Result};

/// One trading day. `extra` holds the named non-OHLC columns of the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub extra: BTreeMap<String, f64>,
}

impl OhlcRecord {
    /// `high ≥ max(open, close) ≥ min(open, close) ≥ low > 0`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let values = [self.open, self.high, self.low, self.close];
        if values.iter().any(|v| !v.is_finite()) {
            return Err("non-finite price".into());
        }
        if !(self.low > 0.0) {
            return Err(format!("low {} must be positive", self.low));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} below max(open, close) {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} above min(open, close) {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        Ok(())
    }

    fn extra(&self, column: &'static str) -> Result<f64> {
        self.extra.get(column).copied().ok_or_else(|| {
            Error::Config(format!("record for {} has no `{column}` column", self.date))
        })
    }
}

/// Feature set computed from the records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    /// Return, log high and log low relative to the previous close.
    Yahoo3,
    /// Return, realized volatility and open-to-close return of the main index,
    /// plus return and realized volatility of two further indices.
    Oxford7,
}

impl FeatureSpec {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSpec::Yahoo3 => "yahoo3",
            FeatureSpec::Oxford7 => "oxford7",
        }
    }

    /// Non-OHLC input columns this feature set needs.
    pub fn extra_columns(self) -> &'static [&'static str] {
        match self {
            FeatureSpec::Yahoo3 => &[],
            FeatureSpec::Oxford7 => &[
                "rv",
                "open_to_close",
                "dia_close",
                "dia_rv",
                "ndx_close",
                "ndx_rv",
            ],
        }
    }

    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            FeatureSpec::Yahoo3 => &["return", "log_high", "log_low"],
            FeatureSpec::Oxford7 => &[
                "return",
                "rv",
                "open_to_close",
                "dia_return",
                "dia_rv",
                "ndx_return",
                "ndx_rv",
            ],
        }
    }

    pub fn width(self) -> usize {
        self.feature_names().len()
    }
}

const OHLC: [&str; 4] = ["open", "high", "low", "close"];

/// Reads `date,open,high,low,close[,…]` with ISO dates. Columns not required
/// by `spec` are ignored. Output is sorted by date.
pub fn load_csv(path: &Path, spec: FeatureSpec) -> Result<Vec<OhlcRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let date_col = column("date")?;
    let ohlc_cols = OHLC.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    let extra_cols = spec
        .extra_columns()
        .iter()
        .map(|c| Ok((*c, column(c)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let bad = |message: String| Error::BadRow {
            path: path.to_path_buf(),
            row: line,
            message,
        };
        let row = row?;
        let field = |idx: usize| row.get(idx).unwrap_or("");
        let number = |name: &str, idx: usize| -> Result<f64> {
            field(idx)
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot parse {name} value `{}`", field(idx))))
        };
        let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d")
            .map_err(|_| bad(format!("cannot parse date `{}`", field(date_col))))?;
        if !seen.insert(date) {
            return Err(bad(format!("duplicate date {date}")));
        }
        let p: Vec<f64> = OHLC
            .iter()
            .zip(&ohlc_cols)
            .map(|(name, &idx)| number(name, idx))
            .collect::<Result<_>>()?;
        let extra = extra_cols
            .iter()
            .map(|&(name, idx)| Ok((name.to_string(), number(name, idx)?)))
            .collect::<Result<_>>()?;
        let record = OhlcRecord {
            date,
            open: p[0],
            high: p[1],
            low: p[2],
            close: p[3],
            extra,
        };
        record.check().map_err(bad)?;
        records.push(record);
    }
    records.sort_by_key(|r| r.date);
    Ok(records)
}

/// Writes records with the OHLC columns followed by every extra column of the
/// first record, in name order.
pub fn write_csv(path: &Path, records: &[OhlcRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let extras: Vec<String> = records
        .first()
        .map(|r| r.extra.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec!["date".to_string()];
    header.extend(OHLC.iter().map(|s| s.to_string()));
    header.extend(extras.iter().cloned());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.date.to_string(),
            r.open.to_string(),
            r.high.to_string(),
            r.low.to_string(),
            r.close.to_string(),
        ];
        for name in &extras {
            row.push(r.extra.get(name).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Feature rows aligned with their dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Appends `lags` lagged copies of every column (`name_lag1`, …) and
    /// drops the first `lags` rows, then keeps the first `width` columns.
    pub fn lagged(&self, lags: usize, width: usize) -> Result<FeatureMatrix> {
        if self.len() <= lags {
            return Err(Error::Config(format!(
                "{} rows cannot supply {lags} lags",
                self.len()
            )));
        }
        let full = self.width() * (lags + 1);
        if width == 0 || width > full {
            return Err(Error::Config(format!(
                "requested {width} lagged columns, at most {full} available"
            )));
        }
        let mut names = Vec::with_capacity(full);
        for lag in 0..=lags {
            for n in &self.names {
                names.push(if lag == 0 {
                    n.clone()
                } else {
                    format!("{n}_lag{lag}")
                });
            }
        }
        names.truncate(width);
        let rows = (lags..self.len())
            .map(|t| {
                let mut row = Vec::with_capacity(full);
                for lag in 0..=lags {
                    row.extend_from_slice(&self.rows[t - lag]);
                }
                row.truncate(width);
                row
            })
            .collect();
        Ok(FeatureMatrix {
            names,
            dates: self.dates[lags..].to_vec(),
            rows,
        })
    }
}

fn positive(row: usize, column: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositivePrice { row, column, value })
    }
}

/// Computes the feature matrix; the first record only supplies the previous
/// close and is dropped.
pub fn compute_features(records: &[OhlcRecord], spec: FeatureSpec) -> Result<FeatureMatrix> {
    if records.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 records to compute features, got {}",
            records.len()
        )));
    }
    let mut rows = Vec::with_capacity(records.len() - 1);
    for t in 1..records.len() {
        let (prev, cur) = (&records[t - 1], &records[t]);
        let prev_close = positive(t - 1, "close", prev.close)?;
        let ret = cur.close / prev_close - 1.0;
        let row = match spec {
            FeatureSpec::Yahoo3 => vec![
                ret,
                (positive(t, "high", cur.high)? / prev_close).ln(),
                (positive(t, "low", cur.low)? / prev_close).ln(),
            ],
            FeatureSpec::Oxford7 => {
                let dia_prev = positive(t - 1, "dia_close", prev.extra("dia_close")?)?;
                let ndx_prev = positive(t - 1, "ndx_close", prev.extra("ndx_close")?)?;
                vec![
                    ret,
                    cur.extra("rv")?,
                    cur.extra("open_to_close")?,
                    cur.extra("dia_close")? / dia_prev - 1.0,
                    cur.extra("dia_rv")?,
                    cur.extra("ndx_close")? / ndx_prev - 1.0,
                    cur.extra("ndx_rv")?,
                ]
            }
        };
        rows.push(row);
    }
    Ok(FeatureMatrix {
        names: spec.feature_names().iter().map(|s| s.to_string()).collect(),
        dates: records[1..].iter().map(|r| r.date).collect(),
        rows,
    })
}

/// `T` consecutive feature rows starting at row `start`, and the target
/// feature's value on the following row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub inputs: Vec<Vec<f64>>,
    pub target: f64,
}

impl Window {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Row index of the target.
    pub fn target_row(&self) -> usize {
        self.start + self.inputs.len()
    }

    /// Row index of the last input.
    pub fn last_input_row(&self) -> usize {
        self.target_row() - 1
    }
}

/// Overlapping windows with stride 1; yields `rows − T` windows.
pub fn windowize(rows: &[Vec<f64>], t: usize, target_index: usize) -> Result<Vec<Window>> {
    if t == 0 {
        return Err(Error::Config("window length must be at least 1".into()));
    }
    if rows.len() < t + 1 {
        return Err(Error::Config(format!(
            "{} rows are too few for windows of length {t} (need {})",
            rows.len(),
            t + 1
        )));
    }
    let width = rows[0].len();
    if target_index >= width {
        return Err(Error::Config(format!(
            "target index {target_index} out of range for {width} features"
        )));
    }
    Ok((0..rows.len() - t)
        .map(|start| Window {
            start,
            inputs: rows[start..start + t].to_vec(),
            target: rows[start + t][target_index],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Window>,
    pub test: Vec<Window>,
}

/// Chronological split: the first `⌈(1 − ratio)·M⌉` windows train, the rest test.
pub fn split(samples: Vec<Window>, test_ratio: f64) -> Result<Split> {
    if !(0.0..1.0).contains(&test_ratio) {
        return Err(Error::Config(format!(
            "test ratio must lie in [0, 1), got {test_ratio}"
        )));
    }
    if test_ratio == 0.0 {
        log::warn!("test ratio is 0; the test set is empty");
    }
    let n_train = ((1.0 - test_ratio) * samples.len() as f64).ceil() as usize;
    let mut train = samples;
    let test = train.split_off(n_train.min(train.len()));
    Ok(Split { train, test })
}

/// Drops test windows whose inputs reach back to or before the last training
/// target row, so no training target is ever seen as a test input.
pub fn purge_overlap(split: Split) -> Split {
    let Some(last_target) = split.train.iter().map(Window::target_row).max() else {
        return split;
    };
    let before = split.test.len();
    let test: Vec<Window> = split
        .test
        .into_iter()
        .filter(|w| w.start > last_target)
        .collect();
    if test.len() < before {
        log::info!(
            "purged {} test windows overlapping training targets",
            before - test.len()
        );
    }
    Split {
        train: split.train,
        test,
    }
}

/// One serialized sample for the JSON-lines export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSample {
    pub first_input_date: NaiveDate,
    pub last_input_date: NaiveDate,
    pub target_date: NaiveDate,
    pub inputs: Vec<Vec<f64>>,
    pub target: f64,
    pub target_probability: Option<f64>,
}

impl SequenceSample {
    /// `bounds` are the target feature's `(min, max)`, if fitted.
    pub fn from_window(window: &Window, dates: &[NaiveDate], bounds: Option<(f64, f64)>) -> Self {
        SequenceSample {
            first_input_date: dates[window.start],
            last_input_date: dates[window.last_input_row()],
            target_date: dates[window.target_row()],
            inputs: window.inputs.clone(),
            target: window.target,
            target_probability: bounds.map(|(lo, hi)| (window.target - lo) / (hi - lo)),
        }
    }
}

pub fn write_jsonl(path: &Path, samples: &[SequenceSample]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use std::io::Write as _;

    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    fn rec(day: u32, open: f64, high: f64, low: f64, close: f64) -> OhlcRecord {
        OhlcRecord {
            date: NaiveDate::from_ymd_opt(2017, 1, day).unwrap(),
            open,
            high,
            low,
            close,
            extra: BTreeMap::new(),
        }
    }

    #[test]
    fn loads_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "date,open,high,low,close\n2017-01-04,101,102,100,101.5\n2017-01-03,100,101,99,100.5\n2017-01-05,101,103,100,102\n",
        );
        let r = load_csv(&p, FeatureSpec::Yahoo3).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.windows(2).all(|w| w[0].date < w[1].date));
        assert_eq!(r[0].close, 100.5);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "date,open,high,low\n2017-01-03,1,1,1\n");
        match load_csv(&p, FeatureSpec::Yahoo3) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "close"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_rows_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "date,open,high,low,close\n2017-01-03,1,1,1,1\n2017-01-04,1,x,1,1\n",
        );
        match load_csv(&p, FeatureSpec::Yahoo3) {
            Err(Error::BadRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(
            &dir,
            "b.csv",
            "date,open,high,low,close\n2017-01-03,1,1,1,1\n2017-01-03,1,1,1,1\n",
        );
        assert!(matches!(
            load_csv(&p, FeatureSpec::Yahoo3),
            Err(Error::BadRow { row: 3, .. })
        ));
        let p = write(
            &dir,
            "c.csv",
            "date,open,high,low,close\n2017-01-03,1,0.9,0.8,1\n",
        );
        assert!(matches!(
            load_csv(&p, FeatureSpec::Yahoo3),
            Err(Error::BadRow { row: 2, .. })
        ));
    }

    #[test]
    fn yahoo_features() {
        let r = vec![
            rec(3, 100.0, 100.0, 100.0, 100.0),
            rec(4, 100.0, 101.0, 99.0, 101.0),
        ];
        let m = compute_features(&r, FeatureSpec::Yahoo3).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.rows[0][0] - 0.01).abs() < 1e-15);
        assert!((m.rows[0][1] - 1.01f64.ln()).abs() < 1e-15);
        assert!((m.rows[0][2] - 0.99f64.ln()).abs() < 1e-15);

        let r = vec![
            rec(3, 100.0, 100.0, 100.0, 100.0),
            rec(4, 100.0, 100.0, 99.0, 99.5),
        ];
        assert_eq!(
            compute_features(&r, FeatureSpec::Yahoo3).unwrap().rows[0][1],
            0.0
        );

        let flat: Vec<_> = (3..8).map(|d| rec(d, 50.0, 50.0, 50.0, 50.0)).collect();
        let m = compute_features(&flat, FeatureSpec::Yahoo3).unwrap();
        assert!(m.rows.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn non_positive_price_rejected() {
        let r = vec![rec(3, 1.0, 1.0, 1.0, 0.0), rec(4, 1.0, 1.0, 1.0, 1.0)];
        assert!(matches!(
            compute_features(&r, FeatureSpec::Yahoo3),
            Err(Error::NonPositivePrice { .. })
        ));
        assert!(compute_features(&r[..1], FeatureSpec::Yahoo3).is_err());
    }

    #[test]
    fn window_arithmetic() {
        let rows: Vec<Vec<f64>> = (0..251).map(|i| vec![i as f64, 0.0]).collect();
        let w = windowize(&rows, 8, 0).unwrap();
        assert_eq!(w.len(), 243);
        assert_eq!(w[0].target, 8.0);
        let s = split(w, 0.2).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (195, 48));

        let one = windowize(&rows[..9], 8, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(windowize(&rows[..8], 8, 0).is_err());
        assert!(windowize(&rows, 8, 2).is_err());
        let s = split(one, 0.0).unwrap();
        assert!(s.test.is_empty());
    }

    #[test]
    fn purge_removes_leakage() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
        let s = purge_overlap(split(windowize(&rows, 5, 0).unwrap(), 0.3).unwrap());
        let last_target = s.train.iter().map(Window::target_row).max().unwrap();
        let first_input = s.test.iter().map(|w| w.start).min().unwrap();
        assert!(last_target < first_input);
        assert!(!s.test.is_empty());
    }

    #[test]
    fn lagged_columns() {
        let m = FeatureMatrix {
            names: vec!["a".into(), "b".into()],
            dates: (1..=4)
                .map(|d| NaiveDate::from_ymd_opt(2017, 1, d).unwrap())
                .collect(),
            rows: vec![
                vec![1.0, 2.0],
                vec![3.0, 4.0],
                vec![5.0, 6.0],
                vec![7.0, 8.0],
            ],
        };
        let l = m.lagged(1, 3).unwrap();
        assert_eq!(l.names, vec!["a", "b", "a_lag1"]);
        assert_eq!(l.rows[0], vec![3.0, 4.0, 1.0]);
        assert_eq!(l.len(), 3);
        assert!(m.lagged(1, 5).is_err());
    }

    #[test]
    fn csv_round_trip_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let recs = synthetic(3, 30, &SyntheticSpec::default()).unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&p, &recs).unwrap();
        let back = load_csv(&p, FeatureSpec::Oxford7).unwrap();
        assert_eq!(back, recs);

        let m = compute_features(&back, FeatureSpec::Oxford7).unwrap();
        let w = windowize(&m.rows, 8, 0).unwrap();
        let samples: Vec<_> = w
            .iter()
            .map(|x| SequenceSample::from_window(x, &m.dates, Some((-0.1, 0.1))))
            .collect();
        let out = dir.path().join("s.jsonl");
        write_jsonl(&out, &samples).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), samples.len());
        let first: SequenceSample = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, samples[0]);
    }
}
