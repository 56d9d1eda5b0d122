//! Input parsing and return-panel preparation.
//!
//! Turns a raw closing-price CSV into one clean per-stage panel of log
//! returns: parse prices, difference log prices, drop tickers that fail the
//! exclusion rules (missing data inside a stage, special-treatment flag,
//! identically-zero returns over a stage), then slice stage windows.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};

use chrono::NaiveDate;
use ndarray::Array2;
use thiserror::Error;

const PRICE_HEADER: &str = "date,ticker,close";
const UNIVERSE_HEADER: &str = "ticker,st_flag";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    MalformedHeader {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: expected {expected} comma-separated fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid date `{value}` (expected YYYY-MM-DD)")]
    InvalidDate { line: usize, value: String },
    #[error("line {line}: non-positive price {value} for ({date}, {ticker})")]
    NonPositivePrice {
        line: usize,
        date: NaiveDate,
        ticker: String,
        value: f64,
    },
    #[error("line {line}: duplicate cell for ({date}, {ticker})")]
    DuplicateCell {
        line: usize,
        date: NaiveDate,
        ticker: String,
    },
    #[error("line {line}: empty ticker")]
    EmptyTicker { line: usize },
    #[error("line {line}: duplicate ticker `{ticker}`")]
    DuplicateTicker { line: usize, ticker: String },
    #[error("line {line}: invalid st flag `{value}` (expected 0 or 1)")]
    InvalidStFlag { line: usize, value: String },
    #[error("line {line}: invalid stage entry `{value}`: {reason}")]
    InvalidStage {
        line: usize,
        value: String,
        reason: String,
    },
    #[error("stage {code}: start {start} is not before end {end}")]
    StageBounds {
        code: String,
        start: NaiveDate,
        end: NaiveDate,
    },
    #[error("stages {first} and {second} overlap")]
    StageOverlap { first: String, second: String },
    #[error("duplicate stage code `{0}`")]
    DuplicateStageCode(String),
    #[error("ticker {0} has no special-treatment flag")]
    MissingStFlag(String),
    #[error("no tickers survive the exclusion rules")]
    EmptyUniverse,
    #[error("stage {code}: {rows} return rows in [{start}, {end}); at least 2 required")]
    StageTooShort {
        code: String,
        start: NaiveDate,
        end: NaiveDate,
        rows: usize,
    },
    #[error("stage {stage}: ticker {ticker} has a missing return inside the window")]
    MissingReturn { stage: String, ticker: String },
    #[error("stage {stage}: ticker {ticker} has identically zero returns over the window")]
    AllZeroColumn { stage: String, ticker: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bull or bear market stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Bull,
    Bear,
}

impl std::fmt::Display for StageKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageKind::Bull => write!(f, "bull"),
            StageKind::Bear => write!(f, "bear"),
        }
    }
}

/// One market stage: a half-open calendar window `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageDefinition {
    pub code: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub kind: StageKind,
}

/// Dense date-by-ticker table of closing prices with explicit missing cells.
#[derive(Debug, Clone)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// Row-major `dates.len() x tickers.len()`.
    prices: Vec<Option<f64>>,
}

impl PricePanel {
    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn price(&self, date_idx: usize, ticker_idx: usize) -> Option<f64> {
        self.prices[date_idx * self.tickers.len() + ticker_idx]
    }
}

/// Full-period log returns; row `t` carries the date of the later price.
#[derive(Debug, Clone)]
pub struct ReturnMatrix {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// Row-major `dates.len() x tickers.len()`.
    values: Vec<Option<f64>>,
}

impl ReturnMatrix {
    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn value(&self, row: usize, ticker_idx: usize) -> Option<f64> {
        self.values[row * self.tickers.len() + ticker_idx]
    }

    /// Row range whose dates fall in `[stage.start, stage.end)`.
    pub fn stage_rows(&self, stage: &StageDefinition) -> std::ops::Range<usize> {
        let lo = self.dates.partition_point(|d| *d < stage.start);
        let hi = self.dates.partition_point(|d| *d < stage.end);
        lo..hi
    }
}

/// Clean per-stage panel: no missing cells, no all-zero column, at least two rows.
#[derive(Debug, Clone)]
pub struct ReturnPanel {
    pub stage: StageDefinition,
    pub tickers: Vec<String>,
    /// Rows are observations in date order, columns follow `tickers`.
    pub returns: Array2<f64>,
}

impl ReturnPanel {
    pub fn n_obs(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_stocks(&self) -> usize {
        self.returns.ncols()
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_date(value: &str, line: usize) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|_| IngestError::InvalidDate {
        line,
        value: value.to_string(),
    })
}

/// Parses the price CSV (`date,ticker,close`; empty close = missing cell).
///
/// Unparseable close values are marked missing; non-positive prices and
/// duplicate `(date, ticker)` cells are hard errors carrying the line number.
pub fn parse_prices<R: Read>(reader: R) -> Result<PricePanel, IngestError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(IngestError::MalformedHeader {
                line: 1,
                expected: PRICE_HEADER,
                found: String::new(),
            })
        }
    };
    if header.trim() != PRICE_HEADER {
        return Err(IngestError::MalformedHeader {
            line: 1,
            expected: PRICE_HEADER,
            found: header.trim().to_string(),
        });
    }

    let mut ticker_index: HashMap<String, usize> = HashMap::new();
    let mut tickers: Vec<String> = Vec::new();
    let mut seen: HashSet<(NaiveDate, usize)> = HashSet::new();
    let mut cells: Vec<(NaiveDate, usize, Option<f64>)> = Vec::new();

    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() != 3 {
            return Err(IngestError::FieldCount {
                line: line_no,
                expected: 3,
                found: fields.len(),
            });
        }
        let date = parse_date(fields[0], line_no)?;
        if fields[1].is_empty() {
            return Err(IngestError::EmptyTicker { line: line_no });
        }
        let ticker_idx = match ticker_index.get(fields[1]) {
            Some(&i) => i,
            None => {
                let i = tickers.len();
                ticker_index.insert(fields[1].to_string(), i);
                tickers.push(fields[1].to_string());
                i
            }
        };
        let close = if fields[2].is_empty() {
            None
        } else {
            match fields[2].parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    if v <= 0.0 {
                        return Err(IngestError::NonPositivePrice {
                            line: line_no,
                            date,
                            ticker: tickers[ticker_idx].clone(),
                            value: v,
                        });
                    }
                    Some(v)
                }
                // Unparseable or non-finite cells are treated as missing.
                _ => None,
            }
        };
        if !seen.insert((date, ticker_idx)) {
            return Err(IngestError::DuplicateCell {
                line: line_no,
                date,
                ticker: tickers[ticker_idx].clone(),
            });
        }
        cells.push((date, ticker_idx, close));
    }

    let mut dates: Vec<NaiveDate> = cells.iter().map(|c| c.0).collect();
    dates.sort_unstable();
    dates.dedup();
    let date_index: HashMap<NaiveDate, usize> =
        dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();

    let mut prices = vec![None; dates.len() * tickers.len()];
    for (date, ticker_idx, close) in cells {
        prices[date_index[&date] * tickers.len() + ticker_idx] = close;
    }

    Ok(PricePanel {
        dates,
        tickers,
        prices,
    })
}

/// Parses the universe CSV (`ticker,st_flag`, flag in {0,1}).
pub fn parse_universe<R: Read>(reader: R) -> Result<HashMap<String, bool>, IngestError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(IngestError::MalformedHeader {
                line: 1,
                expected: UNIVERSE_HEADER,
                found: String::new(),
            })
        }
    };
    if header.trim() != UNIVERSE_HEADER {
        return Err(IngestError::MalformedHeader {
            line: 1,
            expected: UNIVERSE_HEADER,
            found: header.trim().to_string(),
        });
    }
    let mut flags = HashMap::new();
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() != 2 {
            return Err(IngestError::FieldCount {
                line: line_no,
                expected: 2,
                found: fields.len(),
            });
        }
        if fields[0].is_empty() {
            return Err(IngestError::EmptyTicker { line: line_no });
        }
        let flag = match fields[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(IngestError::InvalidStFlag {
                    line: line_no,
                    value: other.to_string(),
                })
            }
        };
        if flags.insert(fields[0].to_string(), flag).is_some() {
            return Err(IngestError::DuplicateTicker {
                line: line_no,
                ticker: fields[0].to_string(),
            });
        }
    }
    Ok(flags)
}

fn parse_month_start(value: &str, line: usize, entry: &str) -> Result<NaiveDate, IngestError> {
    let invalid = || IngestError::InvalidStage {
        line,
        value: entry.to_string(),
        reason: format!("invalid month `{value}` (expected YYYY-MM)"),
    };
    let (y, m) = value.split_once('-').ok_or_else(invalid)?;
    let year: i32 = y.parse().map_err(|_| invalid())?;
    let month: u32 = m.parse().map_err(|_| invalid())?;
    NaiveDate::from_ymd_opt(year, month, 1).ok_or_else(invalid)
}

/// Parses the stage config: one `CODE,start=YYYY-MM,end=YYYY-MM,kind=bull|bear`
/// per line. Month labels resolve to the first calendar date of the month and
/// windows are half-open, so contiguous stages partition the period.
pub fn parse_stages<R: Read>(reader: R) -> Result<Vec<StageDefinition>, IngestError> {
    let mut stages: Vec<StageDefinition> = Vec::new();
    for (offset, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = offset + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let invalid = |reason: &str| IngestError::InvalidStage {
            line: line_no,
            value: trimmed.to_string(),
            reason: reason.to_string(),
        };
        let fields = split_fields(trimmed);
        if fields.len() != 4 {
            return Err(invalid("expected CODE,start=YYYY-MM,end=YYYY-MM,kind=bull|bear"));
        }
        let code = fields[0].to_string();
        if code.is_empty() {
            return Err(invalid("empty stage code"));
        }
        let start = match fields[1].strip_prefix("start=") {
            Some(v) => parse_month_start(v, line_no, trimmed)?,
            None => return Err(invalid("second field must be start=YYYY-MM")),
        };
        let end = match fields[2].strip_prefix("end=") {
            Some(v) => parse_month_start(v, line_no, trimmed)?,
            None => return Err(invalid("third field must be end=YYYY-MM")),
        };
        let kind = match fields[3].strip_prefix("kind=") {
            Some("bull") => StageKind::Bull,
            Some("bear") => StageKind::Bear,
            _ => return Err(invalid("fourth field must be kind=bull or kind=bear")),
        };
        if start >= end {
            return Err(IngestError::StageBounds { code, start, end });
        }
        stages.push(StageDefinition {
            code,
            start,
            end,
            kind,
        });
    }

    stages.sort_by_key(|s| s.start);
    let mut codes = HashSet::new();
    for stage in &stages {
        if !codes.insert(stage.code.clone()) {
            return Err(IngestError::DuplicateStageCode(stage.code.clone()));
        }
    }
    for pair in stages.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(IngestError::StageOverlap {
                first: pair[0].code.clone(),
                second: pair[1].code.clone(),
            });
        }
    }
    Ok(stages)
}

/// Differences log prices: row `t` holds `ln P_{t+1} - ln P_t` dated at the
/// later price. A missing price invalidates both adjacent returns; gaps are
/// never bridged.
pub fn compute_log_returns(panel: &PricePanel) -> ReturnMatrix {
    let t_raw = panel.n_dates();
    let n = panel.n_tickers();
    let rows = t_raw.saturating_sub(1);
    let mut values = vec![None; rows * n];
    for t in 0..rows {
        for i in 0..n {
            if let (Some(prev), Some(next)) = (panel.price(t, i), panel.price(t + 1, i)) {
                values[t * n + i] = Some(next.ln() - prev.ln());
            }
        }
    }
    ReturnMatrix {
        dates: panel.dates[1..].to_vec(),
        tickers: panel.tickers.clone(),
        values,
    }
}

/// Applies the three exclusion rules over the full period and returns the
/// retained ticker column indices in input order:
/// (a) any missing return inside any stage window,
/// (b) special-treatment flag set,
/// (c) identically zero returns over a full stage window.
pub fn filter_universe(
    returns: &ReturnMatrix,
    st_flags: &HashMap<String, bool>,
    stages: &[StageDefinition],
) -> Result<Vec<usize>, IngestError> {
    let mut retained = Vec::new();
    'ticker: for (i, ticker) in returns.tickers.iter().enumerate() {
        let flagged = st_flags
            .get(ticker)
            .ok_or_else(|| IngestError::MissingStFlag(ticker.clone()))?;
        if *flagged {
            continue;
        }
        for stage in stages {
            let rows = returns.stage_rows(stage);
            if rows.is_empty() {
                continue;
            }
            let mut all_zero = true;
            for t in rows {
                match returns.value(t, i) {
                    None => continue 'ticker,
                    Some(r) => {
                        if r != 0.0 {
                            all_zero = false;
                        }
                    }
                }
            }
            if all_zero {
                continue 'ticker;
            }
        }
        retained.push(i);
    }
    if retained.is_empty() {
        return Err(IngestError::EmptyUniverse);
    }
    Ok(retained)
}

/// Restricts the return matrix to one stage window and the retained tickers.
pub fn slice_stage(
    returns: &ReturnMatrix,
    retained: &[usize],
    stage: &StageDefinition,
) -> Result<ReturnPanel, IngestError> {
    let rows = returns.stage_rows(stage);
    if rows.len() < 2 {
        return Err(IngestError::StageTooShort {
            code: stage.code.clone(),
            start: stage.start,
            end: stage.end,
            rows: rows.len(),
        });
    }
    let tickers: Vec<String> = retained
        .iter()
        .map(|&i| returns.tickers[i].clone())
        .collect();
    let mut data = Array2::zeros((rows.len(), retained.len()));
    for (out_col, &i) in retained.iter().enumerate() {
        let mut all_zero = true;
        for (out_row, t) in rows.clone().enumerate() {
            match returns.value(t, i) {
                None => {
                    return Err(IngestError::MissingReturn {
                        stage: stage.code.clone(),
                        ticker: returns.tickers[i].clone(),
                    })
                }
                Some(r) => {
                    if r != 0.0 {
                        all_zero = false;
                    }
                    data[(out_row, out_col)] = r;
                }
            }
        }
        if all_zero {
            return Err(IngestError::AllZeroColumn {
                stage: stage.code.clone(),
                ticker: returns.tickers[i].clone(),
            });
        }
    }
    Ok(ReturnPanel {
        stage: stage.clone(),
        tickers,
        returns: data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn stage(code: &str, start: NaiveDate, end: NaiveDate, kind: StageKind) -> StageDefinition {
        StageDefinition {
            code: code.to_string(),
            start,
            end,
            kind,
        }
    }

    #[test]
    fn parses_complete_panel() {
        let csv = "date,ticker,close\n2020-01-06,A,10.0\n2020-01-06,B,20.0\n\
                   2020-01-13,A,11.0\n2020-01-13,B,21.0\n";
        let panel = parse_prices(csv.as_bytes()).unwrap();
        assert_eq!(panel.n_dates(), 2);
        assert_eq!(panel.n_tickers(), 2);
        assert_eq!(panel.price(0, 0), Some(10.0));
        assert_eq!(panel.price(1, 1), Some(21.0));
    }

    #[test]
    fn blank_close_marks_missing() {
        let csv = "date,ticker,close\n2020-01-06,A,10.0\n2020-01-06,B,20.0\n\
                   2020-01-13,A,11.0\n2020-01-13,B,\n";
        let panel = parse_prices(csv.as_bytes()).unwrap();
        assert_eq!(panel.price(1, 1), None);
        assert_eq!(panel.price(1, 0), Some(11.0));
    }

    #[test]
    fn negative_price_reports_line() {
        let csv = "date,ticker,close\n2020-01-06,A,10.0\n2020-01-13,A,-1.0\n";
        match parse_prices(csv.as_bytes()) {
            Err(IngestError::NonPositivePrice { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected NonPositivePrice, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_cell_reports_line() {
        let csv = "date,ticker,close\n2020-01-06,A,10.0\n2020-01-06,A,10.5\n";
        match parse_prices(csv.as_bytes()) {
            Err(IngestError::DuplicateCell { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected DuplicateCell, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        let csv = "date,close,ticker\n";
        assert!(matches!(
            parse_prices(csv.as_bytes()),
            Err(IngestError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn log_return_of_equal_prices_is_zero() {
        let csv = "date,ticker,close\n2020-01-06,A,100.0\n2020-01-13,A,100.0\n";
        let returns = compute_log_returns(&parse_prices(csv.as_bytes()).unwrap());
        assert_eq!(returns.n_rows(), 1);
        assert_eq!(returns.value(0, 0), Some(0.0));
    }

    #[test]
    fn log_return_of_e_fold_increase_is_one() {
        let p1 = 100.0;
        let p2 = 100.0 * std::f64::consts::E;
        let csv = format!("date,ticker,close\n2020-01-06,A,{p1}\n2020-01-13,A,{p2}\n");
        let returns = compute_log_returns(&parse_prices(csv.as_bytes()).unwrap());
        let r = returns.value(0, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_price_invalidates_both_returns() {
        let csv = "date,ticker,close\n2020-01-06,A,100.0\n2020-01-13,A,\n2020-01-20,A,121.0\n";
        let returns = compute_log_returns(&parse_prices(csv.as_bytes()).unwrap());
        assert_eq!(returns.value(0, 0), None);
        assert_eq!(returns.value(1, 0), None);
    }

    fn toy_returns() -> ReturnMatrix {
        // Three tickers over five dates: A is clean, B is ST-flagged,
        // C has identically zero returns in the second stage window.
        let mut csv = String::from("date,ticker,close\n");
        let prices_a = [10.0, 11.0, 10.5, 10.8, 11.2];
        let prices_b = [5.0, 5.2, 5.1, 5.3, 5.4];
        let prices_c = [7.0, 7.1, 7.2, 7.2, 7.2];
        for (t, day) in [6, 13, 20, 27, 34].iter().enumerate() {
            let d = date(2020, 1, 1) + chrono::Days::new(*day);
            csv.push_str(&format!("{d},A,{}\n", prices_a[t]));
            csv.push_str(&format!("{d},B,{}\n", prices_b[t]));
            csv.push_str(&format!("{d},C,{}\n", prices_c[t]));
        }
        compute_log_returns(&parse_prices(csv.as_bytes()).unwrap())
    }

    fn toy_stages() -> Vec<StageDefinition> {
        vec![
            stage("S1", date(2020, 1, 1), date(2020, 1, 22), StageKind::Bull),
            stage("S2", date(2020, 1, 22), date(2020, 3, 1), StageKind::Bear),
        ]
    }

    #[test]
    fn filter_applies_all_three_rules() {
        let returns = toy_returns();
        let stages = toy_stages();
        let mut flags = HashMap::new();
        flags.insert("A".to_string(), false);
        flags.insert("B".to_string(), true);
        flags.insert("C".to_string(), false);
        let retained = filter_universe(&returns, &flags, &stages).unwrap();
        // B drops on the ST flag, C on zero returns over S2.
        assert_eq!(retained, vec![0]);
    }

    #[test]
    fn filter_is_idempotent() {
        let returns = toy_returns();
        let stages = toy_stages();
        let mut flags = HashMap::new();
        flags.insert("A".to_string(), false);
        flags.insert("B".to_string(), false);
        flags.insert("C".to_string(), false);
        let first = filter_universe(&returns, &flags, &stages).unwrap();
        // Re-filtering a matrix already restricted to the retained tickers
        // must keep everything.
        let panel_like: Vec<String> = first.iter().map(|&i| returns.tickers[i].clone()).collect();
        let restricted = ReturnMatrix {
            dates: returns.dates.clone(),
            tickers: panel_like,
            values: (0..returns.n_rows())
                .flat_map(|t| first.iter().map(move |&i| (t, i)))
                .map(|(t, i)| returns.value(t, i))
                .collect(),
        };
        let second = filter_universe(&restricted, &flags, &stages).unwrap();
        assert_eq!(second, (0..first.len()).collect::<Vec<_>>());
    }

    #[test]
    fn empty_universe_is_error() {
        let returns = toy_returns();
        let stages = toy_stages();
        let mut flags = HashMap::new();
        flags.insert("A".to_string(), true);
        flags.insert("B".to_string(), true);
        flags.insert("C".to_string(), true);
        assert!(matches!(
            filter_universe(&returns, &flags, &stages),
            Err(IngestError::EmptyUniverse)
        ));
    }

    #[test]
    fn slice_respects_half_open_window() {
        let returns = toy_returns();
        let stages = toy_stages();
        let panel = slice_stage(&returns, &[0], &stages[0]).unwrap();
        // Stage S1 covers return rows dated Jan 14 and Jan 21.
        assert_eq!(panel.n_obs(), 2);
        assert_eq!(panel.n_stocks(), 1);
        let full = slice_stage(&returns, &[0], &stages[1]).unwrap();
        assert_eq!(full.n_obs(), 2);
    }

    #[test]
    fn stage_slices_are_disjoint_and_ordered() {
        let returns = toy_returns();
        let stages = toy_stages();
        let r1 = returns.stage_rows(&stages[0]);
        let r2 = returns.stage_rows(&stages[1]);
        assert!(r1.end <= r2.start);
        assert_eq!(r1.len() + r2.len(), returns.n_rows());
    }

    #[test]
    fn short_window_is_error() {
        let returns = toy_returns();
        let narrow = stage("X", date(2020, 1, 1), date(2020, 1, 8), StageKind::Bull);
        assert!(matches!(
            slice_stage(&returns, &[0], &narrow),
            Err(IngestError::StageTooShort { .. })
        ));
    }

    #[test]
    fn parses_stage_config() {
        let cfg = "BULL1,start=2005-06,end=2007-10,kind=bull\nBEAR1,start=2007-10,end=2008-10,kind=bear\n";
        let stages = parse_stages(cfg.as_bytes()).unwrap();
        assert_eq!(stages.len(), 2);
        assert_eq!(stages[0].code, "BULL1");
        assert_eq!(stages[0].start, date(2005, 6, 1));
        assert_eq!(stages[0].end, date(2007, 10, 1));
        assert_eq!(stages[1].kind, StageKind::Bear);
    }

    #[test]
    fn overlapping_stages_rejected() {
        let cfg = "A,start=2005-01,end=2006-01,kind=bull\nB,start=2005-06,end=2007-01,kind=bear\n";
        assert!(matches!(
            parse_stages(cfg.as_bytes()),
            Err(IngestError::StageOverlap { .. })
        ));
    }

    #[test]
    fn universe_parse_and_flag_validation() {
        let csv = "ticker,st_flag\nA,0\nB,1\n";
        let flags = parse_universe(csv.as_bytes()).unwrap();
        assert_eq!(flags["A"], false);
        assert_eq!(flags["B"], true);
        let bad = "ticker,st_flag\nA,2\n";
        assert!(matches!(
            parse_universe(bad.as_bytes()),
            Err(IngestError::InvalidStFlag { line: 2, .. })
        ));
    }
}
