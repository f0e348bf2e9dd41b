//! CSV ingestion and cleaning for the three input datasets.
//!
//! Sources and their cleaning rules:
//!
//! - **Orders** (`fips,state,county,order_effective`): one record per
//!   county; when a county carries several order rows (city, county and
//!   statewide orders) the earliest effective date wins, and identical
//!   duplicates are dropped silently but counted.
//! - **Cases** (`date,county,state,fips,cases,deaths`, the public
//!   county-series layout): rows without a county assignment are dropped
//!   and counted; cumulative counts that decline from one day to the next
//!   are official revisions and are retained unchanged.
//! - **Tests** (`date,state,totalTestResults`, extra columns ignored): one
//!   row per state and date; a present row with a missing cumulative value
//!   carries the prior date's value forward, and a state's record starts
//!   from zero.
//!
//! Rows outside the study window are filtered and counted in the drop log.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use epidid_core::dates::parse_iso;
use epidid_core::series::{daily_new_from_cumulative, CountySeries, Fips, SeriesSet, StateTests};
use serde::Serialize;
use thiserror::Error;

/// Inclusive date range retained by the parsers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for DateWindow {
    fn default() -> Self {
        DateWindow {
            start: parse_iso("2020-03-01").expect("valid date"),
            end: parse_iso("2020-05-07").expect("valid date"),
        }
    }
}

impl DateWindow {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing required column '{0}' in header")]
    MissingColumn(String),
    #[error("conflicting duplicate test rows for {state} on {date}: {left} vs {right}")]
    ConflictingTests {
        state: String,
        date: NaiveDate,
        left: i64,
        right: i64,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn row_err(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Row {
        line,
        message: message.into(),
    }
}

/// Counts of discarded rows by reason for one source file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropLog {
    pub input_rows: usize,
    pub retained_rows: usize,
    /// Case rows with no county assignment.
    pub unassigned: usize,
    /// Rows outside the study window.
    pub out_of_window: usize,
    /// Exact duplicates collapsed silently.
    pub duplicates: usize,
}

impl DropLog {
    pub fn dropped_total(&self) -> usize {
        self.unassigned + self.out_of_window + self.duplicates
    }

    /// Invariant: drops account exactly for the input/retained difference.
    pub fn is_consistent(&self) -> bool {
        self.input_rows == self.retained_rows + self.dropped_total()
    }

    /// Share of input rows dropped for lacking a county assignment.
    pub fn unassigned_fraction(&self) -> f64 {
        if self.input_rows == 0 {
            0.0
        } else {
            self.unassigned as f64 / self.input_rows as f64
        }
    }
}

/// One county's resolved earliest order date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRecord {
    pub fips: Fips,
    pub state: String,
    pub county_name: String,
    pub order_effective: NaiveDate,
}

/// One retained county-day observation of cumulative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRow {
    pub date: NaiveDate,
    pub county: String,
    pub state: String,
    pub fips: Fips,
    pub cumulative_cases: i64,
    pub cumulative_deaths: i64,
}

/// One state-day observation of cumulative tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRow {
    pub date: NaiveDate,
    pub state: String,
    pub cumulative_tests: i64,
}

/// The three parsed datasets plus their cleaning logs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDataset {
    pub orders: Vec<OrderRecord>,
    pub cases: Vec<CaseRow>,
    pub tests: Vec<TestRow>,
    pub orders_log: DropLog,
    pub cases_log: DropLog,
    pub tests_log: DropLog,
}

/// Column-name mapping for the orders file.
#[derive(Debug, Clone)]
pub struct OrderSchema {
    pub fips: String,
    pub state: String,
    pub county: String,
    pub order_effective: String,
}

impl Default for OrderSchema {
    fn default() -> Self {
        OrderSchema {
            fips: "fips".into(),
            state: "state".into(),
            county: "county".into(),
            order_effective: "order_effective".into(),
        }
    }
}

struct Header {
    index: BTreeMap<String, usize>,
}

impl Header {
    fn new(headers: &csv::StringRecord) -> Self {
        Header {
            index: headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect(),
        }
    }

    fn require(&self, name: &str) -> Result<usize, IngestError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn field(record: &csv::StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("").trim()
}

fn parse_count(s: &str, line: u64, what: &str) -> Result<i64, IngestError> {
    s.parse::<i64>()
        .map_err(|_| row_err(line, format!("{what} '{s}' is not an integer")))
        .and_then(|v| {
            if v < 0 {
                Err(row_err(line, format!("{what} '{s}' is negative")))
            } else {
                Ok(v)
            }
        })
}

/// Parse the orders file, resolving each county to its earliest date.
pub fn parse_orders<R: Read>(
    reader: R,
    schema: &OrderSchema,
    window: DateWindow,
) -> Result<(Vec<OrderRecord>, DropLog), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = Header::new(rdr.headers()?);
    let fips_col = header.require(&schema.fips)?;
    let state_col = header.require(&schema.state)?;
    let county_col = header.require(&schema.county)?;
    let date_col = header.require(&schema.order_effective)?;

    let mut log = DropLog::default();
    let mut by_fips: BTreeMap<Fips, OrderRecord> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        log.input_rows += 1;
        let fips_raw = field(&record, fips_col);
        let fips = Fips::parse(fips_raw)
            .ok_or_else(|| row_err(line, format!("invalid fips '{fips_raw}'")))?;
        let date_raw = field(&record, date_col);
        let date = parse_iso(date_raw)
            .ok_or_else(|| row_err(line, format!("invalid date '{date_raw}'")))?;
        if !window.contains(date) {
            return Err(row_err(
                line,
                format!("order date {date} outside study window"),
            ));
        }
        let rec = OrderRecord {
            fips: fips.clone(),
            state: field(&record, state_col).to_string(),
            county_name: field(&record, county_col).to_string(),
            order_effective: date,
        };
        match by_fips.get_mut(&fips) {
            None => {
                by_fips.insert(fips, rec);
                log.retained_rows += 1;
            }
            Some(existing) => {
                // Earliest effective date wins; equal dates collapse.
                if rec.order_effective < existing.order_effective {
                    *existing = rec;
                }
                log.duplicates += 1;
            }
        }
    }
    Ok((by_fips.into_values().collect(), log))
}

/// Parse the county case series, dropping unassigned rows.
pub fn parse_cases<R: Read>(
    reader: R,
    window: DateWindow,
) -> Result<(Vec<CaseRow>, DropLog), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut log = DropLog::default();
    let mut rows = Vec::new();
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers.get(0) == Some("")) {
        return Ok((rows, log));
    }
    let header = Header::new(&headers);
    let date_col = header.require("date")?;
    let county_col = header.require("county")?;
    let state_col = header.require("state")?;
    let fips_col = header.require("fips")?;
    let cases_col = header.require("cases")?;
    let deaths_col = header.require("deaths")?;

    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        log.input_rows += 1;
        let fips_raw = field(&record, fips_col);
        if fips_raw.is_empty() {
            log.unassigned += 1;
            continue;
        }
        let fips = Fips::parse(fips_raw)
            .ok_or_else(|| row_err(line, format!("invalid fips '{fips_raw}'")))?;
        let date_raw = field(&record, date_col);
        let date = parse_iso(date_raw)
            .ok_or_else(|| row_err(line, format!("invalid date '{date_raw}'")))?;
        if !window.contains(date) {
            log.out_of_window += 1;
            continue;
        }
        rows.push(CaseRow {
            date,
            county: field(&record, county_col).to_string(),
            state: field(&record, state_col).to_string(),
            fips,
            cumulative_cases: parse_count(field(&record, cases_col), line, "cases")?,
            cumulative_deaths: parse_count(field(&record, deaths_col), line, "deaths")?,
        });
        log.retained_rows += 1;
    }
    rows.sort_by(|a, b| (&a.fips, a.date).cmp(&(&b.fips, b.date)));
    Ok((rows, log))
}

/// Parse the state test series, carrying missing cumulative values forward.
pub fn parse_tests<R: Read>(
    reader: R,
    window: DateWindow,
) -> Result<(Vec<TestRow>, DropLog), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = Header::new(rdr.headers()?);
    let date_col = header.require("date")?;
    let state_col = header.require("state")?;
    let tests_col = header.require("totalTestResults")?;

    let mut log = DropLog::default();
    // (state, date) -> (value or carry-forward marker, line)
    let mut raw: Vec<(String, NaiveDate, Option<i64>, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        log.input_rows += 1;
        let date_raw = field(&record, date_col);
        let date = parse_iso(date_raw)
            .ok_or_else(|| row_err(line, format!("invalid date '{date_raw}'")))?;
        if !window.contains(date) {
            log.out_of_window += 1;
            continue;
        }
        let value_raw = field(&record, tests_col);
        let value = if value_raw.is_empty() {
            None
        } else {
            Some(parse_count(value_raw, line, "totalTestResults")?)
        };
        raw.push((field(&record, state_col).to_string(), date, value, line));
    }
    // Chronological order within each state before carry-forward.
    raw.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));

    let mut rows: Vec<TestRow> = Vec::new();
    let mut last: Option<(String, NaiveDate, i64)> = None;
    for (state, date, value, _line) in raw {
        let carry = match &last {
            Some((s, _, v)) if *s == state => *v,
            _ => 0,
        };
        let resolved = value.unwrap_or(carry);
        if let Some((s, d, v)) = &last {
            if *s == state && *d == date {
                if *v != resolved {
                    return Err(IngestError::ConflictingTests {
                        state,
                        date,
                        left: *v,
                        right: resolved,
                    });
                }
                log.duplicates += 1;
                continue;
            }
        }
        rows.push(TestRow {
            date,
            state: state.clone(),
            cumulative_tests: resolved,
        });
        log.retained_rows += 1;
        last = Some((state, date, resolved));
    }
    Ok((rows, log))
}

/// Assemble county series, the county universe and the test lookup from a
/// parsed dataset.
///
/// Counties present only in the orders file contribute zero counts;
/// coverage spans the observed case dates (falling back to the window for
/// an empty dataset).
pub fn build_series(dataset: &RawDataset, window: DateWindow) -> (SeriesSet, StateTests) {
    let orders: BTreeMap<Fips, &OrderRecord> =
        dataset.orders.iter().map(|o| (o.fips.clone(), o)).collect();

    let mut cumulative_cases: BTreeMap<Fips, BTreeMap<NaiveDate, i64>> = BTreeMap::new();
    let mut cumulative_deaths: BTreeMap<Fips, BTreeMap<NaiveDate, i64>> = BTreeMap::new();
    let mut states: BTreeMap<Fips, String> = BTreeMap::new();
    for row in &dataset.cases {
        cumulative_cases
            .entry(row.fips.clone())
            .or_default()
            .insert(row.date, row.cumulative_cases);
        cumulative_deaths
            .entry(row.fips.clone())
            .or_default()
            .insert(row.date, row.cumulative_deaths);
        states
            .entry(row.fips.clone())
            .or_insert_with(|| row.state.clone());
    }
    for order in &dataset.orders {
        states
            .entry(order.fips.clone())
            .or_insert_with(|| order.state.clone());
    }

    let mut coverage_start = None;
    let mut coverage_end = None;
    for row in &dataset.cases {
        coverage_start = Some(coverage_start.map_or(row.date, |d: NaiveDate| d.min(row.date)));
        coverage_end = Some(coverage_end.map_or(row.date, |d: NaiveDate| d.max(row.date)));
    }

    let mut counties = BTreeMap::new();
    for (fips, state) in &states {
        let daily_cases = cumulative_cases
            .get(fips)
            .map(daily_new_from_cumulative)
            .unwrap_or_default();
        let daily_deaths = cumulative_deaths
            .get(fips)
            .map(daily_new_from_cumulative)
            .unwrap_or_default();
        counties.insert(
            fips.clone(),
            CountySeries {
                fips: fips.clone(),
                state: state.clone(),
                daily_cases,
                daily_deaths,
                order_effective: orders.get(fips).map(|o| o.order_effective),
            },
        );
    }

    let mut tests = StateTests::new();
    for row in &dataset.tests {
        tests.insert(&row.state, row.date, row.cumulative_tests);
    }

    let series = SeriesSet {
        counties,
        coverage_start: coverage_start.unwrap_or(window.start),
        coverage_end: coverage_end.unwrap_or(window.end),
    };
    (series, tests)
}

/// Order dates keyed by county, as the grouping step expects.
pub fn order_dates(dataset: &RawDataset) -> BTreeMap<Fips, NaiveDate> {
    dataset
        .orders
        .iter()
        .map(|o| (o.fips.clone(), o.order_effective))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> DateWindow {
        DateWindow::default()
    }

    #[test]
    fn earliest_order_wins() {
        let csv = "fips,state,county,order_effective\n\
                   06073,CA,San Diego,2020-03-19\n\
                   06073,CA,San Diego,2020-03-17\n";
        let (orders, log) = parse_orders(csv.as_bytes(), &OrderSchema::default(), w()).unwrap();
        assert_eq!(orders.len(), 1);
        assert_eq!(orders[0].order_effective, parse_iso("2020-03-17").unwrap());
        assert_eq!(log.duplicates, 1);
        assert!(log.is_consistent());
    }

    #[test]
    fn single_row_maps_identically() {
        let csv = "fips,state,county,order_effective\n53033,WA,King,2020-03-23\n";
        let (orders, _) = parse_orders(csv.as_bytes(), &OrderSchema::default(), w()).unwrap();
        assert_eq!(
            orders[0],
            OrderRecord {
                fips: Fips::parse("53033").unwrap(),
                state: "WA".into(),
                county_name: "King".into(),
                order_effective: parse_iso("2020-03-23").unwrap(),
            }
        );
    }

    #[test]
    fn malformed_date_names_the_line() {
        let csv = "fips,state,county,order_effective\n\
                   53033,WA,King,2020-03-23\n\
                   06073,CA,San Diego,03/45/2020\n";
        let err = parse_orders(csv.as_bytes(), &OrderSchema::default(), w()).unwrap_err();
        match err {
            IngestError::Row { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("03/45/2020"));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn custom_schema_maps_columns() {
        let csv = "FIPS,ST,NAME,effective\n01001,AL,Autauga,2020-04-04\n";
        let schema = OrderSchema {
            fips: "FIPS".into(),
            state: "ST".into(),
            county: "NAME".into(),
            order_effective: "effective".into(),
        };
        let (orders, _) = parse_orders(csv.as_bytes(), &schema, w()).unwrap();
        assert_eq!(orders[0].state, "AL");
    }

    #[test]
    fn unassigned_case_rows_are_dropped_and_counted() {
        let csv = "date,county,state,fips,cases,deaths\n\
                   2020-03-20,Unknown,WA,,10,0\n\
                   2020-03-20,King,WA,53033,50,2\n";
        let (rows, log) = parse_cases(csv.as_bytes(), w()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(log.unassigned, 1);
        assert!(log.is_consistent());
        assert!((log.unassigned_fraction() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn declining_cumulatives_are_retained() {
        let csv = "date,county,state,fips,cases,deaths\n\
                   2020-03-20,King,WA,53033,50,2\n\
                   2020-03-21,King,WA,53033,48,2\n";
        let (rows, _) = parse_cases(csv.as_bytes(), w()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].cumulative_cases, 48);
    }

    #[test]
    fn empty_cases_file_is_empty_output() {
        let (rows, log) = parse_cases("".as_bytes(), w()).unwrap();
        assert!(rows.is_empty());
        assert_eq!(log, DropLog::default());
    }

    #[test]
    fn non_integer_count_is_a_row_error() {
        let csv = "date,county,state,fips,cases,deaths\n\
                   2020-03-20,King,WA,53033,fifty,2\n";
        let err = parse_cases(csv.as_bytes(), w()).unwrap_err();
        assert!(matches!(err, IngestError::Row { line: 2, .. }));
    }

    #[test]
    fn out_of_window_case_rows_are_filtered() {
        let csv = "date,county,state,fips,cases,deaths\n\
                   2020-01-25,King,WA,53033,1,0\n\
                   2020-03-20,King,WA,53033,50,2\n";
        let (rows, log) = parse_cases(csv.as_bytes(), w()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(log.out_of_window, 1);
    }

    #[test]
    fn missing_test_value_carries_forward() {
        let csv = "date,state,totalTestResults\n\
                   2020-03-20,NY,1000\n\
                   2020-03-21,NY,\n";
        let (rows, _) = parse_tests(csv.as_bytes(), w()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].cumulative_tests, 1000);
    }

    #[test]
    fn test_rows_pass_through_and_extra_columns_ignored() {
        let csv = "date,state,positive,totalTestResults,grade\n\
                   2020-03-20,NY,500,1000,A\n";
        let (rows, _) = parse_tests(csv.as_bytes(), w()).unwrap();
        assert_eq!(
            rows[0],
            TestRow {
                date: parse_iso("2020-03-20").unwrap(),
                state: "NY".into(),
                cumulative_tests: 1000,
            }
        );
    }

    #[test]
    fn conflicting_test_duplicates_error() {
        let csv = "date,state,totalTestResults\n\
                   2020-03-20,NY,1000\n\
                   2020-03-20,NY,1200\n";
        let err = parse_tests(csv.as_bytes(), w()).unwrap_err();
        assert!(matches!(err, IngestError::ConflictingTests { .. }));
    }

    #[test]
    fn identical_test_duplicates_collapse() {
        let csv = "date,state,totalTestResults\n\
                   2020-03-20,NY,1000\n\
                   2020-03-20,NY,1000\n";
        let (rows, log) = parse_tests(csv.as_bytes(), w()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(log.duplicates, 1);
        assert!(log.is_consistent());
    }

    #[test]
    fn series_include_order_only_counties_with_zero_counts() {
        let orders_csv = "fips,state,county,order_effective\n06073,CA,San Diego,2020-03-17\n";
        let cases_csv = "date,county,state,fips,cases,deaths\n\
                         2020-03-20,King,WA,53033,50,2\n";
        let (orders, orders_log) =
            parse_orders(orders_csv.as_bytes(), &OrderSchema::default(), w()).unwrap();
        let (cases, cases_log) = parse_cases(cases_csv.as_bytes(), w()).unwrap();
        let dataset = RawDataset {
            orders,
            cases,
            tests: Vec::new(),
            orders_log,
            cases_log,
            tests_log: DropLog::default(),
        };
        let (series, _) = build_series(&dataset, w());
        assert_eq!(series.counties.len(), 2);
        let sd = &series.counties[&Fips::parse("06073").unwrap()];
        assert!(sd.daily_cases.is_empty());
        assert_eq!(sd.order_effective, Some(parse_iso("2020-03-17").unwrap()));
        let king = &series.counties[&Fips::parse("53033").unwrap()];
        assert_eq!(king.order_effective, None);
        assert_eq!(king.daily_cases.values().sum::<i64>(), 50);
    }
}
