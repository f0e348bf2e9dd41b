//! County time series and state test series.
//!
//! Daily values are first differences of the retained cumulative counts, so
//! they can be negative where the upstream source revised a cumulative count
//! downward. Absent dates mean zero new counts.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use crate::dates::{add_days, Date};
use crate::error::{Error, Result};

/// 5-digit county FIPS identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fips(String);

impl Fips {
    /// Accepts 1-5 digit strings, left-padding with zeros to the canonical
    /// 5-digit form. Anything else is rejected.
    pub fn parse(s: &str) -> Option<Fips> {
        let t = s.trim();
        if t.is_empty() || t.len() > 5 || !t.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut out = String::new();
        for _ in t.len()..5 {
            out.push('0');
        }
        out.push_str(t);
        Some(Fips(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for Fips {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which outcome a panel or fit is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutcomeKind {
    Cases,
    Fatalities,
}

impl core::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OutcomeKind::Cases => f.write_str("cases"),
            OutcomeKind::Fatalities => f.write_str("fatalities"),
        }
    }
}

/// Daily new case/fatality counts for one county.
#[derive(Debug, Clone, PartialEq)]
pub struct CountySeries {
    pub fips: Fips,
    pub state: String,
    /// Daily new cases; revisions make negative values legitimate.
    pub daily_cases: BTreeMap<Date, i64>,
    /// Daily new fatalities.
    pub daily_deaths: BTreeMap<Date, i64>,
    /// Effective date of the county's earliest stay-at-home order, if any.
    pub order_effective: Option<Date>,
}

impl CountySeries {
    pub fn daily(&self, kind: OutcomeKind) -> &BTreeMap<Date, i64> {
        match kind {
            OutcomeKind::Cases => &self.daily_cases,
            OutcomeKind::Fatalities => &self.daily_deaths,
        }
    }
}

/// First differences of a dated cumulative series.
///
/// The first observation differences against zero; downward revisions come
/// through as negative increments. Gap dates are simply absent (zero).
pub fn daily_new_from_cumulative(cumulative: &BTreeMap<Date, i64>) -> BTreeMap<Date, i64> {
    let mut out = BTreeMap::new();
    let mut prev = 0i64;
    for (&date, &value) in cumulative {
        out.insert(date, value - prev);
        prev = value;
    }
    out
}

/// All county series plus the calendar range the data covers.
#[derive(Debug, Clone)]
pub struct SeriesSet {
    pub counties: BTreeMap<Fips, CountySeries>,
    pub coverage_start: Date,
    pub coverage_end: Date,
}

impl SeriesSet {
    /// Sum of a county's daily values over the 7-day window ending at `end`.
    pub fn county_weekly_sum(&self, fips: &Fips, end: Date, kind: OutcomeKind) -> i64 {
        match self.counties.get(fips) {
            Some(series) => weekly_sum(series.daily(kind), end),
            None => 0,
        }
    }

    /// Checks that the two weekly windows anchored at `end` lie inside coverage.
    pub fn check_window(&self, end: Date) -> Result<()> {
        let needed_from = add_days(end, -13);
        if needed_from < self.coverage_start || end > self.coverage_end {
            return Err(Error::InsufficientHistory {
                anchor: end,
                needed_from,
                coverage_start: self.coverage_start,
                coverage_end: self.coverage_end,
            });
        }
        Ok(())
    }

    /// Map of fips to state for every county present.
    pub fn states(&self) -> BTreeMap<Fips, String> {
        self.counties
            .iter()
            .map(|(f, s)| (f.clone(), s.state.clone()))
            .collect()
    }

    /// All county identifiers.
    pub fn universe(&self) -> BTreeSet<Fips> {
        self.counties.keys().cloned().collect()
    }
}

/// Sum of daily values over `[end - 6, end]`.
pub fn weekly_sum(daily: &BTreeMap<Date, i64>, end: Date) -> i64 {
    let start = add_days(end, -6);
    daily.range(start..=end).map(|(_, v)| v).sum()
}

/// Cumulative state-level test counts with carry-forward lookups.
///
/// The tracking data has gap days and late starts; a lookup carries the last
/// reported cumulative value forward and treats dates before a state's first
/// report as zero.
#[derive(Debug, Clone, Default)]
pub struct StateTests {
    cumulative: BTreeMap<String, BTreeMap<Date, i64>>,
}

impl StateTests {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, state: &str, date: Date, cumulative_tests: i64) {
        self.cumulative
            .entry(state.to_owned())
            .or_default()
            .insert(date, cumulative_tests);
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.cumulative.contains_key(state)
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.cumulative.keys().map(|s| s.as_str())
    }

    pub fn series(&self, state: &str) -> Option<&BTreeMap<Date, i64>> {
        self.cumulative.get(state)
    }

    /// Cumulative tests in `state` as of `date` (carry-forward, zero-start).
    pub fn cumulative_at(&self, state: &str, date: Date) -> Result<i64> {
        let series = self
            .cumulative
            .get(state)
            .ok_or_else(|| Error::MissingStateTests {
                state: state.to_owned(),
            })?;
        Ok(series
            .range(..=date)
            .next_back()
            .map(|(_, &v)| v)
            .unwrap_or(0))
    }

    /// New tests over the 7-day window ending at `end`.
    pub fn weekly_new(&self, state: &str, end: Date) -> Result<i64> {
        let cur = self.cumulative_at(state, end)?;
        let prev = self.cumulative_at(state, add_days(end, -7))?;
        Ok(cur - prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dates::parse_iso;

    fn d(s: &str) -> Date {
        parse_iso(s).unwrap()
    }

    fn map(pairs: &[(&str, i64)]) -> BTreeMap<Date, i64> {
        pairs.iter().map(|(s, v)| (d(s), *v)).collect()
    }

    #[test]
    fn fips_parsing() {
        assert_eq!(Fips::parse("06073").unwrap().as_str(), "06073");
        assert_eq!(Fips::parse("6073").unwrap().as_str(), "06073");
        assert!(Fips::parse("").is_none());
        assert!(Fips::parse("abcde").is_none());
        assert!(Fips::parse("123456").is_none());
    }

    #[test]
    fn first_differences() {
        let cum = map(&[("2020-03-01", 10), ("2020-03-02", 10), ("2020-03-03", 12)]);
        let new = daily_new_from_cumulative(&cum);
        assert_eq!(
            new,
            map(&[("2020-03-01", 10), ("2020-03-02", 0), ("2020-03-03", 2)])
        );
    }

    #[test]
    fn downward_revision_preserved() {
        let cum = map(&[("2020-03-01", 50), ("2020-03-02", 48)]);
        let new = daily_new_from_cumulative(&cum);
        assert_eq!(new, map(&[("2020-03-01", 50), ("2020-03-02", -2)]));
    }

    #[test]
    fn empty_series() {
        assert!(daily_new_from_cumulative(&BTreeMap::new()).is_empty());
    }

    #[test]
    fn weekly_window_is_inclusive_seven_days() {
        let daily = map(&[
            ("2020-03-01", 1),
            ("2020-03-02", 2),
            ("2020-03-07", 4),
            ("2020-03-08", 8),
        ]);
        // Window [03-02, 03-08]: excludes 03-01.
        assert_eq!(weekly_sum(&daily, d("2020-03-08")), 14);
    }

    #[test]
    fn tests_carry_forward_and_zero_start() {
        let mut t = StateTests::new();
        t.insert("NY", d("2020-03-20"), 1000);
        t.insert("NY", d("2020-03-25"), 1600);
        assert_eq!(t.cumulative_at("NY", d("2020-03-10")).unwrap(), 0);
        assert_eq!(t.cumulative_at("NY", d("2020-03-21")).unwrap(), 1000);
        assert_eq!(t.cumulative_at("NY", d("2020-03-26")).unwrap(), 1600);
        // Week ending 03-26 vs 03-19: 1600 - 0
        assert_eq!(t.weekly_new("NY", d("2020-03-26")).unwrap(), 1600);
        assert!(matches!(
            t.weekly_new("AZ", d("2020-03-26")),
            Err(Error::MissingStateTests { .. })
        ));
    }
}
