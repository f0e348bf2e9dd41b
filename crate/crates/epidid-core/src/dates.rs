//! Calendar-date helpers.
//!
//! All interface dates are ISO-8601 (`YYYY-MM-DD`). Internally every
//! computation is daily, so a thin layer over [`chrono::NaiveDate`] is all
//! that is needed.

use chrono::Days;

/// Calendar date, day granularity.
pub type Date = chrono::NaiveDate;

/// `date + days`, where `days` may be negative.
pub fn add_days(date: Date, days: i64) -> Date {
    if days >= 0 {
        date.checked_add_days(Days::new(days as u64))
            .expect("date arithmetic overflow")
    } else {
        date.checked_sub_days(Days::new((-days) as u64))
            .expect("date arithmetic overflow")
    }
}

/// Signed day count from `from` to `to`.
pub fn days_between(from: Date, to: Date) -> i64 {
    (to - from).num_days()
}

/// Parse an ISO-8601 date.
pub fn parse_iso(s: &str) -> Option<Date> {
    Date::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Inclusive iterator over `[start, end]`.
pub fn date_range(start: Date, end: Date) -> impl Iterator<Item = Date> {
    let n = if end >= start {
        days_between(start, end) + 1
    } else {
        0
    };
    (0..n).map(move |k| add_days(start, k))
}
