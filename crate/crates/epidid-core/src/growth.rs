//! The log weekly growth outcome and the tests covariate.
//!
//! The outcome for a group anchored at date `t` is
//!
//! ```text
//! ln(sum of daily counts over [t-6, t] + 1) - ln(sum over [t-13, t-7] + 1)
//! ```
//!
//! summed across the group's member counties. The `+ 1` keeps the logarithm
//! defined at zero; weekly sums driven negative by downward revisions are
//! clamped to zero before the offset so the transform stays defined on all
//! inputs and untouched on clean data.

use crate::dates::{add_days, Date};
use crate::error::Result;
use crate::groups::CountyGroup;
use crate::math;
use crate::series::{OutcomeKind, SeriesSet, StateTests};

/// `ln(cur + 1) - ln(prev + 1)` with negative sums clamped to zero.
pub fn log_weekly_ratio(week_current: f64, week_previous: f64) -> f64 {
    let cur = if week_current < 0.0 {
        0.0
    } else {
        week_current
    };
    let prev = if week_previous < 0.0 {
        0.0
    } else {
        week_previous
    };
    math::ln(cur + 1.0) - math::ln(prev + 1.0)
}

/// Group-level weekly sums (current, previous) anchored at `end`.
pub fn group_weekly_sums(
    group: &CountyGroup,
    series: &SeriesSet,
    end: Date,
    kind: OutcomeKind,
) -> Result<(i64, i64)> {
    series.check_window(end)?;
    let prev_end = add_days(end, -7);
    let mut cur = 0i64;
    let mut prev = 0i64;
    for fips in &group.members {
        cur += series.county_weekly_sum(fips, end, kind);
        prev += series.county_weekly_sum(fips, prev_end, kind);
    }
    Ok((cur, prev))
}

/// Log weekly growth of a county group at anchor date `end`.
pub fn log_weekly_growth(
    group: &CountyGroup,
    series: &SeriesSet,
    end: Date,
    kind: OutcomeKind,
) -> Result<f64> {
    let (cur, prev) = group_weekly_sums(group, series, end, kind)?;
    Ok(log_weekly_ratio(cur as f64, prev as f64))
}

/// One-week change in log weekly tests for a county group.
///
/// State-level weekly new tests are averaged with weights equal to the
/// group's member count in each state, for the current and previous week,
/// and the two means go through the same `ln(x + 1)` transform as the
/// outcome (including the clamp at zero).
pub fn group_test_covariate(group: &CountyGroup, tests: &StateTests, end: Date) -> Result<f64> {
    let prev_end = add_days(end, -7);
    let mut weight_total = 0.0;
    let mut cur_sum = 0.0;
    let mut prev_sum = 0.0;
    for (state, &count) in &group.state_county_counts {
        let w = count as f64;
        cur_sum += w * tests.weekly_new(state, end)? as f64;
        prev_sum += w * tests.weekly_new(state, prev_end)? as f64;
        weight_total += w;
    }
    if weight_total == 0.0 {
        return Ok(0.0);
    }
    Ok(log_weekly_ratio(
        cur_sum / weight_total,
        prev_sum / weight_total,
    ))
}
