//! Two-period cohort panels and the raw cohort tabulations.
//!
//! For a horizon of `d` days, each treated cohort with order date `t`
//! contributes two observations (at `t` and at `t + d`) and the control pool
//! contributes two matched observations at the same dates. A cohort and its
//! matched control rows share a stratum. With 22 treated cohorts this yields
//! the 88-row panel the regression runs on.

use alloc::vec::Vec;

use crate::dates::{add_days, Date};
use crate::error::{Error, Result};
use crate::groups::{control_group, treated_cohorts, CountyGroup, GroupId};
use crate::growth::{group_test_covariate, log_weekly_growth};
use crate::series::{OutcomeKind, SeriesSet, StateTests};

/// How control-pool observations are weighted.
///
/// The literal rule weighs every observation by its own group's county
/// count; the paired variant hands control rows the matched cohort's count
/// so each stratum is internally balanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlWeight {
    #[default]
    OwnCount,
    PairedCohort,
}

/// One (county-group, date) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    /// The group the outcome was computed from.
    pub group_id: GroupId,
    /// Error-clustering identity (the group; the control pool is one cluster).
    pub cluster_id: GroupId,
    /// Order-date cohort this row is paired under.
    pub stratum_id: Date,
    pub date: Date,
    /// Log weekly growth at `date`.
    pub outcome_dy: f64,
    /// 1 for treated-cohort rows.
    pub treated_x: u8,
    /// 1 for rows observed at the stratum's post date `t + d`.
    pub period_p: u8,
    /// One-week change in log weekly tests, when test data is supplied.
    pub dlog_tests: Option<f64>,
    pub weight: f64,
}

/// The assembled estimation panel for one horizon.
#[derive(Debug, Clone)]
pub struct PanelDataset {
    pub horizon_d: i32,
    pub outcome_kind: OutcomeKind,
    pub rows: Vec<PanelRow>,
    /// Cohorts skipped because the horizon leaves their windows uncovered.
    pub skipped_cohorts: Vec<Date>,
}

impl PanelDataset {
    pub fn n_strata(&self) -> usize {
        let mut strata: Vec<Date> = self.rows.iter().map(|r| r.stratum_id).collect();
        strata.dedup();
        strata.len()
    }
}

/// Build the panel for horizon `d`.
///
/// Cohorts whose pre or post window falls outside data coverage are skipped
/// and reported in `skipped_cohorts`. `d = 0` is rejected: the two periods
/// would sit on the same date and the period indicator would be ambiguous.
pub fn assemble_panel(
    groups: &[CountyGroup],
    series: &SeriesSet,
    tests: Option<&StateTests>,
    d: i32,
    kind: OutcomeKind,
    control_weight: ControlWeight,
) -> Result<PanelDataset> {
    if d == 0 {
        return Err(Error::DegenerateHorizon);
    }
    let control = control_group(groups).ok_or(Error::EmptyControlGroup)?;
    if control.county_count() == 0 {
        return Err(Error::EmptyControlGroup);
    }
    let cohorts = treated_cohorts(groups);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for cohort in cohorts {
        let order_date = cohort.id.order_date().expect("treated cohort has a date");
        let post_date = add_days(order_date, d as i64);
        if series.check_window(order_date).is_err() || series.check_window(post_date).is_err() {
            skipped.push(order_date);
            continue;
        }
        let ctrl_weight = match control_weight {
            ControlWeight::OwnCount => control.county_count() as f64,
            ControlWeight::PairedCohort => cohort.county_count() as f64,
        };
        for (group, x, weight) in [
            (cohort, 1u8, cohort.county_count() as f64),
            (control, 0u8, ctrl_weight),
        ] {
            for (date, p) in [(order_date, 0u8), (post_date, 1u8)] {
                let dy = log_weekly_growth(group, series, date, kind)?;
                let dlog_tests = match tests {
                    Some(t) => Some(group_test_covariate(group, t, date)?),
                    None => None,
                };
                rows.push(PanelRow {
                    group_id: group.id,
                    cluster_id: group.id,
                    stratum_id: order_date,
                    date,
                    outcome_dy: dy,
                    treated_x: x,
                    period_p: p,
                    dlog_tests,
                    weight,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::NoFeasibleCohorts { horizon_d: d });
    }
    Ok(PanelDataset {
        horizon_d: d,
        outcome_kind: kind,
        rows,
        skipped_cohorts: skipped,
    })
}

/// One cohort row of the raw difference-in-difference tabulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDidRow {
    pub order_date: Date,
    pub n_counties: usize,
    pub dy_order_day: f64,
    pub dy_after: f64,
    pub dy_ctrl_order_day: f64,
    pub dy_ctrl_after: f64,
    pub diff_treated: f64,
    pub diff_ctrl: f64,
    pub diff_in_diff: f64,
}

impl RawDidRow {
    /// Derive the three difference columns from the four growth means.
    pub fn from_means(
        order_date: Date,
        n_counties: usize,
        dy_order_day: f64,
        dy_after: f64,
        dy_ctrl_order_day: f64,
        dy_ctrl_after: f64,
    ) -> Self {
        let diff_treated = dy_after - dy_order_day;
        let diff_ctrl = dy_ctrl_after - dy_ctrl_order_day;
        RawDidRow {
            order_date,
            n_counties,
            dy_order_day,
            dy_after,
            dy_ctrl_order_day,
            dy_ctrl_after,
            diff_treated,
            diff_ctrl,
            diff_in_diff: diff_treated - diff_ctrl,
        }
    }
}

/// Per-cohort growth changes against the control pool at the same dates.
pub fn raw_did_table(
    groups: &[CountyGroup],
    series: &SeriesSet,
    d: i32,
    kind: OutcomeKind,
) -> Result<Vec<RawDidRow>> {
    let panel = assemble_panel(groups, series, None, d, kind, ControlWeight::OwnCount)?;
    let mut out = Vec::new();
    // Rows arrive stratum-blocked in role order: T0, T1, C0, C1.
    for block in panel.rows.chunks_exact(4) {
        let n = block[0].weight as usize;
        out.push(RawDidRow::from_means(
            block[0].stratum_id,
            n,
            block[0].outcome_dy,
            block[1].outcome_dy,
            block[2].outcome_dy,
            block[3].outcome_dy,
        ));
    }
    Ok(out)
}

/// Mean growth at an offset from the order date, across ordered counties.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTimePoint {
    /// Days before (negative) or after the county's order.
    pub offset: i32,
    pub mean_growth: f64,
    /// Counties with enough data coverage at this offset.
    pub n_counties: usize,
}

/// Mean county-level weekly growth by days since the stay-at-home order.
///
/// Only counties with an order enter; at each offset the mean runs over the
/// counties whose weekly windows are covered by the data.
pub fn event_time_mean_growth(
    series: &SeriesSet,
    kind: OutcomeKind,
    window: core::ops::RangeInclusive<i32>,
) -> Result<Vec<EventTimePoint>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut out = Vec::new();
    for offset in window {
        let mut sum = 0.0;
        let mut n = 0usize;
        for county in series.counties.values() {
            let Some(order) = county.order_effective else {
                continue;
            };
            let anchor = add_days(order, offset as i64);
            if series.check_window(anchor).is_err() {
                continue;
            }
            let cur = crate::series::weekly_sum(county.daily(kind), anchor);
            let prev = crate::series::weekly_sum(county.daily(kind), add_days(anchor, -7));
            sum += crate::growth::log_weekly_ratio(cur as f64, prev as f64);
            n += 1;
        }
        if n > 0 {
            out.push(EventTimePoint {
                offset,
                mean_growth: sum / n as f64,
                n_counties: n,
            });
        }
    }
    Ok(out)
}
