//! Counterfactual prevented-count aggregation.
//!
//! The interaction coefficient is a difference in log weekly growth, so the
//! implied difference in unlogged weekly counts is `(exp(b3) - 1)` times the
//! observed weekly count. Week 1 after each cohort's order uses the `d = 7`
//! model, week 2 the `d = 14` model and week 3 the `d = 21` model; the CI
//! endpoints of each model give the bounds. An alternative reading — the
//! counterfactual count is `observed * exp(-b3)`, i.e. growth would have
//! been higher without the order — yields materially larger totals and is
//! kept available behind a flag; both totals are reported.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dates::{add_days, Date};
use crate::error::{Error, Result};
use crate::fit::HorizonEffect;
use crate::groups::CountyGroup;
use crate::math;
use crate::series::{OutcomeKind, SeriesSet};

/// `(exp(beta3) - 1) * observed`: the printed-formula weekly difference.
pub fn counterfactual_weekly(beta3: f64, observed_weekly: i64) -> f64 {
    (math::exp(beta3) - 1.0) * observed_weekly as f64
}

/// Which arithmetic converts a coefficient into a count difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CfFormula {
    /// `(exp(b3) - 1) * observed`.
    #[default]
    Printed,
    /// `observed * (1 - exp(-b3))`: observed counts against the
    /// higher-growth counterfactual `observed * exp(-b3)`.
    InverseGrowth,
}

impl CfFormula {
    pub fn difference(self, beta3: f64, observed_weekly: f64) -> f64 {
        match self {
            CfFormula::Printed => (math::exp(beta3) - 1.0) * observed_weekly,
            CfFormula::InverseGrowth => observed_weekly * (1.0 - math::exp(-beta3)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CfFormula::Printed => "printed",
            CfFormula::InverseGrowth => "inverse-growth",
        }
    }
}

/// One cohort-week difference with its CI-endpoint bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupWeekDifference {
    pub group: Date,
    /// Week index 1..=3 after the order.
    pub week: u8,
    pub observed_weekly: i64,
    pub difference: f64,
    pub difference_low: f64,
    pub difference_high: f64,
}

/// Signed totals with CI-endpoint bounds, `low <= point <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub point: f64,
    pub low: f64,
    pub high: f64,
}

impl Totals {
    fn add(&mut self, point: f64, low: f64, high: f64) {
        self.point += point;
        self.low += low;
        self.high += high;
    }

    /// The prevented-count view: sign-flipped so that a negative effect
    /// reads as a positive number of prevented counts.
    pub fn prevented(&self) -> Totals {
        Totals {
            point: -self.point,
            low: -self.high,
            high: -self.low,
        }
    }
}

/// Prevented-count report for one outcome.
#[derive(Debug, Clone)]
pub struct CounterfactualReport {
    pub outcome_kind: OutcomeKind,
    pub formula: CfFormula,
    pub rows: Vec<GroupWeekDifference>,
    /// Sums of the per-cohort-week differences.
    pub totals: Totals,
    /// The same totals under the other formula, for the record.
    pub alternative_totals: Totals,
    pub alternative_formula: CfFormula,
}

/// Observed weekly counts per cohort for weeks 1..=`weeks` after the order.
///
/// Week `k` covers days `order + 7(k-1) + 1 ..= order + 7k`; sums driven
/// negative by revisions are clamped to zero. A week that runs past the data
/// coverage is an error naming the cohort.
pub fn observed_weekly_counts(
    groups: &[CountyGroup],
    series: &SeriesSet,
    kind: OutcomeKind,
    weeks: u8,
) -> Result<BTreeMap<(Date, u8), i64>> {
    let mut out = BTreeMap::new();
    for group in crate::groups::treated_cohorts(groups) {
        let order = group.id.order_date().expect("treated cohort has a date");
        for week in 1..=weeks {
            let end = add_days(order, 7 * week as i64);
            if end > series.coverage_end {
                return Err(Error::MissingWeeklyCounts { group: order, week });
            }
            let mut sum = 0i64;
            for fips in &group.members {
                sum += series.county_weekly_sum(fips, end, kind);
            }
            out.insert((order, week), sum.max(0));
        }
    }
    Ok(out)
}

/// Sum the week-matched counterfactual differences over cohorts and weeks.
///
/// `effects` maps the horizon (7, 14, 21) to that model's interaction
/// estimate; `observed` must cover every cohort in `cohorts` for each week.
pub fn aggregate_prevented(
    effects: &BTreeMap<i32, HorizonEffect>,
    cohorts: &[Date],
    observed: &BTreeMap<(Date, u8), i64>,
    outcome_kind: OutcomeKind,
    formula: CfFormula,
) -> Result<CounterfactualReport> {
    let alternative_formula = match formula {
        CfFormula::Printed => CfFormula::InverseGrowth,
        CfFormula::InverseGrowth => CfFormula::Printed,
    };
    let mut rows = Vec::new();
    let mut totals = Totals::default();
    let mut alternative_totals = Totals::default();
    for &cohort in cohorts {
        for week in 1u8..=3 {
            let horizon = 7 * week as i32;
            let effect = effects
                .get(&horizon)
                .ok_or(Error::MissingHorizonFit { horizon_d: horizon })?;
            let observed_weekly =
                *observed
                    .get(&(cohort, week))
                    .ok_or(Error::MissingWeeklyCounts {
                        group: cohort,
                        week,
                    })?;
            let obs = observed_weekly as f64;
            let difference = formula.difference(effect.beta3, obs);
            // The formula is monotone in beta3, so the CI endpoints map to
            // ordered bounds directly.
            let difference_low = formula.difference(effect.ci_low, obs);
            let difference_high = formula.difference(effect.ci_high, obs);
            totals.add(difference, difference_low, difference_high);
            alternative_totals.add(
                alternative_formula.difference(effect.beta3, obs),
                alternative_formula.difference(effect.ci_low, obs),
                alternative_formula.difference(effect.ci_high, obs),
            );
            rows.push(GroupWeekDifference {
                group: cohort,
                week,
                observed_weekly,
                difference,
                difference_low,
                difference_high,
            });
        }
    }
    Ok(CounterfactualReport {
        outcome_kind,
        formula,
        rows,
        totals,
        alternative_totals,
        alternative_formula,
    })
}
