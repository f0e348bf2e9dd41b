//! Text and CSV serializations of pipeline outputs.
//!
//! Machine-readable CSVs print floats with Rust's shortest round-trip
//! formatting so reruns are byte-identical; human-facing tables round for
//! readability.

use std::fmt::Write as _;

use epidid_core::counterfactual::CounterfactualReport;
use epidid_core::event::EventStudy;
use epidid_core::fit::{percent_effect, FitResult, HorizonEffect};
use epidid_core::panel::{EventTimePoint, PanelDataset, RawDidRow};
use epidid_core::synth::RecoverySummary;

use crate::ingest::RawDataset;

/// Table-3-style text block for one fitted model.
pub fn fit_report(fit: &FitResult, effect: &HorizonEffect, dropped: &[String]) -> String {
    let mut out = String::new();
    let outcome = fit
        .outcome_kind
        .map(|k| k.to_string())
        .unwrap_or_else(|| "outcome".to_string());
    let d = fit.horizon_d.unwrap_or(0);
    let pe = percent_effect(effect.beta3, effect.se, effect.df);
    writeln!(
        out,
        "Model: one week change in log weekly {outcome}, {d} days after the order"
    )
    .unwrap();
    writeln!(out, "{:-<78}", "").unwrap();
    writeln!(out, "{:<58} {:>9} {:>9}", "", "Estimate", "SE").unwrap();
    let headline = [
        (
            "x:p",
            "Difference between counties with/without order, after",
        ),
        ("x", "Mean difference between counties with/without order"),
        ("p", "Mean difference before and after the order"),
        (
            "dlog_tests",
            "One week change in log weekly tests performed",
        ),
    ];
    for (name, label) in headline {
        if let (Some(beta), Some(se)) = (fit.coefficient(name), fit.se(name)) {
            writeln!(out, "{label:<58} {beta:>9.4} {se:>9.4}").unwrap();
        }
    }
    writeln!(out, "{:-<78}", "").unwrap();
    writeln!(
        out,
        "Interaction as percentage change: {:.1}% (95% CI {:.1}% to {:.1}%, t df = {})",
        100.0 * pe.pct,
        100.0 * pe.pct_low,
        100.0 * pe.pct_high,
        effect.df
    )
    .unwrap();
    writeln!(
        out,
        "N = {}   clusters = {}   retained params = {}   adjusted R2 = {}",
        fit.n_obs,
        fit.n_clusters,
        fit.n_params,
        fit.adjusted_r2
            .map_or("n/a".to_string(), |r| format!("{r:.4}")),
    )
    .unwrap();
    if !dropped.is_empty() {
        writeln!(out, "Dropped as collinear: {}", dropped.join(", ")).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "All retained coefficients (clustered SEs):").unwrap();
    for (name, beta) in &fit.coefficients {
        let se = fit.se(name).unwrap_or(f64::NAN);
        writeln!(out, "  {name:<28} {beta:>12.6} {se:>12.6}").unwrap();
    }
    out
}

/// Fit-level facts shared by the models CSV.
pub struct ModelRow<'a> {
    pub fit: &'a FitResult,
    pub effect: &'a HorizonEffect,
    pub dropped: &'a [String],
}

/// One CSV over all fitted models.
pub fn models_csv(rows: &[ModelRow<'_>]) -> String {
    let mut out = String::from(
        "outcome,d,beta3,se,ci_low,ci_high,pct,pct_low,pct_high,adjusted_r2,n_obs,n_clusters,n_params,dropped_columns\n",
    );
    for row in rows {
        let pe = percent_effect(row.effect.beta3, row.effect.se, row.effect.df);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.fit
                .outcome_kind
                .map(|k| k.to_string())
                .unwrap_or_default(),
            row.fit.horizon_d.unwrap_or(0),
            row.effect.beta3,
            row.effect.se,
            row.effect.ci_low,
            row.effect.ci_high,
            pe.pct,
            pe.pct_low,
            pe.pct_high,
            row.fit.adjusted_r2.unwrap_or(f64::NAN),
            row.fit.n_obs,
            row.fit.n_clusters,
            row.fit.n_params,
            row.dropped.join(";"),
        )
        .unwrap();
    }
    out
}

/// Event-study CSV in the documented plotting schema.
pub fn event_study_csv(study: &EventStudy) -> String {
    let mut out = String::from("d,beta3,se,ci_low,ci_high,pct,pct_low,pct_high\n");
    for p in &study.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.d, p.beta3, p.se, p.ci_low, p.ci_high, p.pct, p.pct_low, p.pct_high
        )
        .unwrap();
    }
    out
}

/// Raw cohort table CSV mirroring the printed column order.
pub fn did_table_csv(rows: &[RawDidRow]) -> String {
    let mut out = String::from(
        "order_date,n_counties,dy_order_day,dy_after,dy_ctrl_order_day,dy_ctrl_after,diff_treated,diff_ctrl,diff_in_diff\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.order_date,
            r.n_counties,
            r.dy_order_day,
            r.dy_after,
            r.dy_ctrl_order_day,
            r.dy_ctrl_after,
            r.diff_treated,
            r.diff_ctrl,
            r.diff_in_diff
        )
        .unwrap();
    }
    out
}

/// Two-decimal text rendering of the cohort table.
pub fn did_table_text(title: &str, rows: &[RawDidRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(
        out,
        "{:<12} {:>9} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "order date",
        "counties",
        "dy(t)",
        "dy(t+d)",
        "ctrl(t)",
        "ctrl(t+d)",
        "diff T",
        "diff C",
        "DiD"
    )
    .unwrap();
    for r in rows {
        writeln!(
            out,
            "{:<12} {:>9} {:>8.2} {:>8.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            r.order_date.to_string(),
            r.n_counties,
            r.dy_order_day,
            r.dy_after,
            r.dy_ctrl_order_day,
            r.dy_ctrl_after,
            r.diff_treated,
            r.diff_ctrl,
            r.diff_in_diff
        )
        .unwrap();
    }
    out
}

/// Panel dump in the documented cross-checking schema.
pub fn panel_csv(panel: &PanelDataset) -> String {
    let mut out = String::from("group_id,stratum_id,cluster_id,date,dy,x,p,dlog_tests,weight\n");
    for r in &panel.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.group_id,
            r.stratum_id,
            r.cluster_id,
            r.date,
            r.outcome_dy,
            r.treated_x,
            r.period_p,
            r.dlog_tests.map(|v| v.to_string()).unwrap_or_default(),
            r.weight
        )
        .unwrap();
    }
    out
}

/// Mean growth by event time (the order-alignment curve).
pub fn event_time_csv(points: &[EventTimePoint]) -> String {
    let mut out = String::from("offset_days,mean_growth,n_counties\n");
    for p in points {
        writeln!(out, "{},{},{}", p.offset, p.mean_growth, p.n_counties).unwrap();
    }
    out
}

/// Per-cohort-week counterfactual differences.
pub fn counterfactual_csv(report: &CounterfactualReport) -> String {
    let mut out =
        String::from("group_id,week,observed_weekly,difference,difference_low,difference_high\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.group, r.week, r.observed_weekly, r.difference, r.difference_low, r.difference_high
        )
        .unwrap();
    }
    out
}

/// Human-readable totals block over one or two outcome reports.
pub fn counterfactual_summary(reports: &[&CounterfactualReport]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "Counterfactual totals over weeks 1-3 after each cohort's order"
    )
    .unwrap();
    for report in reports {
        let prevented = report.totals.prevented();
        let alt = report.alternative_totals.prevented();
        writeln!(out).unwrap();
        writeln!(out, "{}:", report.outcome_kind).unwrap();
        writeln!(
            out,
            "  formula '{}': prevented {:.0} (bounds {:.0} to {:.0})",
            report.formula.label(),
            prevented.point,
            prevented.low,
            prevented.high
        )
        .unwrap();
        writeln!(
            out,
            "  formula '{}' (for reference): prevented {:.0} (bounds {:.0} to {:.0})",
            report.alternative_formula.label(),
            alt.point,
            alt.low,
            alt.high
        )
        .unwrap();
    }
    out
}

/// Cleaning summary for an ingest run.
pub fn cleaning_summary(dataset: &RawDataset) -> String {
    let mut out = String::new();
    writeln!(out, "Ingest cleaning summary").unwrap();
    let sections = [
        ("orders", &dataset.orders_log),
        ("cases", &dataset.cases_log),
        ("tests", &dataset.tests_log),
    ];
    for (name, log) in sections {
        writeln!(out).unwrap();
        writeln!(out, "{name}:").unwrap();
        writeln!(out, "  input rows     {}", log.input_rows).unwrap();
        writeln!(out, "  retained rows  {}", log.retained_rows).unwrap();
        writeln!(out, "  duplicates     {}", log.duplicates).unwrap();
        writeln!(out, "  out of window  {}", log.out_of_window).unwrap();
        let dropped_share = if log.input_rows == 0 {
            0.0
        } else {
            100.0 * log.dropped_total() as f64 / log.input_rows as f64
        };
        writeln!(out, "  dropped share of input rows: {dropped_share:.4}%").unwrap();
        if name == "cases" {
            writeln!(out, "  unassigned     {}", log.unassigned).unwrap();
            writeln!(
                out,
                "  unassigned share of input rows: {:.4}%",
                100.0 * log.unassigned_fraction()
            )
            .unwrap();
        }
    }
    out
}

/// Recovery-experiment summary text.
pub fn recovery_summary_text(summary: &RecoverySummary) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "Recovery experiment: {} seeds, rng = {}",
        summary.n_seeds, summary.rng_algorithm
    )
    .unwrap();
    writeln!(
        out,
        "{:>4} {:>10} {:>12} {:>12} {:>12} {:>9}",
        "d", "truth", "mean beta3", "bias", "rmse", "coverage"
    )
    .unwrap();
    for h in &summary.horizons {
        writeln!(
            out,
            "{:>4} {:>10.4} {:>12.6} {:>12.3e} {:>12.3e} {:>9.3}",
            h.horizon_d, h.truth, h.mean_beta3, h.bias, h.rmse, h.coverage
        )
        .unwrap();
    }
    if !summary.placebos.is_empty() {
        writeln!(out).unwrap();
        writeln!(out, "Placebo horizons (truth 0):").unwrap();
        writeln!(
            out,
            "{:>4} {:>12} {:>12} {:>12}",
            "d", "mean beta3", "sd", "mc se"
        )
        .unwrap();
        for p in &summary.placebos {
            writeln!(
                out,
                "{:>4} {:>12.6} {:>12.6} {:>12.6}",
                p.horizon_d, p.mean_beta3, p.sd_beta3, p.mc_se
            )
            .unwrap();
        }
    }
    out
}
