//! Shared command plumbing: dataset loading and model runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use epidid_core::design::{build_design, DesignOptions};
use epidid_core::fit::{fit_model, FitResult, HorizonEffect};
use epidid_core::groups::CountyGroup;
use epidid_core::panel::{assemble_panel, ControlWeight, PanelDataset};
use epidid_core::series::{Fips, OutcomeKind, SeriesSet, StateTests};

use crate::ingest::{self, DateWindow, OrderSchema, RawDataset};

/// A parsed dataset with its derived lookup structures.
pub struct LoadedData {
    pub dataset: RawDataset,
    pub series: SeriesSet,
    pub tests: StateTests,
    pub universe: BTreeMap<Fips, String>,
    pub order_dates: BTreeMap<Fips, NaiveDate>,
}

/// Parse the three inputs and build the series structures.
pub fn load_data(
    orders: &Path,
    cases: &Path,
    tests: Option<&Path>,
    window: DateWindow,
) -> Result<LoadedData> {
    let orders_file = fs::File::open(orders)
        .with_context(|| format!("cannot open orders file {}", orders.display()))?;
    let (order_records, orders_log) =
        ingest::parse_orders(orders_file, &OrderSchema::default(), window)?;
    let cases_file = fs::File::open(cases)
        .with_context(|| format!("cannot open cases file {}", cases.display()))?;
    let (case_rows, cases_log) = ingest::parse_cases(cases_file, window)?;
    let (test_rows, tests_log) = match tests {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("cannot open tests file {}", path.display()))?;
            ingest::parse_tests(file, window)?
        }
        None => (Vec::new(), Default::default()),
    };
    let dataset = RawDataset {
        orders: order_records,
        cases: case_rows,
        tests: test_rows,
        orders_log,
        cases_log,
        tests_log,
    };
    let (series, tests) = ingest::build_series(&dataset, window);
    let universe = series.states();
    let order_dates = ingest::order_dates(&dataset);
    Ok(LoadedData {
        dataset,
        series,
        tests,
        universe,
        order_dates,
    })
}

/// Settings shared by every estimation-style command.
#[derive(Debug, Clone)]
pub struct EstimationSettings {
    pub control_weight: ControlWeight,
    pub design: DesignOptions,
}

/// One fitted model plus the panel it came from.
pub struct ModelRun {
    pub panel: PanelDataset,
    pub fit: FitResult,
    pub effect: HorizonEffect,
    pub dropped: Vec<String>,
}

/// Assemble, design and fit one (outcome, horizon) model.
pub fn run_model(
    groups: &[CountyGroup],
    series: &SeriesSet,
    tests: Option<&StateTests>,
    d: i32,
    outcome: OutcomeKind,
    settings: &EstimationSettings,
) -> Result<ModelRun> {
    let panel = assemble_panel(groups, series, tests, d, outcome, settings.control_weight)
        .with_context(|| format!("assembling the {outcome} panel at d = {d}"))?;
    let design = build_design(&panel, &settings.design)
        .with_context(|| format!("building the {outcome} design at d = {d}"))?;
    let fit = fit_model(&design).with_context(|| format!("fitting {outcome} at d = {d}"))?;
    let effect = fit.interaction_effect()?;
    Ok(ModelRun {
        panel,
        fit,
        effect,
        dropped: design.dropped_columns,
    })
}
