//! Normalized dataset bundles.
//!
//! A bundle is the three canonical CSVs written with deterministic ordering
//! and the exact schemas the parsers read, so parsing a written bundle is a
//! fixed point of the ingest step.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::ingest::{self, DateWindow, OrderSchema, RawDataset};

pub const ORDERS_FILE: &str = "orders.csv";
pub const CASES_FILE: &str = "cases.csv";
pub const TESTS_FILE: &str = "tests.csv";

/// Write the normalized bundle into `dir`.
pub fn write_bundle(dir: &Path, dataset: &RawDataset) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut orders = String::from("fips,state,county,order_effective\n");
    for o in &dataset.orders {
        orders.push_str(&format!(
            "{},{},{},{}\n",
            o.fips, o.state, o.county_name, o.order_effective
        ));
    }
    fs::write(dir.join(ORDERS_FILE), orders)?;

    let mut cases = String::from("date,county,state,fips,cases,deaths\n");
    for c in &dataset.cases {
        cases.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.date, c.county, c.state, c.fips, c.cumulative_cases, c.cumulative_deaths
        ));
    }
    fs::write(dir.join(CASES_FILE), cases)?;

    let mut tests = String::from("date,state,totalTestResults\n");
    for t in &dataset.tests {
        tests.push_str(&format!("{},{},{}\n", t.date, t.state, t.cumulative_tests));
    }
    fs::write(dir.join(TESTS_FILE), tests)?;
    Ok(())
}

/// Parse a bundle directory back into a dataset.
pub fn read_bundle(dir: &Path, window: DateWindow) -> Result<RawDataset> {
    let orders_path = dir.join(ORDERS_FILE);
    let cases_path = dir.join(CASES_FILE);
    let tests_path = dir.join(TESTS_FILE);
    let orders_file = fs::File::open(&orders_path)
        .with_context(|| format!("cannot open {}", orders_path.display()))?;
    let (orders, orders_log) = ingest::parse_orders(orders_file, &OrderSchema::default(), window)?;
    let cases_file = fs::File::open(&cases_path)
        .with_context(|| format!("cannot open {}", cases_path.display()))?;
    let (cases, cases_log) = ingest::parse_cases(cases_file, window)?;
    let tests_file = fs::File::open(&tests_path)
        .with_context(|| format!("cannot open {}", tests_path.display()))?;
    let (tests, tests_log) = ingest::parse_tests(tests_file, window)?;
    Ok(RawDataset {
        orders,
        cases,
        tests,
        orders_log,
        cases_log,
        tests_log,
    })
}
