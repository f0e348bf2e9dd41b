//! Bundle round-trip: parsing a written bundle is a fixed point.

mod common;

use epidid::bundle::{read_bundle, write_bundle};
use epidid::ingest::{parse_cases, parse_orders, parse_tests, DateWindow, OrderSchema, RawDataset};
use proptest::prelude::*;

fn messy_dataset() -> RawDataset {
    let orders_csv = "fips,state,county,order_effective\n\
                      06073,CA,San Diego,2020-03-19\n\
                      06073,CA,San Diego,2020-03-17\n\
                      53033,WA,King,2020-03-23\n\
                      36061,NY,New York,2020-03-22\n";
    let cases_csv = "date,county,state,fips,cases,deaths\n\
                     2020-03-20,Unknown,WA,,10,0\n\
                     2020-03-20,King,WA,53033,50,2\n\
                     2020-03-21,King,WA,53033,48,2\n\
                     2020-03-20,San Diego,CA,06073,30,1\n\
                     2020-03-22,New York,NY,36061,900,20\n";
    let tests_csv = "date,state,totalTestResults\n\
                     2020-03-20,WA,5000\n\
                     2020-03-21,WA,\n\
                     2020-03-20,CA,7000\n\
                     2020-03-20,CA,7000\n";
    let window = DateWindow::default();
    let (orders, orders_log) =
        parse_orders(orders_csv.as_bytes(), &OrderSchema::default(), window).unwrap();
    let (cases, cases_log) = parse_cases(cases_csv.as_bytes(), window).unwrap();
    let (tests, tests_log) = parse_tests(tests_csv.as_bytes(), window).unwrap();
    RawDataset {
        orders,
        cases,
        tests,
        orders_log,
        cases_log,
        tests_log,
    }
}

#[test]
fn bundle_round_trip_is_a_fixed_point() {
    let dataset = messy_dataset();
    let dir = tempfile::tempdir().unwrap();
    write_bundle(dir.path(), &dataset).unwrap();
    let reparsed = read_bundle(dir.path(), DateWindow::default()).unwrap();
    assert_eq!(reparsed.orders, dataset.orders);
    assert_eq!(reparsed.cases, dataset.cases);
    assert_eq!(reparsed.tests, dataset.tests);
    // Normalized data is already clean: nothing dropped on re-parse.
    assert_eq!(reparsed.orders_log.dropped_total(), 0);
    assert_eq!(reparsed.cases_log.dropped_total(), 0);
    assert_eq!(reparsed.tests_log.dropped_total(), 0);

    // And a second round trip writes byte-identical files.
    let dir2 = tempfile::tempdir().unwrap();
    write_bundle(dir2.path(), &reparsed).unwrap();
    for name in ["orders.csv", "cases.csv", "tests.csv"] {
        let a = std::fs::read(dir.path().join(name)).unwrap();
        let b = std::fs::read(dir2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} not stable across round trips");
    }
}

#[test]
fn drop_log_totals_match_inputs() {
    let dataset = messy_dataset();
    assert!(dataset.orders_log.is_consistent());
    assert!(dataset.cases_log.is_consistent());
    assert!(dataset.tests_log.is_consistent());
    assert_eq!(dataset.cases_log.unassigned, 1);
    assert_eq!(dataset.orders_log.duplicates, 1);
    assert_eq!(dataset.tests_log.duplicates, 1);
    // Clean synthetic-style data drops nothing.
    assert!(dataset.cases_log.unassigned_fraction() < 0.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Permuting the order file's rows never changes the parsed records.
    #[test]
    fn parse_orders_is_row_order_insensitive(
        rows in prop::collection::vec((1u32..999, 17u32..30, 0u8..3), 1..25),
        seed in 0u64..1000,
    ) {
        let window = DateWindow::default();
        let lines: Vec<String> = rows
            .iter()
            .map(|(fips, day, dup)| {
                let day = (*day).min(29) + (*dup as u32) % 2;
                format!("{fips:05},TS,County{fips},2020-03-{day:02}")
            })
            .collect();
        let mut shuffled = lines.clone();
        // Deterministic Fisher-Yates driven by the seed.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let csv_a = format!("fips,state,county,order_effective\n{}\n", lines.join("\n"));
        let csv_b = format!("fips,state,county,order_effective\n{}\n", shuffled.join("\n"));
        let (a, _) = parse_orders(csv_a.as_bytes(), &OrderSchema::default(), window).unwrap();
        let (b, _) = parse_orders(csv_b.as_bytes(), &OrderSchema::default(), window).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Random clean case tables survive the write/parse cycle untouched.
    #[test]
    fn random_case_tables_round_trip(
        counties in prop::collection::btree_map(1u32..99999, prop::collection::vec(0i64..10_000, 1..20), 1..6),
    ) {
        let window = DateWindow::default();
        let mut dataset = RawDataset::default();
        for (fips_num, counts) in &counties {
            let fips = epidid_core::series::Fips::parse(&format!("{fips_num:05}")).unwrap();
            let mut date = window.start;
            for (i, c) in counts.iter().enumerate() {
                dataset.cases.push(epidid::ingest::CaseRow {
                    date,
                    county: format!("c{fips_num}"),
                    state: "TS".into(),
                    fips: fips.clone(),
                    cumulative_cases: *c,
                    cumulative_deaths: *c / 10,
                });
                date = epidid_core::dates::add_days(window.start, (i as i64) + 1);
            }
        }
        dataset.cases.sort_by(|a, b| (&a.fips, a.date).cmp(&(&b.fips, b.date)));
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &dataset).unwrap();
        let reparsed = read_bundle(dir.path(), window).unwrap();
        prop_assert_eq!(reparsed.cases, dataset.cases);
        prop_assert_eq!(reparsed.cases_log.dropped_total(), 0);
    }
}
