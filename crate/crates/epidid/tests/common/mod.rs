//! Shared fixtures and oracles for the integration and acceptance suites.

#![allow(dead_code)]
// The printed table happens to contain -3.14, which is data, not pi; the
// oracle solvers use index loops over triangular systems on purpose.
#![allow(
    clippy::approx_constant,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

use epidid_core::dates::{parse_iso, Date};

/// One printed cohort row: order date, county count, the four growth means
/// (treated at t, treated at t+21, control at t, control at t+21) and the
/// three printed difference columns.
#[derive(Debug, Clone, Copy)]
pub struct FixtureRow {
    pub date: &'static str,
    pub n_counties: u32,
    pub dy_order_day: f64,
    pub dy_after: f64,
    pub dy_ctrl_order_day: f64,
    pub dy_ctrl_after: f64,
    pub diff_treated: f64,
    pub diff_ctrl: f64,
    pub diff_in_diff: f64,
}

impl FixtureRow {
    pub fn order_date(&self) -> Date {
        parse_iso(self.date).expect("fixture date is valid")
    }
}

const fn row(
    date: &'static str,
    n_counties: u32,
    dy_order_day: f64,
    dy_after: f64,
    dy_ctrl_order_day: f64,
    dy_ctrl_after: f64,
    diff_treated: f64,
    diff_ctrl: f64,
    diff_in_diff: f64,
) -> FixtureRow {
    FixtureRow {
        date,
        n_counties,
        dy_order_day,
        dy_after,
        dy_ctrl_order_day,
        dy_ctrl_after,
        diff_treated,
        diff_ctrl,
        diff_in_diff,
    }
}

/// Printed cohort rows for the cases comparison (19 rows).
pub const CASES_TABLE: &[FixtureRow] = &[
    row("2020-03-17", 6, 1.02, 0.71, 1.39, 1.1, -0.31, -0.29, -0.02),
    row("2020-03-19", 52, 2.0, 1.0, 1.34, 0.89, -1.0, -0.45, -0.55),
    row(
        "2020-03-21",
        104,
        2.52,
        0.88,
        1.52,
        0.66,
        -1.64,
        -0.85,
        -0.79,
    ),
    row(
        "2020-03-22",
        23,
        2.87,
        0.99,
        1.59,
        0.66,
        -1.88,
        -0.92,
        -0.96,
    ),
    row(
        "2020-03-23",
        209,
        2.63,
        0.41,
        1.5,
        0.54,
        -2.22,
        -0.96,
        -1.26,
    ),
    row("2020-03-24", 258, 2.2, 0.57, 1.61, 0.5, -1.63, -1.1, -0.53),
    row(
        "2020-03-25",
        308,
        1.93,
        0.47,
        1.65,
        0.46,
        -1.46,
        -1.19,
        -0.27,
    ),
    row(
        "2020-03-26",
        77,
        1.67,
        0.22,
        1.42,
        0.39,
        -1.45,
        -1.02,
        -0.43,
    ),
    row(
        "2020-03-27",
        136,
        1.52,
        0.16,
        1.42,
        0.34,
        -1.36,
        -1.08,
        -0.28,
    ),
    row(
        "2020-03-28",
        174,
        1.4,
        0.33,
        1.35,
        0.33,
        -1.07,
        -1.02,
        -0.04,
    ),
    row(
        "2020-03-29",
        38,
        1.32,
        -0.1,
        1.23,
        0.25,
        -1.41,
        -0.98,
        -0.44,
    ),
    row(
        "2020-03-30",
        324,
        1.35,
        0.32,
        1.29,
        0.28,
        -1.03,
        -1.01,
        -0.02,
    ),
    row("2020-03-31", 31, 1.54, 0.58, 1.1, 0.28, -0.96, -0.82, -0.14),
    row(
        "2020-04-01",
        126,
        1.1,
        -0.13,
        0.93,
        0.31,
        -1.24,
        -0.62,
        -0.61,
    ),
    row(
        "2020-04-02",
        274,
        1.13,
        0.17,
        0.89,
        0.3,
        -0.97,
        -0.58,
        -0.38,
    ),
    row(
        "2020-04-03",
        290,
        0.83,
        0.08,
        0.78,
        0.32,
        -0.75,
        -0.46,
        -0.29,
    ),
    row(
        "2020-04-04",
        66,
        0.54,
        -0.04,
        0.66,
        0.38,
        -0.59,
        -0.29,
        -0.3,
    ),
    row(
        "2020-04-06",
        104,
        0.58,
        -0.17,
        0.54,
        0.4,
        -0.76,
        -0.14,
        -0.61,
    ),
    row(
        "2020-04-07",
        44,
        0.61,
        -0.05,
        0.5,
        0.46,
        -0.66,
        -0.04,
        -0.62,
    ),
];

/// Printed cohort rows for the fatalities comparison (19 rows).
pub const FATALITIES_TABLE: &[FixtureRow] = &[
    row("2020-03-17", 6, 1.1, 0.12, -0.69, 0.94, -0.98, 1.63, -2.62),
    row("2020-03-19", 52, 1.2, 0.76, -0.69, 0.43, -0.45, 1.12, -1.57),
    row(
        "2020-03-21",
        104,
        2.56,
        0.82,
        -0.69,
        0.71,
        -1.74,
        1.4,
        -3.14,
    ),
    row("2020-03-22", 23, 1.85, 0.63, 0.0, 0.4, -1.21, 0.4, -1.61),
    row("2020-03-23", 209, 1.81, 0.33, 0.0, 0.34, -1.48, 0.34, -1.82),
    row(
        "2020-03-24",
        258,
        3.62,
        0.61,
        1.61,
        0.16,
        -3.01,
        -1.45,
        -1.56,
    ),
    row(
        "2020-03-25",
        308,
        2.01,
        0.43,
        1.61,
        0.33,
        -1.59,
        -1.28,
        -0.31,
    ),
    row("2020-03-26", 77, 1.61, 0.1, 1.79, 0.47, -1.51, -1.32, -0.19),
    row(
        "2020-03-27",
        136,
        1.1,
        -0.14,
        2.48,
        0.16,
        -1.24,
        -2.32,
        1.08,
    ),
    row(
        "2020-03-28",
        174,
        2.25,
        0.28,
        2.71,
        0.29,
        -1.98,
        -2.41,
        0.44,
    ),
    row("2020-03-29", 38, 1.5, 0.12, 2.08, 0.26, -1.39, -1.82, 0.43),
    row("2020-03-30", 324, 0.8, 0.34, 2.4, 0.31, -0.46, -2.09, 1.63),
    row(
        "2020-03-31",
        31,
        1.28,
        0.01,
        1.61,
        0.49,
        -1.27,
        -1.12,
        -0.14,
    ),
    row(
        "2020-04-01",
        126,
        1.72,
        0.05,
        1.89,
        0.32,
        -1.67,
        -1.57,
        -0.1,
    ),
    row(
        "2020-04-02",
        274,
        1.66,
        0.44,
        1.92,
        0.16,
        -1.22,
        -1.76,
        0.54,
    ),
    row(
        "2020-04-03",
        290,
        1.12,
        0.06,
        1.07,
        0.34,
        -1.06,
        -0.73,
        -0.33,
    ),
    row(
        "2020-04-04",
        66,
        1.86,
        0.27,
        0.96,
        0.18,
        -1.59,
        -0.77,
        -0.81,
    ),
    row(
        "2020-04-06",
        104,
        0.77,
        -0.13,
        0.92,
        0.23,
        -0.9,
        -0.69,
        -0.21,
    ),
    row("2020-04-07", 44, 0.65, 0.4, 0.94, 0.02, -0.26, -0.92, 0.67),
];

/// Round half away from zero to two decimals, the table print convention.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Gauss-Jordan solve with partial pivoting; test-side linear oracle.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        assert!(diag.abs() > 1e-12, "oracle system is singular");
        for j in col..k {
            a[col][j] /= diag;
        }
        b[col] /= diag;
        for i in 0..k {
            if i != col && a[i][col] != 0.0 {
                let factor = a[i][col];
                for j in col..k {
                    a[i][j] -= factor * a[col][j];
                }
                b[i] -= factor * b[col];
            }
        }
    }
    b
}

/// Brute-force WLS through the weighted normal equations.
pub fn normal_equations_oracle(x: &[Vec<f64>], y: &[f64], w: &[f64]) -> Vec<f64> {
    let k = x.len();
    let n = y.len();
    let mut xtwx = vec![vec![0.0; k]; k];
    let mut xtwy = vec![0.0; k];
    for i in 0..n {
        for a in 0..k {
            xtwy[a] += w[i] * x[a][i] * y[i];
            for b in 0..k {
                xtwx[a][b] += w[i] * x[a][i] * x[b][i];
            }
        }
    }
    solve_dense(xtwx, xtwy)
}
