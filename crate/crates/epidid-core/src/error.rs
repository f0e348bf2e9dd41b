//! Error type shared across the estimation pipeline.

use alloc::string::String;

use crate::dates::Date;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by panel construction, fitting and the synthetic harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A weekly window reaches outside the available data coverage.
    InsufficientHistory {
        anchor: Date,
        needed_from: Date,
        coverage_start: Date,
        coverage_end: Date,
    },
    /// A county group references a state with no test series.
    MissingStateTests { state: String },
    /// The tests covariate was requested but is absent from the panel rows.
    MissingTestsCovariate,
    /// `d = 0` makes the pre and post observations indistinguishable.
    DegenerateHorizon,
    /// Grouping was attempted over an empty county universe.
    EmptyCountyUniverse,
    /// The never-treated control pool has no members.
    EmptyControlGroup,
    /// No treated cohort survives the horizon's data-coverage requirement.
    NoFeasibleCohorts { horizon_d: i32 },
    /// No horizon in an event-study range could be fitted.
    AllHorizonsInfeasible,
    /// The design matrix is numerically rank deficient even after pruning.
    RankDeficient { column: String },
    /// A named coefficient is not present in the fitted model.
    CoefficientMissing { column: String },
    /// Cluster-robust variance needs at least two clusters.
    SingleCluster,
    /// A statistic's degrees of freedom are not positive.
    DegreesOfFreedom { n_obs: usize, n_params: usize },
    /// The requested event-time window is empty.
    EmptyWindow,
    /// A synthetic specification failed validation.
    InvalidSpec(String),
    /// The requested effect path cannot be realised with non-negative counts.
    InfeasibleEffectPath { day: i32 },
    /// A recovery-experiment seed aborted the experiment.
    SeedFailed { seed: u64, message: String },
    /// Observed weekly counts are missing for a cohort.
    MissingWeeklyCounts { group: Date, week: u8 },
    /// Counterfactual aggregation received an incomplete fit set.
    MissingHorizonFit { horizon_d: i32 },
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InsufficientHistory {
                anchor,
                needed_from,
                coverage_start,
                coverage_end,
            } => write!(
                f,
                "insufficient history for weekly window ending {anchor}: needs data from \
                 {needed_from}, coverage is [{coverage_start}, {coverage_end}]"
            ),
            Error::MissingStateTests { state } => {
                write!(f, "no test series for state {state}")
            }
            Error::MissingTestsCovariate => {
                write!(f, "tests covariate requested but absent from panel rows")
            }
            Error::DegenerateHorizon => {
                write!(
                    f,
                    "horizon d = 0 is degenerate: pre and post dates coincide"
                )
            }
            Error::EmptyCountyUniverse => write!(f, "county universe is empty"),
            Error::EmptyControlGroup => {
                write!(f, "never-treated control pool is empty")
            }
            Error::NoFeasibleCohorts { horizon_d } => {
                write!(
                    f,
                    "no treated cohort has data coverage at horizon d = {horizon_d}"
                )
            }
            Error::AllHorizonsInfeasible => {
                write!(f, "no horizon in the requested range could be fitted")
            }
            Error::RankDeficient { column } => {
                write!(f, "design is rank deficient at column {column}")
            }
            Error::CoefficientMissing { column } => {
                write!(f, "coefficient {column} not present in the fitted model")
            }
            Error::SingleCluster => {
                write!(f, "cluster-robust variance needs at least two clusters")
            }
            Error::DegreesOfFreedom { n_obs, n_params } => write!(
                f,
                "non-positive residual degrees of freedom: n = {n_obs}, k = {n_params}"
            ),
            Error::EmptyWindow => write!(f, "event-time window is empty"),
            Error::InvalidSpec(msg) => write!(f, "invalid synthetic spec: {msg}"),
            Error::InfeasibleEffectPath { day } => write!(
                f,
                "effect path infeasible: day {day} after the order would need negative counts"
            ),
            Error::SeedFailed { seed, message } => {
                write!(f, "recovery experiment aborted at seed {seed}: {message}")
            }
            Error::MissingWeeklyCounts { group, week } => {
                write!(
                    f,
                    "missing observed weekly counts for cohort {group}, week {week}"
                )
            }
            Error::MissingHorizonFit { horizon_d } => {
                write!(f, "no fit supplied for horizon d = {horizon_d}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
