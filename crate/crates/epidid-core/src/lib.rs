//! Cohort difference-in-differences engine for county-level epidemic panels.
//!
//! The crate turns daily county case/fatality counts and policy-order dates
//! into:
//!
//! - log weekly growth outcomes aggregated over order-date cohorts,
//! - two-period panels pairing each treated cohort with the never-treated
//!   control pool at the same calendar dates,
//! - weighted least squares fits with cohort and date fixed effects and
//!   cluster-robust (sandwich) variance,
//! - event-study sweeps over the number of days between order and outcome,
//! - counterfactual prevented-count aggregates, and
//! - a synthetic-data harness with known ground truth for validating the
//!   whole chain.
//!
//! The crate is `no_std`-compatible (`alloc` required); all IO, file formats
//! and the command-line front end live in the companion `epidid` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod counterfactual;
pub mod dates;
pub mod design;
pub mod error;
pub mod event;
pub mod fit;
pub mod groups;
pub mod growth;
mod linalg;
mod math;
pub mod panel;
pub mod series;
pub mod synth;
pub mod tdist;

pub use dates::Date;
pub use error::{Error, Result};
pub use groups::{CountyGroup, GroupId};
pub use series::{Fips, OutcomeKind, SeriesSet, StateTests};
