//! IO, file formats and command plumbing for the epidid pipeline.
//!
//! The estimation engine lives in `epidid-core`; this crate parses the
//! input CSVs, writes normalized bundles and reports, and backs the
//! `epidid` command-line binary.

pub mod bundle;
pub mod config;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use epidid_core as core;
