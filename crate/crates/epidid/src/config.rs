//! Configuration types: CLI-facing enums, the TOML file config, and the
//! synthetic-world config.
//!
//! Every flag can also be given through `--config <file>`; explicit CLI
//! flags win over file values, which win over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::ValueEnum;
use epidid_core::counterfactual::CfFormula;
use epidid_core::dates::parse_iso;
use epidid_core::design::FeMode;
use epidid_core::panel::ControlWeight;
use epidid_core::series::OutcomeKind;
use epidid_core::synth::{CountiesPerGroup, SynthSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeArg {
    Cases,
    Fatalities,
}

impl OutcomeArg {
    pub fn kind(self) -> OutcomeKind {
        match self {
            OutcomeArg::Cases => OutcomeKind::Cases,
            OutcomeArg::Fatalities => OutcomeKind::Fatalities,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlWeightArg {
    /// Control rows carry the control pool's own county count.
    Own,
    /// Control rows carry the paired cohort's county count.
    Paired,
}

impl ControlWeightArg {
    pub fn mode(self) -> ControlWeight {
        match self {
            ControlWeightArg::Own => ControlWeight::OwnCount,
            ControlWeightArg::Paired => ControlWeight::PairedCohort,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeModeArg {
    /// Stratum fixed effects; the treated indicator stays identified.
    Stratum,
    /// Per-group fixed effects; the treated indicator is absorbed.
    PerGroup,
}

impl FeModeArg {
    pub fn mode(self) -> FeMode {
        match self {
            FeModeArg::Stratum => FeMode::Stratum,
            FeModeArg::PerGroup => FeMode::PerGroup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaArg {
    /// Difference = (exp(b3) - 1) * observed weekly count.
    Printed,
    /// Difference = observed * (1 - exp(-b3)).
    InverseGrowth,
}

impl FormulaArg {
    pub fn formula(self) -> CfFormula {
        match self {
            FormulaArg::Printed => CfFormula::Printed,
            FormulaArg::InverseGrowth => CfFormula::InverseGrowth,
        }
    }
}

/// Keys accepted in a `--config` TOML document.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub orders: Option<PathBuf>,
    pub cases: Option<PathBuf>,
    pub tests: Option<PathBuf>,
    pub cutoff: Option<String>,
    pub window_start: Option<String>,
    pub window_end: Option<String>,
    pub horizons: Option<Vec<i32>>,
    pub outcome: Option<OutcomeArg>,
    pub d_min: Option<i32>,
    pub d_max: Option<i32>,
    pub include_tests: Option<bool>,
    pub control_weights: Option<ControlWeightArg>,
    pub fe_mode: Option<FeModeArg>,
    pub formula: Option<FormulaArg>,
    pub dump_panels: Option<bool>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub recovery_seeds: Option<u32>,
    pub placebo_horizons: Option<Vec<i32>>,
    pub event_window: Option<u32>,
    pub synth: Option<SynthConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }
}

pub fn parse_date(s: &str, what: &str) -> Result<NaiveDate> {
    parse_iso(s).with_context(|| format!("{what} '{s}' is not an ISO-8601 date"))
}

fn default_first_order() -> String {
    "2020-03-29".to_string()
}

/// Uniform or per-group county counts, accepted as an integer or a list.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CountiesField {
    Uniform(usize),
    PerGroup(Vec<usize>),
}

impl Default for CountiesField {
    fn default() -> Self {
        CountiesField::Uniform(3)
    }
}

/// TOML-facing synthetic-world configuration; mirrors the generator spec.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_treated_groups: usize,
    pub counties_per_group: CountiesField,
    pub control_counties: usize,
    pub base_growth: f64,
    /// Horizon (days, as a string key) to target interaction value.
    pub effect_by_horizon: BTreeMap<String, f64>,
    pub anticipation: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub first_order_date: String,
    pub order_spacing_days: u32,
    pub pre_days: u32,
    pub post_days: u32,
    pub base_daily: f64,
    pub fatality_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let spec = SynthSpec::default();
        SynthConfig {
            n_treated_groups: spec.n_treated_groups,
            counties_per_group: CountiesField::Uniform(3),
            control_counties: spec.control_counties,
            base_growth: spec.base_growth,
            effect_by_horizon: spec
                .effect_by_horizon
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            anticipation: spec.anticipation,
            noise_sd: spec.noise_sd,
            seed: spec.seed,
            first_order_date: default_first_order(),
            order_spacing_days: spec.order_spacing_days,
            pre_days: spec.pre_days,
            post_days: spec.post_days,
            base_daily: spec.base_daily,
            fatality_scale: spec.fatality_scale,
        }
    }
}

impl SynthConfig {
    pub fn to_spec(&self, seed_override: Option<u64>) -> Result<SynthSpec> {
        let mut effect_by_horizon = BTreeMap::new();
        for (k, v) in &self.effect_by_horizon {
            let d: i32 = k
                .parse()
                .with_context(|| format!("effect horizon key '{k}' is not an integer"))?;
            effect_by_horizon.insert(d, *v);
        }
        if effect_by_horizon.is_empty() {
            bail!("effect_by_horizon must name at least one horizon");
        }
        Ok(SynthSpec {
            n_treated_groups: self.n_treated_groups,
            counties_per_group: match &self.counties_per_group {
                CountiesField::Uniform(n) => CountiesPerGroup::Uniform(*n),
                CountiesField::PerGroup(v) => CountiesPerGroup::PerGroup(v.clone()),
            },
            control_counties: self.control_counties,
            base_growth: self.base_growth,
            effect_by_horizon,
            anticipation: self.anticipation,
            noise_sd: self.noise_sd,
            seed: seed_override.unwrap_or(self.seed),
            first_order_date: parse_date(&self.first_order_date, "first_order_date")?,
            order_spacing_days: self.order_spacing_days,
            pre_days: self.pre_days,
            post_days: self.post_days,
            base_daily: self.base_daily,
            fatality_scale: self.fatality_scale,
        })
    }
}
