//! Synthetic county panels with known ground-truth effects.
//!
//! Counties grow exponentially at `base_growth` per day. Treated counties
//! follow the control path through their order date and then a multiplier
//! path solved one day at a time so that the population value of the
//! difference-in-differences interaction at horizon `d` equals the target
//! effect path: exactly the mapped value at mapped horizons, linearly
//! interpolated between them, ramping from zero up to the first mapped
//! horizon. Counts are materialized at a large scale so that integer
//! rounding and the `+ 1` log offset stay below 1e-9 in the recovered
//! coefficients.
//!
//! Randomness comes from a ChaCha12 stream seeded from the spec's 64-bit
//! seed, so generated bundles are bit-reproducible across runs and
//! platforms; the algorithm name is carried in the output metadata.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dates::{add_days, date_range, parse_iso, Date};
use crate::design::{build_design, DesignOptions};
use crate::error::{Error, Result};
use crate::fit::fit_model;
use crate::groups::{group_counties, CountyGroup};
use crate::math;
use crate::panel::{assemble_panel, ControlWeight};
use crate::series::{CountySeries, Fips, OutcomeKind, SeriesSet, StateTests};

/// Name of the random number generator recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha12";

const SYNTH_STATE: &str = "ZZ";

/// How many counties each treated cohort holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountiesPerGroup {
    Uniform(usize),
    PerGroup(Vec<usize>),
}

/// Specification of a synthetic world.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_treated_groups: usize,
    pub counties_per_group: CountiesPerGroup,
    pub control_counties: usize,
    /// Daily log growth of the control path.
    pub base_growth: f64,
    /// Target interaction value per horizon (days after the order, > 0).
    pub effect_by_horizon: BTreeMap<i32, f64>,
    /// Growth-rate drift applied to treated counties over the two weeks
    /// before their order; zero keeps the pre-period clean.
    pub anticipation: f64,
    /// Standard deviation of log-scale daily noise.
    pub noise_sd: f64,
    pub seed: u64,
    /// Order date of the first cohort; later cohorts follow at
    /// `order_spacing_days` intervals.
    pub first_order_date: Date,
    pub order_spacing_days: u32,
    /// Data coverage before the first order and after the last order.
    pub pre_days: u32,
    pub post_days: u32,
    /// Daily count scale at the anchor date.
    pub base_daily: f64,
    /// Fatality series scale relative to `base_daily`.
    pub fatality_scale: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_treated_groups: 5,
            counties_per_group: CountiesPerGroup::Uniform(3),
            control_counties: 8,
            base_growth: 0.12,
            effect_by_horizon: [(7, -0.5), (14, -0.5), (21, -0.5)].into_iter().collect(),
            anticipation: 0.0,
            noise_sd: 0.0,
            seed: 1,
            first_order_date: parse_iso("2020-03-29").expect("valid date"),
            order_spacing_days: 1,
            pre_days: 28,
            post_days: 27,
            base_daily: 5e10,
            fatality_scale: 1.0,
        }
    }
}

impl SynthSpec {
    /// Compact world used across unit tests.
    pub fn default_for_tests(seed: u64) -> Self {
        SynthSpec {
            n_treated_groups: 3,
            counties_per_group: CountiesPerGroup::Uniform(2),
            control_counties: 4,
            effect_by_horizon: [(7, -0.5)].into_iter().collect(),
            seed,
            ..SynthSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_treated_groups == 0 {
            return Err(Error::InvalidSpec(
                "n_treated_groups must be positive".into(),
            ));
        }
        if self.control_counties == 0 {
            return Err(Error::InvalidSpec(
                "control_counties must be positive".into(),
            ));
        }
        match &self.counties_per_group {
            CountiesPerGroup::Uniform(n) if *n == 0 => {
                return Err(Error::InvalidSpec(
                    "counties_per_group must be positive".into(),
                ));
            }
            CountiesPerGroup::PerGroup(v) => {
                if v.len() != self.n_treated_groups {
                    return Err(Error::InvalidSpec(format!(
                        "per-group county list has {} entries for {} groups",
                        v.len(),
                        self.n_treated_groups
                    )));
                }
                if v.contains(&0) {
                    return Err(Error::InvalidSpec("county counts must be positive".into()));
                }
            }
            _ => {}
        }
        if self.noise_sd < 0.0 {
            return Err(Error::InvalidSpec("noise_sd must be non-negative".into()));
        }
        if self.pre_days < 14 {
            // The anchor-date windows reach 13 days before the order.
            return Err(Error::InvalidSpec("pre_days must be at least 14".into()));
        }
        if self.base_daily <= 0.0 {
            return Err(Error::InvalidSpec("base_daily must be positive".into()));
        }
        if self.effect_by_horizon.keys().any(|d| *d <= 0) {
            return Err(Error::InvalidSpec(
                "effect horizons must be positive days".into(),
            ));
        }
        if self.n_treated_groups > 799
            || self.control_counties > 9_999
            || self.cohort_sizes().iter().any(|n| *n > 99)
        {
            return Err(Error::InvalidSpec(
                "synthetic world too large for fips scheme".into(),
            ));
        }
        Ok(())
    }

    fn cohort_sizes(&self) -> Vec<usize> {
        match &self.counties_per_group {
            CountiesPerGroup::Uniform(n) => alloc::vec![*n; self.n_treated_groups],
            CountiesPerGroup::PerGroup(v) => v.clone(),
        }
    }

    /// The ground-truth interaction value at horizon `d`.
    ///
    /// Mapped horizons return their mapped value; between them the path is
    /// linear, before the first it ramps from zero, after the last it is
    /// constant. Non-positive horizons are zero.
    pub fn effect_at(&self, d: i32) -> f64 {
        if d <= 0 || self.effect_by_horizon.is_empty() {
            return 0.0;
        }
        let first = *self.effect_by_horizon.keys().next().expect("non-empty");
        let last = *self
            .effect_by_horizon
            .keys()
            .next_back()
            .expect("non-empty");
        if d <= first {
            return self.effect_by_horizon[&first] * d as f64 / first as f64;
        }
        if d >= last {
            return self.effect_by_horizon[&last];
        }
        if let Some(v) = self.effect_by_horizon.get(&d) {
            return *v;
        }
        let (&d0, &v0) = self
            .effect_by_horizon
            .range(..d)
            .next_back()
            .expect("below");
        let (&d1, &v1) = self.effect_by_horizon.range(d..).next().expect("above");
        let f = (d - d0) as f64 / (d1 - d0) as f64;
        v0 * (1.0 - f) + v1 * f
    }

    fn order_date(&self, cohort: usize) -> Date {
        add_days(
            self.first_order_date,
            cohort as i64 * self.order_spacing_days as i64,
        )
    }
}

/// A generated synthetic world.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub series: SeriesSet,
    pub orders: BTreeMap<Fips, Date>,
    pub tests: StateTests,
    pub rng_algorithm: &'static str,
    pub cutoff: Date,
}

impl SynthOutput {
    /// County-to-state map for the generated universe.
    pub fn universe(&self) -> BTreeMap<Fips, String> {
        self.series.states()
    }

    /// Partition the synthetic counties into cohorts and the control pool.
    pub fn groups(&self) -> Result<Vec<CountyGroup>> {
        group_counties(&self.orders, &self.universe(), self.cutoff)
    }
}

/// Solve the treated multiplier path `s(u) = e^{g u} * pattern(u)`.
///
/// Returns `s` indexed from `-pre..=post`, where the pre side carries the
/// anticipation drift and each post day is chosen so the population
/// interaction at that horizon equals `spec.effect_at(d)`.
fn solve_pattern(spec: &SynthSpec, pre: i64, post: i64) -> Result<BTreeMap<i64, f64>> {
    let g = spec.base_growth;
    let mut s = BTreeMap::new();
    for u in -pre..=0 {
        // Anticipation ramps over the two weeks before the order.
        let drift = if spec.anticipation != 0.0 && u > -14 {
            math::exp(spec.anticipation * (u + 14) as f64 / 14.0)
        } else {
            1.0
        };
        s.insert(u, math::exp(g * u as f64) * drift);
    }
    let window =
        |s: &BTreeMap<i64, f64>, from: i64, to: i64| -> f64 { (from..=to).map(|u| s[&u]).sum() };
    let anchor_growth = math::ln(window(&s, -6, 0)) - math::ln(window(&s, -13, -7));
    for d in 1..=post {
        let target = spec.effect_at(d as i32) + anchor_growth;
        let prev = window(&s, d - 13, d - 7);
        let partial: f64 = (d - 6..d).map(|u| s[&u]).sum();
        let value = math::exp(target) * prev - partial;
        if value <= 0.0 || !value.is_finite() {
            return Err(Error::InfeasibleEffectPath { day: d as i32 });
        }
        s.insert(d, value);
    }
    Ok(s)
}

/// Standard normal draw via Box-Muller on two uniform draws.
fn normal(rng: &mut ChaCha12Rng) -> f64 {
    // (0, 1] uniforms with 53-bit resolution.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Generate the synthetic world described by `spec`.
///
/// Deterministic given the seed: the same spec always produces the same
/// counts, county identifiers and order dates.
pub fn generate_panel(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let sizes = spec.cohort_sizes();
    let last_order = spec.order_date(spec.n_treated_groups - 1);
    let max_horizon = spec
        .effect_by_horizon
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .max(0) as i64;
    let post = (spec.post_days as i64).max(max_horizon);
    let pre = spec.pre_days as i64;
    let coverage_start = add_days(spec.first_order_date, -pre);
    let coverage_end = add_days(last_order, post);

    // Cohorts are staggered, so a county's event time runs past the
    // nominal pre/post span by up to the full stagger; solve the pattern
    // over everything any county can reach.
    let stagger = (spec.n_treated_groups as i64 - 1) * spec.order_spacing_days as i64;
    let pattern = solve_pattern(spec, pre + stagger, post + stagger)?;
    let g = spec.base_growth;
    let anchor = spec.first_order_date;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    let mut counties = BTreeMap::new();
    let mut orders = BTreeMap::new();

    let materialize = |fips: Fips,
                       order: Option<Date>,
                       county_scale: f64,
                       rng: &mut ChaCha12Rng|
     -> CountySeries {
        let mut daily_cases = BTreeMap::new();
        let mut daily_deaths = BTreeMap::new();
        for date in date_range(coverage_start, coverage_end) {
            let clean = match order {
                Some(tau) => {
                    // Treated level: base at the order date times the
                    // solved relative pattern.
                    let u = (date - tau).num_days();
                    let cohort_base =
                        spec.base_daily * math::exp(g * (tau - anchor).num_days() as f64);
                    cohort_base * county_scale * pattern[&u]
                }
                None => {
                    spec.base_daily
                        * county_scale
                        * math::exp(g * (date - anchor).num_days() as f64)
                }
            };
            let mut cases = clean;
            let mut deaths = clean * spec.fatality_scale;
            if spec.noise_sd > 0.0 {
                cases *= math::exp(spec.noise_sd * normal(rng));
                deaths *= math::exp(spec.noise_sd * normal(rng));
            }
            daily_cases.insert(date, (math::round(cases) as i64).max(0));
            daily_deaths.insert(date, (math::round(deaths) as i64).max(0));
        }
        CountySeries {
            fips,
            state: SYNTH_STATE.to_string(),
            daily_cases,
            daily_deaths,
            order_effective: order,
        }
    };

    for (cohort, &size) in sizes.iter().enumerate() {
        let order = spec.order_date(cohort);
        for j in 0..size {
            let fips = Fips::parse(&format!("{:05}", 10_000 + cohort * 100 + j))
                .expect("generated fips is valid");
            let scale = 0.5 + (j % 5) as f64 * 0.25;
            let series = materialize(fips.clone(), Some(order), scale, &mut rng);
            counties.insert(fips.clone(), series);
            orders.insert(fips, order);
        }
    }
    for j in 0..spec.control_counties {
        let fips = Fips::parse(&format!("{:05}", 90_000 + j)).expect("generated fips is valid");
        let scale = 0.5 + (j % 5) as f64 * 0.25;
        let series = materialize(fips.clone(), None, scale, &mut rng);
        counties.insert(fips, series);
    }

    // State-level tests grow smoothly; the covariate is constant in the
    // panel and exercises the collinearity pruner when included.
    let mut tests = StateTests::new();
    for date in date_range(coverage_start, coverage_end) {
        let t = 1e7 * math::exp(0.05 * (date - anchor).num_days() as f64);
        tests.insert(SYNTH_STATE, date, math::round(t) as i64);
    }

    Ok(SynthOutput {
        series: SeriesSet {
            counties,
            coverage_start,
            coverage_end,
        },
        orders,
        tests,
        rng_algorithm: RNG_ALGORITHM,
        cutoff: last_order,
    })
}

/// The closed-form 2x2 difference-in-differences of four means.
pub fn did_2x2_oracle(
    treated_pre: f64,
    treated_post: f64,
    control_pre: f64,
    control_post: f64,
) -> f64 {
    (treated_post - treated_pre) - (control_post - control_pre)
}

/// Recovery of one horizon across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonRecovery {
    pub horizon_d: i32,
    pub truth: f64,
    pub mean_beta3: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Fraction of seeds whose 95% CI contains the truth.
    pub coverage: f64,
}

/// Placebo (pre-period) estimates across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceboRecovery {
    pub horizon_d: i32,
    pub mean_beta3: f64,
    pub sd_beta3: f64,
    /// Monte Carlo standard error of the mean.
    pub mc_se: f64,
}

/// Result of a multi-seed recovery experiment.
#[derive(Debug, Clone)]
pub struct RecoverySummary {
    pub n_seeds: u32,
    pub horizons: Vec<HorizonRecovery>,
    pub placebos: Vec<PlaceboRecovery>,
    pub rng_algorithm: &'static str,
}

// Degenerate zero-noise runs have near-zero CI widths; the coverage check
// allows this much absolute slack so exact recovery counts as covered.
const COVERAGE_SLACK: f64 = 1e-8;

/// Run the full pipeline over `n_seeds` seeds (seed, seed+1, ...) and
/// compare estimates with the spec's ground truth.
///
/// Each seed builds panels at every mapped effect horizon plus the given
/// placebo horizons (d < 0, truth zero), with stratum fixed effects and no
/// tests covariate. Any seed failure aborts the experiment with the seed id.
pub fn recovery_experiment(
    template: &SynthSpec,
    n_seeds: u32,
    placebo_horizons: &[i32],
) -> Result<RecoverySummary> {
    if n_seeds == 0 {
        return Err(Error::InvalidSpec("n_seeds must be at least 1".into()));
    }
    template.validate()?;
    let horizons: Vec<i32> = template.effect_by_horizon.keys().copied().collect();
    let mut estimates: BTreeMap<i32, Vec<(f64, bool)>> = BTreeMap::new();
    let mut placebo_estimates: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    let opts = DesignOptions {
        include_tests: false,
        ..DesignOptions::default()
    };

    for i in 0..n_seeds {
        let seed = template.seed.wrapping_add(i as u64);
        let spec = SynthSpec {
            seed,
            ..template.clone()
        };
        let mut run = || -> Result<()> {
            let world = generate_panel(&spec)?;
            let groups = world.groups()?;
            for &d in horizons.iter().chain(placebo_horizons) {
                let panel = assemble_panel(
                    &groups,
                    &world.series,
                    None,
                    d,
                    OutcomeKind::Cases,
                    ControlWeight::OwnCount,
                )?;
                let fit = fit_model(&build_design(&panel, &opts)?)?;
                let effect = fit.interaction_effect()?;
                if d > 0 {
                    let truth = spec.effect_at(d);
                    let covered = effect.ci_low - COVERAGE_SLACK <= truth
                        && truth <= effect.ci_high + COVERAGE_SLACK;
                    estimates
                        .entry(d)
                        .or_default()
                        .push((effect.beta3, covered));
                } else {
                    placebo_estimates.entry(d).or_default().push(effect.beta3);
                }
            }
            Ok(())
        };
        run().map_err(|e| Error::SeedFailed {
            seed,
            message: e.to_string(),
        })?;
    }

    let horizons_out = estimates
        .into_iter()
        .map(|(d, values)| {
            let truth = template.effect_at(d);
            let n = values.len() as f64;
            let mean = values.iter().map(|(b, _)| b).sum::<f64>() / n;
            let mse = values
                .iter()
                .map(|(b, _)| (b - truth) * (b - truth))
                .sum::<f64>()
                / n;
            let covered = values.iter().filter(|(_, c)| *c).count() as f64 / n;
            HorizonRecovery {
                horizon_d: d,
                truth,
                mean_beta3: mean,
                bias: mean - truth,
                rmse: math::sqrt(mse),
                coverage: covered,
            }
        })
        .collect();
    let placebos_out = placebo_estimates
        .into_iter()
        .map(|(d, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = if values.len() > 1 {
                values.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let sd = math::sqrt(var);
            PlaceboRecovery {
                horizon_d: d,
                mean_beta3: mean,
                sd_beta3: sd,
                mc_se: sd / math::sqrt(n),
            }
        })
        .collect();

    Ok(RecoverySummary {
        n_seeds,
        horizons: horizons_out,
        placebos: placebos_out,
        rng_algorithm: RNG_ALGORITHM,
    })
}
