//! Command-line front end for the cohort difference-in-differences pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use epidid::bundle;
use epidid::config::{
    parse_date, ControlWeightArg, FeModeArg, FileConfig, FormulaArg, OutcomeArg, SynthConfig,
};
use epidid::ingest::{DateWindow, RawDataset};
use epidid::manifest::RunManifest;
use epidid::pipeline::{self, EstimationSettings, LoadedData};
use epidid::report;

use epidid_core::counterfactual::{aggregate_prevented, observed_weekly_counts};
use epidid_core::design::DesignOptions;
use epidid_core::event::event_study;
use epidid_core::groups::{group_counties, treated_cohorts, CountyGroup};
use epidid_core::panel::{assemble_panel, event_time_mean_growth, raw_did_table};
use epidid_core::series::OutcomeKind;
use epidid_core::synth::{generate_panel, recovery_experiment, SynthOutput, RNG_ALGORITHM};

/// Cohort difference-in-differences over county epidemic panels.
///
/// Defaults follow the reference analysis: study window 2020-03-01 to
/// 2020-05-07, treatment cutoff 2020-04-07, stratum fixed effects, weights
/// equal to county counts, and the tests covariate included whenever a
/// tests file is supplied.
#[derive(Parser)]
#[command(name = "epidid", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean the input CSVs into a normalized bundle.
    Ingest(IngestCmd),
    /// Fit the two-way fixed-effects models and report coefficients.
    Estimate(EstimateCmd),
    /// Sweep the interaction estimate over a horizon range.
    EventStudy(EventStudyCmd),
    /// Convert fitted effects into prevented-count totals.
    Counterfactual(CounterfactualCmd),
    /// Generate a synthetic bundle with known effects; optionally run a
    /// multi-seed recovery experiment.
    Simulate(SimulateCmd),
    /// Emit the raw cohort comparison tables and the event-time curve.
    Table(TableCmd),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Orders CSV: fips,state,county,order_effective.
    #[arg(long)]
    orders: Option<PathBuf>,
    /// Cases CSV: date,county,state,fips,cases,deaths.
    #[arg(long)]
    cases: Option<PathBuf>,
    /// State tests CSV: date,state,totalTestResults (extra columns ignored).
    #[arg(long)]
    tests: Option<PathBuf>,
    /// Study window start, ISO-8601 [default: 2020-03-01].
    #[arg(long)]
    window_start: Option<String>,
    /// Study window end, ISO-8601 [default: 2020-05-07].
    #[arg(long)]
    window_end: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Orders after this date fall into the never-treated pool
    /// [default: 2020-04-07].
    #[arg(long)]
    cutoff: Option<String>,
    /// Drop the tests covariate even when a tests file is supplied.
    #[arg(long)]
    no_tests: bool,
    /// Control-row weighting: own count (literal rule) or the paired
    /// cohort's count [default: own].
    #[arg(long, value_enum)]
    control_weights: Option<ControlWeightArg>,
    /// Cohort fixed effects: stratum (default; treated indicator stays
    /// identified) or per-group (absorbs it).
    #[arg(long, value_enum)]
    fe_mode: Option<FeModeArg>,
    /// Also write each fitted panel as CSV for external cross-checking.
    #[arg(long)]
    dump_panels: bool,
}

#[derive(Args)]
struct IngestCmd {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EstimateCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated horizons in days; default fits cases at 7,14,21 and
    /// fatalities at 21.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<i32>>,
    /// Outcome for the explicit horizon list [default: cases].
    #[arg(long, value_enum)]
    outcome: Option<OutcomeArg>,
}

#[derive(Args)]
struct EventStudyCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Smallest horizon [default: -14].
    #[arg(long, allow_hyphen_values = true)]
    d_min: Option<i32>,
    /// Largest horizon [default: 26].
    #[arg(long, allow_hyphen_values = true)]
    d_max: Option<i32>,
    /// Restrict to one outcome; default sweeps both.
    #[arg(long, value_enum)]
    outcome: Option<OutcomeArg>,
}

#[derive(Args)]
struct CounterfactualCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Difference formula [default: printed].
    #[arg(long, value_enum)]
    formula: Option<FormulaArg>,
    /// Restrict to one outcome; default reports both.
    #[arg(long, value_enum)]
    outcome: Option<OutcomeArg>,
}

#[derive(Args)]
struct SimulateCmd {
    /// TOML configuration; the [synth] table describes the world.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a recovery experiment over this many seeds.
    #[arg(long)]
    recovery_seeds: Option<u32>,
    /// Placebo horizons (d < 0) for the recovery experiment.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    placebo: Option<Vec<i32>>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Horizon for the cohort tables [default: 21].
    #[arg(long)]
    d: Option<i32>,
    /// Half-width in days of the event-time curve [default: 30].
    #[arg(long)]
    event_window: Option<u32>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest(cmd) => cmd_ingest(cmd),
        Command::Estimate(cmd) => cmd_estimate(cmd),
        Command::EventStudy(cmd) => cmd_event_study(cmd),
        Command::Counterfactual(cmd) => cmd_counterfactual(cmd),
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::Table(cmd) => cmd_table(cmd),
    }
}

/// Resolved common settings after merging flags, file config and defaults.
struct Resolved {
    orders: PathBuf,
    cases: PathBuf,
    tests: Option<PathBuf>,
    window: DateWindow,
    out: PathBuf,
    cutoff: NaiveDate,
    include_tests: bool,
    settings: EstimationSettings,
    dump_panels: bool,
    file: FileConfig,
}

fn resolve(common: &CommonArgs, model: Option<&ModelArgs>) -> Result<Resolved> {
    let file = FileConfig::load(common.config.as_deref())?;
    let orders = common
        .orders
        .clone()
        .or_else(|| file.orders.clone())
        .context("an orders file is required (--orders or config)")?;
    let cases = common
        .cases
        .clone()
        .or_else(|| file.cases.clone())
        .context("a cases file is required (--cases or config)")?;
    let tests = common.tests.clone().or_else(|| file.tests.clone());
    let window = DateWindow {
        start: resolve_date(&common.window_start, &file.window_start, "2020-03-01")?,
        end: resolve_date(&common.window_end, &file.window_end, "2020-05-07")?,
    };
    let out = common
        .out
        .clone()
        .or_else(|| file.out.clone())
        .context("an output directory is required (--out or config)")?;

    let (cutoff_flag, no_tests, cw, fe, dump) = match model {
        Some(m) => (
            m.cutoff.clone(),
            m.no_tests,
            m.control_weights,
            m.fe_mode,
            m.dump_panels,
        ),
        None => (None, false, None, None, false),
    };
    let cutoff = resolve_date(&cutoff_flag, &file.cutoff, "2020-04-07")?;
    let include_tests = if no_tests {
        false
    } else {
        file.include_tests.unwrap_or(tests.is_some()) && tests.is_some()
    };
    let control_weight = cw.or(file.control_weights).unwrap_or(ControlWeightArg::Own);
    let fe_mode = fe.or(file.fe_mode).unwrap_or(FeModeArg::Stratum);
    let settings = EstimationSettings {
        control_weight: control_weight.mode(),
        design: DesignOptions {
            include_tests,
            fe_mode: fe_mode.mode(),
            ..DesignOptions::default()
        },
    };
    Ok(Resolved {
        orders,
        cases,
        tests,
        window,
        out,
        cutoff,
        include_tests,
        settings,
        dump_panels: dump || file.dump_panels.unwrap_or(false),
        file,
    })
}

fn resolve_date(flag: &Option<String>, file: &Option<String>, default: &str) -> Result<NaiveDate> {
    let s = flag.as_deref().or(file.as_deref()).unwrap_or(default);
    parse_date(s, "date")
}

fn load(resolved: &Resolved) -> Result<(LoadedData, Vec<CountyGroup>)> {
    let data = pipeline::load_data(
        &resolved.orders,
        &resolved.cases,
        resolved.tests.as_deref(),
        resolved.window,
    )?;
    let groups = group_counties(&data.order_dates, &data.universe, resolved.cutoff)?;
    Ok((data, groups))
}

/// Writes output files and records their names for the manifest.
struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents).with_context(|| format!("cannot write {name}"))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        self.written.push("manifest.json".to_string());
        self.written.sort();
        manifest.outputs = self.written;
        manifest.write(&self.dir)
    }
}

fn base_manifest(
    command: &str,
    resolved: &Resolved,
    extra: serde_json::Value,
) -> Result<RunManifest> {
    let mut config = serde_json::json!({
        "orders": resolved.orders.display().to_string(),
        "cases": resolved.cases.display().to_string(),
        "tests": resolved.tests.as_ref().map(|p| p.display().to_string()),
        "window_start": resolved.window.start.to_string(),
        "window_end": resolved.window.end.to_string(),
        "cutoff": resolved.cutoff.to_string(),
        "include_tests": resolved.include_tests,
        "control_weights": match resolved.settings.control_weight {
            epidid_core::panel::ControlWeight::OwnCount => "own",
            epidid_core::panel::ControlWeight::PairedCohort => "paired",
        },
        "fe_mode": match resolved.settings.design.fe_mode {
            epidid_core::design::FeMode::Stratum => "stratum",
            epidid_core::design::FeMode::PerGroup => "per-group",
        },
    });
    if let (Some(obj), Some(more)) = (config.as_object_mut(), extra.as_object()) {
        for (k, v) in more {
            obj.insert(k.clone(), v.clone());
        }
    }
    let mut manifest = RunManifest::new(command, config);
    manifest.add_input(&resolved.orders)?;
    manifest.add_input(&resolved.cases)?;
    if let Some(tests) = &resolved.tests {
        manifest.add_input(tests)?;
    }
    Ok(manifest)
}

fn warn_skipped(outcome: OutcomeKind, d: i32, skipped: &[NaiveDate]) {
    if !skipped.is_empty() {
        eprintln!(
            "warning: {} cohort(s) skipped at d = {d} for {outcome}: insufficient coverage ({})",
            skipped.len(),
            skipped
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
}

fn cmd_ingest(cmd: IngestCmd) -> Result<()> {
    let resolved = resolve(&cmd.common, None)?;
    let (data, groups) = load(&resolved)?;
    let mut out = OutputDir::create(&resolved.out)?;
    bundle::write_bundle(&out.dir, &data.dataset)?;
    out.written
        .extend([bundle::ORDERS_FILE, bundle::CASES_FILE, bundle::TESTS_FILE].map(String::from));
    let mut summary = report::cleaning_summary(&data.dataset);
    let control = groups.last().map(|g| g.county_count()).unwrap_or(0);
    summary.push_str(&format!(
        "\ngroups: {} treated cohorts, control pool of {} counties\n",
        treated_cohorts(&groups).len(),
        control
    ));
    out.write("cleaning_summary.txt", &summary)?;
    let manifest = base_manifest("ingest", &resolved, serde_json::json!({}))?;
    out.finish(manifest)
}

fn default_models() -> Vec<(OutcomeKind, i32)> {
    vec![
        (OutcomeKind::Cases, 7),
        (OutcomeKind::Cases, 14),
        (OutcomeKind::Cases, 21),
        (OutcomeKind::Fatalities, 21),
    ]
}

fn cmd_estimate(cmd: EstimateCmd) -> Result<()> {
    let resolved = resolve(&cmd.common, Some(&cmd.model))?;
    let (data, groups) = load(&resolved)?;
    let horizons = cmd.d.clone().or_else(|| resolved.file.horizons.clone());
    let models: Vec<(OutcomeKind, i32)> = match horizons {
        Some(ds) => {
            let outcome = cmd
                .outcome
                .or(resolved.file.outcome)
                .unwrap_or(OutcomeArg::Cases)
                .kind();
            ds.into_iter().map(|d| (outcome, d)).collect()
        }
        None => default_models(),
    };
    let tests = resolved.include_tests.then_some(&data.tests);
    let mut out = OutputDir::create(&resolved.out)?;
    let mut runs = Vec::new();
    for (outcome, d) in &models {
        let run = pipeline::run_model(
            &groups,
            &data.series,
            tests,
            *d,
            *outcome,
            &resolved.settings,
        )?;
        warn_skipped(*outcome, *d, &run.panel.skipped_cohorts);
        out.write(
            &format!("model_{outcome}_d{d}.txt"),
            &report::fit_report(&run.fit, &run.effect, &run.dropped),
        )?;
        if resolved.dump_panels {
            out.write(
                &format!("panel_{outcome}_d{d}.csv"),
                &report::panel_csv(&run.panel),
            )?;
        }
        runs.push(run);
    }
    let rows: Vec<report::ModelRow<'_>> = runs
        .iter()
        .map(|r| report::ModelRow {
            fit: &r.fit,
            effect: &r.effect,
            dropped: &r.dropped,
        })
        .collect();
    out.write("models.csv", &report::models_csv(&rows))?;
    let manifest = base_manifest(
        "estimate",
        &resolved,
        serde_json::json!({
            "models": models
                .iter()
                .map(|(o, d)| format!("{o}:{d}"))
                .collect::<Vec<_>>(),
            "dump_panels": resolved.dump_panels,
        }),
    )?;
    out.finish(manifest)
}

fn cmd_event_study(cmd: EventStudyCmd) -> Result<()> {
    let resolved = resolve(&cmd.common, Some(&cmd.model))?;
    let (data, groups) = load(&resolved)?;
    let d_min = cmd.d_min.or(resolved.file.d_min).unwrap_or(-14);
    let d_max = cmd.d_max.or(resolved.file.d_max).unwrap_or(26);
    if d_min > d_max {
        bail!("--d-min {d_min} exceeds --d-max {d_max}");
    }
    let outcomes: Vec<OutcomeKind> = match cmd.outcome.or(resolved.file.outcome) {
        Some(o) => vec![o.kind()],
        None => vec![OutcomeKind::Cases, OutcomeKind::Fatalities],
    };
    let tests = resolved.include_tests.then_some(&data.tests);
    let mut out = OutputDir::create(&resolved.out)?;
    let mut gap_notes = Vec::new();
    for outcome in &outcomes {
        let study = event_study(
            |d| {
                assemble_panel(
                    &groups,
                    &data.series,
                    tests,
                    d,
                    *outcome,
                    resolved.settings.control_weight,
                )
            },
            d_min,
            d_max,
            &resolved.settings.design,
        )?;
        out.write(
            &format!("event_study_{outcome}.csv"),
            &report::event_study_csv(&study),
        )?;
        for gap in &study.gaps {
            let note = format!("{outcome} d={}: {}", gap.d, gap.reason);
            eprintln!("warning: event-study gap: {note}");
            gap_notes.push(note);
        }
    }
    let manifest = base_manifest(
        "event-study",
        &resolved,
        serde_json::json!({
            "d_min": d_min,
            "d_max": d_max,
            "outcomes": outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            "gaps": gap_notes,
        }),
    )?;
    out.finish(manifest)
}

fn cmd_counterfactual(cmd: CounterfactualCmd) -> Result<()> {
    let resolved = resolve(&cmd.common, Some(&cmd.model))?;
    let (data, groups) = load(&resolved)?;
    let formula = cmd
        .formula
        .or(resolved.file.formula)
        .unwrap_or(FormulaArg::Printed)
        .formula();
    let outcomes: Vec<OutcomeKind> = match cmd.outcome.or(resolved.file.outcome) {
        Some(o) => vec![o.kind()],
        None => vec![OutcomeKind::Cases, OutcomeKind::Fatalities],
    };
    let tests = resolved.include_tests.then_some(&data.tests);
    let mut out = OutputDir::create(&resolved.out)?;
    let mut reports = Vec::new();
    for outcome in &outcomes {
        let mut effects = BTreeMap::new();
        let mut common_cohorts: Option<Vec<NaiveDate>> = None;
        for d in [7, 14, 21] {
            let run = pipeline::run_model(
                &groups,
                &data.series,
                tests,
                d,
                *outcome,
                &resolved.settings,
            )?;
            warn_skipped(*outcome, d, &run.panel.skipped_cohorts);
            effects.insert(d, run.effect);
            let mut strata: Vec<NaiveDate> = run.panel.rows.iter().map(|r| r.stratum_id).collect();
            strata.dedup();
            // Only cohorts estimable at every horizon enter the totals.
            common_cohorts = Some(match common_cohorts {
                None => strata,
                Some(prev) => prev.into_iter().filter(|s| strata.contains(s)).collect(),
            });
        }
        let cohorts = common_cohorts.unwrap_or_default();
        let observed = observed_weekly_counts(&groups, &data.series, *outcome, 3)?;
        let report = aggregate_prevented(&effects, &cohorts, &observed, *outcome, formula)?;
        out.write(
            &format!("counterfactual_{outcome}.csv"),
            &report::counterfactual_csv(&report),
        )?;
        reports.push(report);
    }
    let summary = report::counterfactual_summary(&reports.iter().collect::<Vec<_>>());
    out.write("counterfactual_summary.txt", &summary)?;
    let manifest = base_manifest(
        "counterfactual",
        &resolved,
        serde_json::json!({
            "formula": formula.label(),
            "outcomes": outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
        }),
    )?;
    out.finish(manifest)
}

fn cmd_simulate(cmd: SimulateCmd) -> Result<()> {
    let file = FileConfig::load(cmd.config.as_deref())?;
    let synth_cfg: SynthConfig = file.synth.clone().unwrap_or_default();
    let spec = synth_cfg.to_spec(cmd.seed)?;
    let out_dir = cmd
        .out
        .clone()
        .or_else(|| file.out.clone())
        .context("an output directory is required (--out or config)")?;
    let world = generate_panel(&spec).context("generating the synthetic world")?;
    let dataset = dataset_from_synth(&world);
    let mut out = OutputDir::create(&out_dir)?;
    bundle::write_bundle(&out.dir, &dataset)?;
    out.written
        .extend([bundle::ORDERS_FILE, bundle::CASES_FILE, bundle::TESTS_FILE].map(String::from));

    let recovery_seeds = cmd.recovery_seeds.or(file.recovery_seeds);
    if let Some(n_seeds) = recovery_seeds {
        let placebos = cmd
            .placebo
            .clone()
            .or_else(|| file.placebo_horizons.clone())
            .unwrap_or_else(|| vec![-7]);
        let summary = recovery_experiment(&spec, n_seeds, &placebos)
            .context("running the recovery experiment")?;
        out.write(
            "recovery_summary.txt",
            &report::recovery_summary_text(&summary),
        )?;
    }

    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::json!({
            "synth": serde_json::to_value(&synth_cfg)?,
            "seed": spec.seed,
            "recovery_seeds": recovery_seeds,
            "out": out_dir.display().to_string(),
        }),
    );
    manifest.rng_algorithm = Some(RNG_ALGORITHM.to_string());
    out.finish(manifest)
}

/// Convert a generated world into the canonical dataset records.
fn dataset_from_synth(world: &SynthOutput) -> RawDataset {
    let mut dataset = RawDataset::default();
    for (fips, order) in &world.orders {
        let state = world.series.counties[fips].state.clone();
        dataset.orders.push(epidid::ingest::OrderRecord {
            fips: fips.clone(),
            state,
            county_name: format!("synth-{fips}"),
            order_effective: *order,
        });
    }
    for county in world.series.counties.values() {
        let mut cum_cases = 0i64;
        let mut cum_deaths = 0i64;
        for date in
            epidid_core::dates::date_range(world.series.coverage_start, world.series.coverage_end)
        {
            cum_cases += county.daily_cases.get(&date).copied().unwrap_or(0);
            cum_deaths += county.daily_deaths.get(&date).copied().unwrap_or(0);
            dataset.cases.push(epidid::ingest::CaseRow {
                date,
                county: format!("synth-{}", county.fips),
                state: county.state.clone(),
                fips: county.fips.clone(),
                cumulative_cases: cum_cases,
                cumulative_deaths: cum_deaths,
            });
        }
    }
    dataset
        .cases
        .sort_by(|a, b| (&a.fips, a.date).cmp(&(&b.fips, b.date)));
    for state in world.tests.states() {
        if let Some(series) = world.tests.series(state) {
            for (date, value) in series {
                dataset.tests.push(epidid::ingest::TestRow {
                    date: *date,
                    state: state.to_string(),
                    cumulative_tests: *value,
                });
            }
        }
    }
    dataset
}

fn cmd_table(cmd: TableCmd) -> Result<()> {
    let resolved = resolve(&cmd.common, Some(&cmd.model))?;
    let (data, groups) = load(&resolved)?;
    let d = cmd.d.unwrap_or(21);
    let event_window = cmd
        .event_window
        .or(resolved.file.event_window)
        .unwrap_or(30) as i32;
    let mut out = OutputDir::create(&resolved.out)?;
    for outcome in [OutcomeKind::Cases, OutcomeKind::Fatalities] {
        let rows = raw_did_table(&groups, &data.series, d, outcome)?;
        out.write(
            &format!("table_{outcome}.csv"),
            &report::did_table_csv(&rows),
        )?;
        let title = format!(
            "One week change in log weekly {outcome}: cohorts vs the control pool, {d} days after the order"
        );
        out.write(
            &format!("table_{outcome}.txt"),
            &report::did_table_text(&title, &rows),
        )?;
    }
    let curve = event_time_mean_growth(
        &data.series,
        OutcomeKind::Cases,
        -event_window..=event_window,
    )?;
    out.write("event_time_growth.csv", &report::event_time_csv(&curve))?;
    let manifest = base_manifest(
        "table",
        &resolved,
        serde_json::json!({ "d": d, "event_window": event_window }),
    )?;
    out.finish(manifest)
}
