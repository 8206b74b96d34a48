//! The `demand-decomp` command line tool.
//!
//! Every subcommand reads one or more [`RunConfig`] files (or builds one from
//! flags alone), runs the pipeline and writes CSV tables and SVG plots into
//! the output directory:
//!
//! | command   | files |
//! |-----------|-------|
//! | `fit`     | `coefficients.csv`, `fit_report.csv` |
//! | `analyze` | the above plus `residuals.csv`, `residuals.svg` |
//! | `compare` | `difference.csv`, `difference.svg` |
//! | `summary` | `summary.csv`, `summary.svg` (unscaled residuals) |
//! | `synth`   | `weather.csv`, `consumption.csv` |
//!
//! `--dump-features` adds `features.csv` to `fit` and `analyze`.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data or model
//! errors, which are reported on stderr as one line `error: <cause>: <detail>`.

mod config;
mod pipeline;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

pub use config::{CloudUnitName, RunConfig};
pub use pipeline::{
    analysis_span, load_calendar, load_inputs, run_analysis, run_fit, summary_range, Analysis, FitRun, Inputs,
};

use crate::ingest::{write_consumption, write_weather, ConsumerClass};
use crate::output::{write_difference_csv, write_report_csv, write_summary_csv, OutputDir, SummaryRow};
use crate::plot::{BarChart, LineChart, LineStyle};
use crate::regress::Solver;
use crate::residuals::{moving_average, period_summary, year_difference, DEFAULT_MOVING_AVERAGE};
use crate::solar::UtcOffsetRule;
use crate::synth::{generate_consumption, generate_weather, scenario_features, to_records, ScenarioFile};
use crate::{DateSpan, Error};

/// A failed command: exit status, machine-readable cause and detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub exit_code: i32,
    pub cause: String,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            exit_code: 1,
            cause: "usage".into(),
            message: message.into(),
        }
    }

    pub fn data(cause: impl Into<String>, message: impl Into<String>) -> Self {
        Failure {
            exit_code: 2,
            cause: cause.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: {}: {}", self.cause, self.message.replace('\n', " "))
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::data(e.kind(), e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "demand-decomp", version, about = "Explainable decomposition of daily electricity consumption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model on the training window and report its coefficients.
    Fit(RunArgs),
    /// Fit, extrapolate and write normalized residuals with a plot.
    Analyze(RunArgs),
    /// Year-over-year difference of two analyses (`--config A --config B`).
    Compare(RunArgs),
    /// Mean residual per region and class over a date range.
    Summary(RunArgs),
    /// Generate synthetic weather and consumption from a scenario file.
    Synth(RunArgs),
}

/// Flags shared by all subcommands. Each overrides the config key of the
/// same name.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file; repeat for `compare` (exactly two) and `summary`.
    #[arg(long)]
    pub config: Vec<PathBuf>,
    /// Hourly weather CSV.
    #[arg(long)]
    pub weather: Option<PathBuf>,
    /// Daily consumption CSV.
    #[arg(long)]
    pub consumption: Option<PathBuf>,
    /// Region to select; all regions are summed when omitted.
    #[arg(long)]
    pub region: Option<String>,
    /// Consumer class to select; both are summed when omitted.
    #[arg(long)]
    pub class: Option<ConsumerClass>,
    #[arg(long)]
    pub train_start: Option<NaiveDate>,
    #[arg(long)]
    pub train_days: Option<usize>,
    /// Date from which the normalization denominator is frozen.
    #[arg(long)]
    pub onset: Option<NaiveDate>,
    /// Days used to estimate the post-onset scale factor, `START..END` or
    /// `START+DAYS`.
    #[arg(long)]
    pub scale_window: Option<DateSpan>,
    /// Last day to analyze.
    #[arg(long)]
    pub end: Option<NaiveDate>,
    /// Holiday calendar (TOML).
    #[arg(long)]
    pub holidays: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the feature matrix.
    #[arg(long)]
    pub dump_features: bool,
    /// Seed for `synth`, replacing the scenario's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Range averaged by `summary`.
    #[arg(long)]
    pub summary_range: Option<DateSpan>,
    #[arg(long, value_enum)]
    pub cloud_unit: Option<CloudUnitName>,
    #[arg(long)]
    pub max_gap_hours: Option<usize>,
    #[arg(long)]
    pub reference_temperature: Option<f64>,
    #[arg(long)]
    pub cloud_attenuation: Option<f64>,
    /// Replace isolated consumption spikes before fitting.
    #[arg(long)]
    pub repair_outliers: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub latitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub longitude: Option<f64>,
    /// `UTC`, `+02:00`, `eu:+02:00` or a zone such as `Europe/Tallinn`.
    #[arg(long)]
    pub utc_offset: Option<UtcOffsetRule>,
}

impl RunArgs {
    /// One config per `--config` file (or a single flag-only config), with
    /// flags applied on top.
    pub fn configs(&self) -> Result<Vec<RunConfig>, Failure> {
        let mut configs = if self.config.is_empty() {
            vec![RunConfig::default()]
        } else {
            self.config.iter().map(|p| RunConfig::load(p)).collect::<Result<_, _>>()?
        };
        for c in &mut configs {
            c.apply(self);
        }
        Ok(configs)
    }

    fn single_config(&self) -> Result<RunConfig, Failure> {
        let mut configs = self.configs()?;
        if configs.len() != 1 {
            return Err(Failure::usage(format!("expected one --config, got {}", configs.len())));
        }
        Ok(configs.remove(0))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Errors are printed to stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code
        }
    }
}

pub fn run(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Fit(args) => cmd_fit(&args.single_config()?).map(drop),
        Command::Analyze(args) => cmd_analyze(&args.single_config()?).map(drop),
        Command::Compare(args) => {
            let configs = args.configs()?;
            match configs.as_slice() {
                [a, b] => cmd_compare(a, b).map(drop),
                _ => Err(Failure::usage(format!("compare needs two --config files, got {}", configs.len()))),
            }
        }
        Command::Summary(args) => {
            if args.config.is_empty() {
                return Err(Failure::data("parameter", "summary needs at least one --config"));
            }
            cmd_summary(&args.configs()?).map(drop)
        }
        Command::Synth(args) => {
            let path = match args.config.as_slice() {
                [p] => p,
                _ => return Err(Failure::usage("synth needs one --config scenario file")),
            };
            let mut scenario = ScenarioFile::load(path).map_err(|e| match e {
                Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                    Failure::data("config-file-not-found", path.display().to_string())
                }
                e => e.into(),
            })?;
            if let Some(seed) = args.seed {
                scenario.seed = seed;
            }
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            cmd_synth(&scenario, &out).map(drop)
        }
    }
}

fn fmt_f64(v: f64) -> String {
    v.to_string()
}

fn solver_name(s: Solver) -> &'static str {
    match s {
        Solver::Cholesky => "cholesky",
        Solver::PivotedLu => "pivoted-lu",
    }
}

fn fit_report(run: &FitRun) -> Result<Vec<(&'static str, String)>, Failure> {
    let rho = run.training_residuals()?.normalized;
    let mean_abs = rho.iter().map(|r| r.abs()).sum::<f64>() / rho.len() as f64;
    let max_abs = rho.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(vec![
        ("series", run.inputs.consumption.label()),
        ("training_start", run.fit.training.start.to_string()),
        ("training_end", run.fit.training.end.to_string()),
        ("training_days", run.fit.training.len().to_string()),
        ("gram_condition", fmt_f64(run.fit.gram_condition)),
        ("solver", solver_name(run.fit.solver).to_string()),
        ("training_mean_abs_rho", fmt_f64(mean_abs)),
        ("training_max_abs_rho", fmt_f64(max_abs)),
        ("outliers_repaired", run.inputs.repairs.len().to_string()),
    ])
}

fn write_fit_files(out: &OutputDir, cfg: &RunConfig, run: &FitRun, extra: &[(&'static str, String)]) -> Result<Vec<PathBuf>, Failure> {
    let mut report = fit_report(run)?;
    report.extend_from_slice(extra);
    let mut files = vec![
        out.write("coefficients.csv", |w| run.fit.write_csv(w))?,
        out.write("fit_report.csv", |w| write_report_csv(w, &report))?,
    ];
    if cfg.dump_features {
        files.push(out.write("features.csv", |w| run.features.write_csv(w))?);
    }
    Ok(files)
}

/// Fits the model and writes the coefficient table and fit report.
pub fn cmd_fit(cfg: &RunConfig) -> Result<Vec<PathBuf>, Failure> {
    let run = run_fit(cfg)?;
    let out = OutputDir::create(&cfg.out)?;
    write_fit_files(&out, cfg, &run, &[])
}

/// Fits, extrapolates, optionally rescales, and writes residuals and a plot.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>, Failure> {
    let analysis = run_analysis(cfg)?;
    let out = OutputDir::create(&cfg.out)?;
    let mut extra = vec![
        ("analysis_start", analysis.residuals.span().start.to_string()),
        ("analysis_end", analysis.residuals.span().end.to_string()),
        ("onset", cfg.onset.map(|d| d.to_string()).unwrap_or_default()),
        ("scale_factor", analysis.scale_factor.map(fmt_f64).unwrap_or_default()),
    ];
    if let Some(m) = analysis.post_onset_mean() {
        extra.push(("post_onset_mean_rho", fmt_f64(m)));
    }
    let mut files = write_fit_files(&out, cfg, &analysis.run, &extra)?;
    files.push(out.write("residuals.csv", |w| analysis.residuals.write_csv(w))?);
    files.push(out.write_str("residuals.svg", &residual_chart(&analysis).to_svg())?);
    Ok(files)
}

fn residual_chart(analysis: &Analysis) -> LineChart {
    let rho = &analysis.residuals.normalized;
    let smoothed = moving_average(rho, DEFAULT_MOVING_AVERAGE).expect("odd window");
    let mut chart = LineChart::new(
        format!("Residual demand, {}", analysis.consumption().label()),
        analysis.residuals.start_date,
    )
    .line("residual", rho.clone(), LineStyle::Thin)
    .line("7-day mean", smoothed, LineStyle::Solid);
    if let Some(onset) = analysis.residuals.onset {
        chart = chart.marker(onset, format!("onset {onset}"));
    }
    chart
}

/// `ρ_A − ρ_B` by calendar day, with its 7-day moving average.
pub fn cmd_compare(a: &RunConfig, b: &RunConfig) -> Result<Vec<PathBuf>, Failure> {
    let calendar = load_calendar(if a.holidays.is_some() { a } else { b })?;
    let (ra, rb) = (run_analysis(a)?, run_analysis(b)?);
    let slots = year_difference(&ra.residuals, &rb.residuals, &calendar)?;
    if slots.is_empty() {
        return Err(Failure::data(
            "parameter",
            format!(
                "analyzed spans {} and {} share no calendar days",
                ra.residuals.span(),
                rb.residuals.span()
            ),
        ));
    }
    let diffs: Vec<f64> = slots.iter().map(|s| s.diff).collect();
    let smoothed = moving_average(&diffs, DEFAULT_MOVING_AVERAGE)?;
    let out = OutputDir::create(&a.out)?;
    let mut files = vec![out.write("difference.csv", |w| write_difference_csv(w, &slots, &smoothed))?];

    let (ya, yb) = (ra.residuals.start_date, rb.residuals.start_date);
    let first = &slots[0];
    let start = NaiveDate::from_ymd_opt(2000, first.month, first.day).expect("valid month-day");
    let mut chart = LineChart::new(
        format!(
            "Residual difference {} {} minus {}",
            ra.consumption().label(),
            chrono::Datelike::year(&ya),
            chrono::Datelike::year(&yb)
        ),
        start,
    )
    .line("difference", diffs, LineStyle::Thin)
    .line("7-day mean", smoothed, LineStyle::Solid);
    if let Some(onset) = ra.residuals.onset {
        let (m, d) = (chrono::Datelike::month(&onset), chrono::Datelike::day(&onset));
        if let Some(marker) = NaiveDate::from_ymd_opt(2000, m, d) {
            chart = chart.marker(marker, format!("onset {onset}"));
        }
    }
    files.push(out.write_str("difference.svg", &chart.to_svg())?);
    Ok(files)
}

/// Mean `ρ` of every configured series over its summary range.
///
/// Predictions are not rescaled here: the mean residual is the change in
/// consumption that the summary reports.
pub fn cmd_summary(configs: &[RunConfig]) -> Result<Vec<PathBuf>, Failure> {
    if configs.is_empty() {
        return Err(Failure::data("parameter", "no series to summarize"));
    }
    let mut rows = Vec::new();
    for cfg in configs {
        let cfg = &RunConfig {
            scale_window: None,
            ..cfg.clone()
        };
        let analysis = run_analysis(cfg)?;
        let range = summary_range(cfg, &analysis);
        rows.push(SummaryRow {
            region: analysis.consumption().region.clone(),
            class: analysis.consumption().consumer_class,
            mean_rho: period_summary(&analysis.residuals, &range)?,
            days: range.len(),
        });
    }
    let mut groups: Vec<(String, Vec<(String, f64)>)> = Vec::new();
    for r in &rows {
        let member = r.class.map_or_else(|| "all".to_string(), |c| c.to_string());
        match groups.iter_mut().find(|(g, _)| *g == r.region) {
            Some((_, bars)) => bars.push((member, r.mean_rho)),
            None => groups.push((r.region.clone(), vec![(member, r.mean_rho)])),
        }
    }
    let chart = BarChart {
        title: "Mean residual demand".into(),
        groups,
        percent: true,
    };
    let out = OutputDir::create(&configs[0].out)?;
    Ok(vec![
        out.write("summary.csv", |w| write_summary_csv(w, &rows))?,
        out.write_str("summary.svg", &chart.to_svg())?,
    ])
}

/// Writes `weather.csv` and `consumption.csv` for every series of a scenario.
pub fn cmd_synth(scenario: &ScenarioFile, out: &std::path::Path) -> Result<Vec<PathBuf>, Failure> {
    let specs = scenario.specs();
    for s in &specs {
        s.validate()?;
    }
    let weather = generate_weather(&specs[0]);
    let mut records = Vec::new();
    for spec in &specs {
        let features = scenario_features(spec, &Default::default())?;
        records.extend(to_records(&generate_consumption(spec, &features)?));
    }
    records.sort_by(|a, b| (a.date, &a.region, a.consumer_class).cmp(&(b.date, &b.region, b.consumer_class)));
    let out = OutputDir::create(out)?;
    Ok(vec![
        out.write("weather.csv", |w| write_weather(w, &weather))?,
        out.write("consumption.csv", |w| write_consumption(w, &records))?,
    ])
}
