use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use super::{Failure, RunArgs};
use crate::features::{FeatureConfig, DEFAULT_REFERENCE_TEMPERATURE};
use crate::ingest::{CloudUnit, ConsumerClass, Selection, DEFAULT_MAX_GAP_HOURS};
use crate::regress::{DEFAULT_MAX_CONDITION, DEFAULT_TRAINING_DAYS};
use crate::solar::{Site, DEFAULT_CLOUD_ATTENUATION};
use crate::DateSpan;

/// Settings of one analysis run.
///
/// Read from a TOML file whose keys match the command-line flags, e.g.
///
/// ```toml
/// weather = "weather.csv"
/// consumption = "consumption.csv"
/// region = "Harju"
/// class = "business"
/// train-start = 2020-01-01
/// train-days = 30
/// onset = 2020-03-12
/// scale-window = "2020-03-12..2020-03-25"
/// holidays = "holidays.toml"
/// out = "out/2020"
///
/// [site]
/// latitude = 59.41
/// longitude = 24.83
/// utc_offset = "Europe/Tallinn"
/// ```
///
/// Relative paths in the file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "Site::tallinn")]
    pub site: Site,
    pub weather: Option<PathBuf>,
    pub consumption: Option<PathBuf>,
    #[serde(default)]
    pub cloud_unit: CloudUnitName,
    #[serde(default = "default_max_gap")]
    pub max_gap_hours: usize,
    pub region: Option<String>,
    pub class: Option<ConsumerClass>,
    #[serde(default, deserialize_with = "crate::span::toml_date::option::deserialize")]
    pub train_start: Option<NaiveDate>,
    #[serde(default = "default_train_days")]
    pub train_days: usize,
    #[serde(default, deserialize_with = "crate::span::toml_date::option::deserialize")]
    pub onset: Option<NaiveDate>,
    pub scale_window: Option<DateSpan>,
    /// Last analyzed day; defaults to the end of the available data.
    #[serde(default, deserialize_with = "crate::span::toml_date::option::deserialize")]
    pub end: Option<NaiveDate>,
    pub holidays: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub dump_features: bool,
    #[serde(default = "default_reference_temperature")]
    pub reference_temperature: f64,
    #[serde(default = "default_cloud_attenuation")]
    pub cloud_attenuation: f64,
    #[serde(default = "default_max_condition")]
    pub max_condition: f64,
    /// Replace isolated consumption spikes before fitting.
    #[serde(default)]
    pub repair_outliers: bool,
    #[serde(default = "default_outlier_window")]
    pub outlier_window: usize,
    #[serde(default = "default_outlier_threshold")]
    pub outlier_threshold: f64,
    /// Range averaged by `summary`; defaults to onset through the last day.
    pub summary_range: Option<DateSpan>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CloudUnitName {
    #[default]
    Fraction,
    Oktas,
}

impl From<CloudUnitName> for CloudUnit {
    fn from(u: CloudUnitName) -> Self {
        match u {
            CloudUnitName::Fraction => CloudUnit::Fraction,
            CloudUnitName::Oktas => CloudUnit::Oktas,
        }
    }
}

fn default_max_gap() -> usize {
    DEFAULT_MAX_GAP_HOURS
}
fn default_train_days() -> usize {
    DEFAULT_TRAINING_DAYS
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_reference_temperature() -> f64 {
    DEFAULT_REFERENCE_TEMPERATURE
}
fn default_cloud_attenuation() -> f64 {
    DEFAULT_CLOUD_ATTENUATION
}
fn default_max_condition() -> f64 {
    DEFAULT_MAX_CONDITION
}
fn default_outlier_window() -> usize {
    14
}
fn default_outlier_threshold() -> f64 {
    5.0
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::data("config", e.to_string().trim().replace('\n', " ")))
    }

    /// Loads a config file, resolving its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Failure::data("config-file-not-found", path.display().to_string())
            } else {
                Failure::data("io", format!("{}: {e}", path.display()))
            }
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|f| Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.weather, &mut cfg.consumption, &mut cfg.holidays]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }

    /// Replaces every value given on the command line.
    pub fn apply(&mut self, args: &RunArgs) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &args.$field { self.$field = Some(v.clone()); })*
            };
        }
        set!(weather, consumption, region, class, train_start, onset, scale_window, end, holidays, summary_range);
        if let Some(v) = args.train_days {
            self.train_days = v;
        }
        if let Some(v) = &args.out {
            self.out = v.clone();
        }
        if args.dump_features {
            self.dump_features = true;
        }
        if let Some(v) = args.cloud_unit {
            self.cloud_unit = v;
        }
        if let Some(v) = args.max_gap_hours {
            self.max_gap_hours = v;
        }
        if let Some(v) = args.reference_temperature {
            self.reference_temperature = v;
        }
        if let Some(v) = args.cloud_attenuation {
            self.cloud_attenuation = v;
        }
        if args.repair_outliers {
            self.repair_outliers = true;
        }
        if let Some(v) = args.latitude {
            self.site.latitude = v;
        }
        if let Some(v) = args.longitude {
            self.site.longitude = v;
        }
        if let Some(v) = args.utc_offset {
            self.site.offset_rule = v;
        }
    }

    pub fn selection(&self) -> Selection {
        Selection {
            region: self.region.clone(),
            class: self.class,
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            reference_temperature: self.reference_temperature,
            cloud_attenuation: self.cloud_attenuation,
        }
    }

    pub fn weather_path(&self) -> Result<&Path, Failure> {
        self.weather
            .as_deref()
            .ok_or_else(|| Failure::usage("no weather file given (--weather)"))
    }

    pub fn consumption_path(&self) -> Result<&Path, Failure> {
        self.consumption
            .as_deref()
            .ok_or_else(|| Failure::usage("no consumption file given (--consumption)"))
    }

    pub fn training_window(&self) -> Result<DateSpan, Failure> {
        let start = self
            .train_start
            .ok_or_else(|| Failure::usage("no training start given (--train-start)"))?;
        if self.train_days == 0 {
            return Err(Failure::usage("--train-days must be positive"));
        }
        Ok(DateSpan::with_len(start, self.train_days))
    }

    /// Checks cross-field constraints and that every referenced file exists.
    pub fn validate(&self) -> Result<(), Failure> {
        let training = self.training_window()?;
        if let Some(onset) = self.onset {
            if onset <= training.end {
                return Err(Failure::data(
                    "parameter",
                    format!("onset {onset} does not follow the training window {training}"),
                ));
            }
        }
        if let Some(end) = self.end {
            if end < training.end {
                return Err(Failure::data(
                    "parameter",
                    format!("end {end} precedes the end of the training window {training}"),
                ));
            }
        }
        self.site.validate()?;
        let files = [
            ("weather-file-not-found", Some(self.weather_path()?)),
            ("consumption-file-not-found", Some(self.consumption_path()?)),
            ("holidays-file-not-found", self.holidays.as_deref()),
        ];
        for (cause, path) in files {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Failure::data(cause, p.display().to_string()));
                }
            }
        }
        Ok(())
    }

    /// First day from which predictions are rescaled.
    pub fn rescale_from(&self) -> Option<NaiveDate> {
        self.scale_window.map(|w| self.onset.unwrap_or(w.start))
    }
}
