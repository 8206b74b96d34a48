use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use chrono::{Days, NaiveDate};
use log::{info, warn};

use super::{Failure, RunConfig};
use crate::features::{build_features_for_site, FeatureMatrix};
use crate::ingest::{
    aggregate, daily_weather, fill_weather_gaps, parse_consumption, parse_weather, repair_consumption_outliers,
    ConsumptionSeries, DailyWeather, OutlierRepair, WeatherFormat,
};
use crate::regress::{estimate_scale, fit_with, predict, raw_residuals, FitOptions, Prediction, RegressionFit};
use crate::residuals::{normalize, HolidayCalendar, ResidualSeries};
use crate::DateSpan;

/// Weather and consumption loaded for one configuration.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub weather: Vec<DailyWeather>,
    pub consumption: ConsumptionSeries,
    pub repairs: Vec<OutlierRepair>,
}

fn open(path: &Path, missing_cause: &'static str) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Failure::data(missing_cause, path.display().to_string())
        } else {
            Failure::data("io", format!("{}: {e}", path.display()))
        }
    })
}

fn in_file(path: &Path) -> impl Fn(crate::Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        }
    }
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs, Failure> {
    cfg.validate()?;
    let weather_path = cfg.weather_path()?;
    let format = WeatherFormat {
        cloud_unit: cfg.cloud_unit.into(),
    };
    let samples = parse_weather(open(weather_path, "weather-file-not-found")?, format).map_err(in_file(weather_path))?;
    let filled = fill_weather_gaps(&samples, cfg.max_gap_hours).map_err(in_file(weather_path))?;
    let synthetic = filled.iter().filter(|s| s.synthetic).count();
    if synthetic > 0 {
        info!("{synthetic} hourly weather samples filled by interpolation");
    }
    let weather = daily_weather(&filled).map_err(in_file(weather_path))?;

    let consumption_path = cfg.consumption_path()?;
    let records =
        parse_consumption(open(consumption_path, "consumption-file-not-found")?).map_err(in_file(consumption_path))?;
    let mut consumption = aggregate(&records, &cfg.selection()).map_err(in_file(consumption_path))?;
    let mut repairs = Vec::new();
    if cfg.repair_outliers {
        let (repaired, log) = repair_consumption_outliers(&consumption, cfg.outlier_window, cfg.outlier_threshold)?;
        for r in &log {
            warn!("{}: replaced outlier {} kWh on {} by {}", consumption.label(), r.old, r.date, r.new);
        }
        consumption = repaired;
        repairs = log;
    }
    Ok(Inputs {
        weather,
        consumption,
        repairs,
    })
}

/// Days from the training start to `cfg.end`, or to the last day covered by
/// both weather and consumption.
pub fn analysis_span(cfg: &RunConfig, inputs: &Inputs) -> Result<DateSpan, Failure> {
    let training = cfg.training_window()?;
    let end = match cfg.end {
        Some(end) => end,
        None => {
            let weather_end = inputs.weather.last().map(|w| w.date).unwrap_or(NaiveDate::MIN);
            weather_end.min(inputs.consumption.span().end)
        }
    };
    if end < training.end {
        return Err(Failure::data(
            "coverage",
            format!("data end {end} precedes the end of the training window {training}"),
        ));
    }
    Ok(DateSpan::new(training.start, end))
}

/// A fitted model with its inputs.
#[derive(Debug, Clone)]
pub struct FitRun {
    pub inputs: Inputs,
    pub span: DateSpan,
    pub features: FeatureMatrix,
    pub fit: RegressionFit,
}

impl FitRun {
    /// `ρ` over the training window, normalized by the centered local mean.
    pub fn training_residuals(&self) -> Result<ResidualSeries, Failure> {
        let prediction = predict(&self.fit, &self.features, &self.fit.training, 1.0)?;
        let raw = raw_residuals(&self.inputs.consumption, &prediction)?;
        Ok(normalize(self.fit.training.start, &raw, &self.inputs.consumption, None)?)
    }
}

pub fn run_fit(cfg: &RunConfig) -> Result<FitRun, Failure> {
    let inputs = load_inputs(cfg)?;
    let span = analysis_span(cfg, &inputs)?;
    let features = build_features_for_site(&span, &inputs.weather, &cfg.site, &cfg.feature_config())?;
    let options = FitOptions {
        max_condition: cfg.max_condition,
    };
    let fit = fit_with(&features, &inputs.consumption, &cfg.training_window()?, &options)?;
    for w in &fit.warnings {
        warn!("{}: {w}", inputs.consumption.label());
    }
    Ok(FitRun {
        inputs,
        span,
        features,
        fit,
    })
}

/// Residual analysis of one configuration.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub run: FitRun,
    /// Unscaled prediction over the analysis span.
    pub prediction: Prediction,
    /// Factor applied to predictions from `rescale_from` on.
    pub scale_factor: Option<f64>,
    pub rescale_from: Option<NaiveDate>,
    pub residuals: ResidualSeries,
}

impl Analysis {
    pub fn consumption(&self) -> &ConsumptionSeries {
        &self.run.inputs.consumption
    }

    /// Mean `ρ` from the onset to the end of the analysis.
    pub fn post_onset_mean(&self) -> Option<f64> {
        let onset = self.residuals.onset?;
        let span = DateSpan::new(onset, self.residuals.span().end);
        let rho = self.residuals.rho_slice(&span)?;
        Some(rho.iter().sum::<f64>() / rho.len() as f64)
    }
}

pub fn run_analysis(cfg: &RunConfig) -> Result<Analysis, Failure> {
    let run = run_fit(cfg)?;
    if let Some(onset) = cfg.onset {
        if !run.span.contains(onset) {
            return Err(Failure::data(
                "parameter",
                format!("onset {onset} outside the analyzed days {}", run.span),
            ));
        }
    }
    let prediction = predict(&run.fit, &run.features, &run.span, 1.0)?;
    let mut adjusted = prediction.clone();
    let (scale_factor, rescale_from) = match cfg.scale_window {
        Some(window) => {
            let s = estimate_scale(&run.fit, &run.features, &run.inputs.consumption, &window)?;
            let from = cfg.rescale_from().expect("scale window set");
            info!("{}: scale factor {s} from {from}", run.inputs.consumption.label());
            for (i, date) in run.span.dates().enumerate() {
                if date >= from {
                    adjusted.predicted[i] *= s;
                }
            }
            (Some(s), Some(from))
        }
        None => (None, None),
    };
    let raw = raw_residuals(&run.inputs.consumption, &adjusted)?;
    let residuals = normalize(run.span.start, &raw, &run.inputs.consumption, cfg.onset)?;
    Ok(Analysis {
        run,
        prediction,
        scale_factor,
        rescale_from,
        residuals,
    })
}

pub fn load_calendar(cfg: &RunConfig) -> Result<HolidayCalendar, Failure> {
    match &cfg.holidays {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                if e.kind() == std::io::ErrorKind::NotFound {
                    Failure::data("holidays-file-not-found", path.display().to_string())
                } else {
                    Failure::data("io", format!("{}: {e}", path.display()))
                }
            })?;
            HolidayCalendar::from_toml(&text).map_err(in_file(path))
        }
        None => Ok(HolidayCalendar::default()),
    }
}

/// Default summary range: onset (or the day after training) to the last day.
pub fn summary_range(cfg: &RunConfig, analysis: &Analysis) -> DateSpan {
    cfg.summary_range.unwrap_or_else(|| {
        let end = analysis.residuals.span().end;
        let start = cfg
            .onset
            .unwrap_or_else(|| (analysis.run.fit.training.end + Days::new(1)).min(end));
        DateSpan::new(start, end)
    })
}
