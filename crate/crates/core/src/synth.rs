//! Seeded synthetic scenarios with known ground truth.
//!
//! Weather is a seasonal temperature cycle with persistent daily anomalies and
//! a diurnal swing, autocorrelated wind, and cloud cover that drifts from day
//! to day. Consumption is generated from the model itself with known
//! coefficients, multiplicative noise, and optional interventions (a level
//! step plus damping of the weekly cycle), so every downstream estimate can be
//! checked against the truth.

use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::features::{build_features_for_site, FeatureConfig, FeatureMatrix, N_FACTORS};
use crate::ingest::{daily_weather, ConsumerClass, ConsumptionRecord, ConsumptionSeries, WeatherSample};
use crate::solar::Site;
use crate::{DateSpan, Error, Result};

/// Business-like ground truth: Monday … Sunday base load, then kWh per °C of
/// thermal load, per effective daylight hour, and per unit of wind loss.
pub const DEFAULT_COEFFICIENTS: [f64; N_FACTORS] =
    [1000.0, 1040.0, 1050.0, 1045.0, 1010.0, 720.0, 640.0, 18.0, -22.0, 0.5];

/// A change in behaviour from `start` onwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    #[serde(with = "crate::span::toml_date_rw")]
    pub start: NaiveDate,
    /// Multiplies all consumption; > 0.
    pub step: f64,
    /// Shrinks the weekday coefficients toward their mean; in (0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weekly_damping: Option<f64>,
}

/// Parameters of the synthetic climate.
///
/// By default daily temperature anomalies and cloud cover are independent
/// from day to day while wind anomalies are autocorrelated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Climate {
    /// Annual mean temperature, °C.
    pub mean_temperature: f64,
    /// Half the summer–winter difference of daily means, °C.
    pub seasonal_amplitude: f64,
    /// Day of year with the coldest seasonal mean.
    pub coldest_day: f64,
    /// Standard deviation of the daily temperature anomaly, °C.
    pub anomaly_sd: f64,
    /// Day-to-day autocorrelation of the temperature anomaly.
    pub temperature_persistence: f64,
    /// Half the day–night temperature swing, °C.
    pub diurnal_amplitude: f64,
    /// Typical wind speed, m/s.
    pub mean_wind: f64,
    pub wind_sd: f64,
    /// Day-to-day autocorrelation of the wind anomaly.
    pub wind_persistence: f64,
    /// Mean cloud fraction.
    pub mean_cloud: f64,
    /// Standard deviation of the daily cloud anomaly on the logit scale.
    pub cloud_spread: f64,
    /// Day-to-day autocorrelation of the cloud anomaly.
    pub cloud_persistence: f64,
    /// Multiplies every random component; 0 gives smooth seasonal curves.
    pub variability: f64,
}

impl Default for Climate {
    fn default() -> Self {
        Climate {
            mean_temperature: 6.0,
            seasonal_amplitude: 11.0,
            coldest_day: 20.0,
            anomaly_sd: 4.0,
            temperature_persistence: 0.0,
            diurnal_amplitude: 3.0,
            mean_wind: 4.5,
            wind_sd: 2.0,
            wind_persistence: 0.6,
            mean_cloud: 0.6,
            cloud_spread: 1.5,
            cloud_persistence: 0.0,
            variability: 1.0,
        }
    }
}

/// One synthetic consumption series and the weather that drives it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub site: Site,
    pub span: DateSpan,
    pub region: String,
    pub class: ConsumerClass,
    pub true_coefficients: [f64; N_FACTORS],
    /// Standard deviation of multiplicative noise, as a fraction.
    pub noise_sigma: f64,
    pub interventions: Vec<Intervention>,
    pub seed: u64,
    pub climate: Climate,
}

impl ScenarioSpec {
    /// Tallinn, default climate and coefficients, no noise or interventions.
    pub fn new(span: DateSpan, seed: u64) -> Self {
        ScenarioSpec {
            site: Site::tallinn(),
            span,
            region: "Synthetic".into(),
            class: ConsumerClass::Business,
            true_coefficients: DEFAULT_COEFFICIENTS,
            noise_sigma: 0.0,
            interventions: Vec::new(),
            seed,
            climate: Climate::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Parameter(format!("noise_sigma {} must be ≥ 0", self.noise_sigma)));
        }
        for i in &self.interventions {
            if !(i.step > 0.0 && i.step.is_finite()) {
                return Err(Error::Parameter(format!("intervention step {} must be > 0", i.step)));
            }
            if let Some(d) = i.weekly_damping {
                if !(d > 0.0 && d <= 1.0) {
                    return Err(Error::Parameter(format!("weekly damping {d} outside (0, 1]")));
                }
            }
        }
        if self.true_coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter("true coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Combined step factor and weekly damping active on `date`.
    pub fn intervention_at(&self, date: NaiveDate) -> (f64, f64) {
        self.interventions
            .iter()
            .filter(|i| i.start <= date)
            .fold((1.0, 1.0), |(m, d), i| (m * i.step, d * i.weekly_damping.unwrap_or(1.0)))
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn consumption_stream(&self) -> u64 {
        // FNV-1a over the series identity keeps streams distinct per series.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.region.bytes().chain(self.class.to_string().bytes()) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h | 1
    }
}

fn standard_normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Hourly weather over the scenario span, local time, no gaps.
pub fn generate_weather(spec: &ScenarioSpec) -> Vec<WeatherSample> {
    let c = &spec.climate;
    let v = c.variability;
    let mut rng = spec.rng(0);
    let z = standard_normal();
    // AR(1) step with unit stationary variance.
    let ar = |persistence: f64| {
        let rho = persistence.clamp(0.0, 0.99);
        move |prev: f64, draw: f64| rho * prev + (1.0 - rho * rho).sqrt() * draw
    };
    let (temp_step, wind_step, cloud_step) =
        (ar(c.temperature_persistence), ar(c.wind_persistence), ar(c.cloud_persistence));

    let (mut temp_anom, mut wind_anom, mut cloud_anom) = (0.0, 0.0, 0.0);
    let mut samples = Vec::with_capacity(spec.span.len() * 24);
    for (k, date) in spec.span.dates().enumerate() {
        let (t_draw, w_draw, c_draw): (f64, f64, f64) = (z.sample(&mut rng), z.sample(&mut rng), z.sample(&mut rng));
        if k == 0 {
            (temp_anom, wind_anom, cloud_anom) = (t_draw, w_draw, c_draw);
        } else {
            temp_anom = temp_step(temp_anom, t_draw);
            wind_anom = wind_step(wind_anom, w_draw);
            cloud_anom = cloud_step(cloud_anom, c_draw);
        }
        let doy = date.ordinal0() as f64;
        let seasonal = c.mean_temperature - c.seasonal_amplitude * (2.0 * PI * (doy - c.coldest_day) / 365.25).cos();
        let day_temp = seasonal + v * c.anomaly_sd * temp_anom;
        let day_wind = (c.mean_wind + v * c.wind_sd * wind_anom).max(0.3);
        let logit = (c.mean_cloud / (1.0 - c.mean_cloud)).ln() + v * c.cloud_spread * cloud_anom;
        let day_cloud = 1.0 / (1.0 + (-logit).exp());

        for h in 0..24 {
            let diurnal = -c.diurnal_amplitude * (2.0 * PI * (h as f64 - 3.0) / 24.0).cos();
            let (dt, dw, dc): (f64, f64, f64) = (z.sample(&mut rng), z.sample(&mut rng), rng.random::<f64>() - 0.5);
            let temperature = day_temp + diurnal + v * 0.3 * dt;
            let wind = (day_wind * (1.0 + v * 0.2 * dw)).max(0.0);
            let cloud = (day_cloud + v * 0.3 * dc).clamp(0.0, 1.0);
            samples.push(WeatherSample::new(
                date.and_time(NaiveTime::MIN) + Duration::hours(h),
                temperature,
                wind,
                cloud,
            ));
        }
    }
    samples
}

/// Feature matrix of the scenario's own weather.
pub fn scenario_features(spec: &ScenarioSpec, config: &FeatureConfig) -> Result<FeatureMatrix> {
    let daily = daily_weather(&generate_weather(spec))?;
    build_features_for_site(&spec.span, &daily, &spec.site, config)
}

/// Consumption `mᵢ · Σ α*ᵢ fᵢ · (1 + εᵢ)` over the scenario span.
///
/// `mᵢ` is the product of active intervention steps; active weekly damping
/// pulls the seven weekday coefficients toward their mean. `εᵢ` is normal with
/// standard deviation `noise_sigma`.
pub fn generate_consumption(spec: &ScenarioSpec, features: &FeatureMatrix) -> Result<ConsumptionSeries> {
    spec.validate()?;
    let rows = features.slice(&spec.span)?;
    let alpha = &spec.true_coefficients;
    let weekday_mean = alpha[..7].iter().sum::<f64>() / 7.0;
    let mut rng = spec.rng(spec.consumption_stream());
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Parameter(e.to_string()))?;

    let mut values = Vec::with_capacity(rows.len());
    for (date, row) in spec.span.dates().zip(rows) {
        let (step, damping) = spec.intervention_at(date);
        let mut a = *alpha;
        for coef in &mut a[..7] {
            *coef = weekday_mean + damping * (*coef - weekday_mean);
        }
        let clean: f64 = a.iter().zip(row).map(|(a, f)| a * f).sum();
        let eps = noise.sample(&mut rng);
        let value = step * clean * (1.0 + eps);
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::Generation(format!("consumption {value} on {date}")));
        }
        values.push(value);
    }
    Ok(ConsumptionSeries {
        region: spec.region.clone(),
        consumer_class: Some(spec.class),
        start_date: spec.span.start,
        values,
    })
}

/// Series as consumption CSV records.
pub fn to_records(series: &ConsumptionSeries) -> Vec<ConsumptionRecord> {
    let class = series.consumer_class.unwrap_or(ConsumerClass::Business);
    series
        .span()
        .dates()
        .zip(&series.values)
        .map(|(date, &energy)| ConsumptionRecord {
            date,
            region: series.region.clone(),
            consumer_class: class,
            energy,
        })
        .collect()
}

/// One consumption series entry of a [`ScenarioFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub region: String,
    pub class: ConsumerClass,
    #[serde(default = "default_coefficients")]
    pub coefficients: [f64; N_FACTORS],
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
}

fn default_coefficients() -> [f64; N_FACTORS] {
    DEFAULT_COEFFICIENTS
}

/// Scenario description file: shared site, span, seed and climate, plus one
/// or more consumption series.
///
/// ```toml
/// seed = 42
/// span = "2019-01-01..2019-07-31"
///
/// [site]
/// latitude = 59.41
/// longitude = 24.83
/// utc_offset = "Europe/Tallinn"
///
/// [[series]]
/// region = "Harju"
/// class = "business"
/// noise_sigma = 0.01
/// interventions = [{ start = "2019-03-12", step = 0.8, weekly_damping = 0.8 }]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub seed: u64,
    pub span: DateSpan,
    pub site: Site,
    #[serde(default)]
    pub climate: Climate,
    pub series: Vec<SeriesEntry>,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text)
            .map_err(|e| Error::Parameter(format!("scenario: {}", e.to_string().trim().replace('\n', " "))))?;
        if file.series.is_empty() {
            return Err(Error::Parameter("scenario has no series".into()));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// One spec per series; all share the seed and therefore the weather.
    pub fn specs(&self) -> Vec<ScenarioSpec> {
        self.series
            .iter()
            .map(|s| ScenarioSpec {
                site: self.site,
                span: self.span,
                region: s.region.clone(),
                class: s.class,
                true_coefficients: s.coefficients,
                noise_sigma: s.noise_sigma,
                interventions: s.interventions.clone(),
                seed: self.seed,
                climate: self.climate,
            })
            .collect()
    }
}
