use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::{Error, Result};

/// Longest run of consecutive missing hourly values that gap filling bridges.
pub const DEFAULT_MAX_GAP_HOURS: usize = 72;

const HEADER: [&str; 4] = ["timestamp", "temp_c", "wind_ms", "cloud"];

/// One hourly observation in local civil time. `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSample {
    pub timestamp: NaiveDateTime,
    /// °C
    pub temperature: Option<f64>,
    /// m/s, ≥ 0
    pub wind_speed: Option<f64>,
    /// Fraction of sky covered, in [0, 1].
    pub cloud_cover: Option<f64>,
    /// True when any field of this sample was produced by gap filling.
    pub synthetic: bool,
}

impl WeatherSample {
    pub fn new(timestamp: NaiveDateTime, temperature: f64, wind_speed: f64, cloud_cover: f64) -> Self {
        WeatherSample {
            timestamp,
            temperature: Some(temperature),
            wind_speed: Some(wind_speed),
            cloud_cover: Some(cloud_cover),
            synthetic: false,
        }
    }

    fn empty(timestamp: NaiveDateTime) -> Self {
        WeatherSample {
            timestamp,
            temperature: None,
            wind_speed: None,
            cloud_cover: None,
            synthetic: true,
        }
    }

    fn is_complete(&self) -> bool {
        self.temperature.is_some() && self.wind_speed.is_some() && self.cloud_cover.is_some()
    }
}

/// Unit of the `cloud` column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CloudUnit {
    /// Fraction in [0, 1].
    #[default]
    Fraction,
    /// Oktas 0–8; 9 (sky obscured) is read as full cover.
    Oktas,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WeatherFormat {
    pub cloud_unit: CloudUnit,
}

/// Daily aggregate of 24 complete hourly samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyWeather {
    pub date: NaiveDate,
    pub mean_temperature: f64,
    /// Mean of the squared hourly wind speeds, (m/s)².
    pub mean_sq_wind: f64,
    pub hourly_cloud: [f64; 24],
}

/// Parses the hourly weather CSV (`timestamp,temp_c,wind_ms,cloud`).
///
/// Rows are returned sorted by timestamp. When a timestamp repeats (the
/// autumn DST hour in local-time data) the first row wins.
pub fn parse_weather<R: Read>(input: R, format: WeatherFormat) -> Result<Vec<WeatherSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    if header.iter().ne(HEADER) {
        return Err(Error::Format {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        samples.push(parse_row(&record, line, format)?);
    }

    samples.sort_by_key(|s| s.timestamp);
    let before = samples.len();
    samples.dedup_by_key(|s| s.timestamp);
    if samples.len() < before {
        log::warn!(
            "dropped {} weather rows with repeated timestamps",
            before - samples.len()
        );
    }
    Ok(samples)
}

fn parse_row(record: &csv::StringRecord, line: usize, format: WeatherFormat) -> Result<WeatherSample> {
    let format_err = |message: String| Error::Format { line, message };
    let invalid = |message: String| Error::Validation { line, message };

    let ts = &record[0];
    let timestamp = NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M")
        .or_else(|_| NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S"))
        .map_err(|_| format_err(format!("invalid timestamp '{ts}'")))?;
    if timestamp.minute() != 0 || timestamp.second() != 0 {
        return Err(format_err(format!("timestamp '{ts}' is not on the hour")));
    }

    let number = |idx: usize, name: &str| -> Result<Option<f64>> {
        let raw = &record[idx];
        if raw.is_empty() {
            return Ok(None);
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(format_err(format!("invalid {name} '{raw}'"))),
        }
    };

    let temperature = number(1, "temp_c")?;
    if let Some(t) = temperature {
        if !(-90.0..=60.0).contains(&t) {
            return Err(invalid(format!("temperature {t} °C out of range")));
        }
    }
    let wind_speed = number(2, "wind_ms")?;
    if let Some(w) = wind_speed {
        if w < 0.0 {
            return Err(invalid(format!("negative wind speed {w}")));
        }
    }
    let cloud_cover = match (number(3, "cloud")?, format.cloud_unit) {
        (None, _) => None,
        (Some(c), CloudUnit::Fraction) => {
            if !(0.0..=1.0).contains(&c) {
                return Err(invalid(format!("cloud cover {c} outside [0, 1]")));
            }
            Some(c)
        }
        (Some(c), CloudUnit::Oktas) => {
            if !(0.0..=9.0).contains(&c) {
                return Err(invalid(format!("cloud cover {c} oktas outside [0, 9]")));
            }
            Some((c / 8.0).min(1.0))
        }
    };

    Ok(WeatherSample {
        timestamp,
        temperature,
        wind_speed,
        cloud_cover,
        synthetic: false,
    })
}

/// Writes samples in the weather CSV layout; missing values become empty fields.
pub fn write_weather<W: Write>(output: W, samples: &[WeatherSample]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in samples {
        writer.write_record([
            s.timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            opt(s.temperature),
            opt(s.wind_speed),
            opt(s.cloud_cover),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Completes an hourly series.
///
/// Missing hours between the first and last timestamp are inserted, and each
/// field is linearly interpolated across its gaps; leading and trailing gaps
/// repeat the nearest valid value. Valid values are never altered. Any sample
/// that received a filled value is marked `synthetic`.
pub fn fill_weather_gaps(samples: &[WeatherSample], max_gap_hours: usize) -> Result<Vec<WeatherSample>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    for pair in samples.windows(2) {
        if pair[1].timestamp <= pair[0].timestamp {
            return Err(Error::Parameter(format!(
                "weather timestamps not strictly increasing at {}",
                pair[1].timestamp
            )));
        }
    }
    if let Some(s) = samples
        .iter()
        .find(|s| s.timestamp.minute() != 0 || s.timestamp.second() != 0)
    {
        return Err(Error::Parameter(format!(
            "weather timestamp {} is not on the hour",
            s.timestamp
        )));
    }

    let start = first.timestamp;
    let hours = (samples[samples.len() - 1].timestamp - start).num_hours() as usize + 1;
    let mut grid: Vec<WeatherSample> = (0..hours)
        .map(|h| WeatherSample::empty(start + Duration::hours(h as i64)))
        .collect();
    for s in samples {
        let idx = (s.timestamp - start).num_hours() as usize;
        grid[idx] = s.clone();
    }

    let accessors: [(&'static str, fn(&mut WeatherSample) -> &mut Option<f64>); 3] = [
        ("temperature", |s| &mut s.temperature),
        ("wind_speed", |s| &mut s.wind_speed),
        ("cloud_cover", |s| &mut s.cloud_cover),
    ];
    for (name, field) in accessors {
        let mut column: Vec<Option<f64>> = grid.iter_mut().map(|s| *field(s)).collect();
        fill_column(name, &mut column, &grid, max_gap_hours)?;
        for (sample, value) in grid.iter_mut().zip(column) {
            let slot = field(sample);
            if slot.is_none() {
                *slot = value;
                sample.synthetic = true;
            }
        }
    }
    Ok(grid)
}

fn fill_column(
    name: &'static str,
    column: &mut [Option<f64>],
    grid: &[WeatherSample],
    limit: usize,
) -> Result<()> {
    let valid: Vec<usize> = (0..column.len()).filter(|&i| column[i].is_some()).collect();
    if valid.len() < 2 {
        return Err(Error::InsufficientSamples(name));
    }
    let check = |from: usize, to: usize| -> Result<()> {
        let len = to - from + 1;
        if len > limit {
            return Err(Error::GapTooLong {
                field: name,
                from: grid[from].timestamp.to_string(),
                to: grid[to].timestamp.to_string(),
                hours: len,
                limit,
            });
        }
        Ok(())
    };

    let (first, last) = (valid[0], valid[valid.len() - 1]);
    if first > 0 {
        check(0, first - 1)?;
        let v = column[first];
        column[..first].fill(v);
    }
    if last + 1 < column.len() {
        check(last + 1, column.len() - 1)?;
        let v = column[last];
        column[last + 1..].fill(v);
    }
    for pair in valid.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a < 2 {
            continue;
        }
        check(a + 1, b - 1)?;
        let (va, vb) = (column[a].unwrap(), column[b].unwrap());
        let span = (b - a) as f64;
        for (k, slot) in column.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (k - a) as f64 / span;
            *slot = Some(va + t * (vb - va));
        }
    }
    Ok(())
}

/// Reduces complete hourly samples to daily means.
///
/// Incomplete days at either end of the series are dropped with a warning;
/// an incomplete day in the interior is an error (fill gaps first).
pub fn daily_weather(samples: &[WeatherSample]) -> Result<Vec<DailyWeather>> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&WeatherSample>> = BTreeMap::new();
    for s in samples {
        by_day.entry(s.timestamp.date()).or_default().push(s);
    }
    let n_days = by_day.len();
    let mut days = Vec::with_capacity(n_days);
    for (k, (date, hours)) in by_day.into_iter().enumerate() {
        let mut slots: [Option<&WeatherSample>; 24] = [None; 24];
        for s in hours.into_iter().filter(|s| s.is_complete()) {
            slots[s.timestamp.hour() as usize] = Some(s);
        }
        if slots.iter().any(Option::is_none) {
            if k == 0 || k + 1 == n_days {
                log::warn!("dropping partial weather day {date}");
                continue;
            }
            return Err(Error::Coverage {
                what: "complete hourly weather",
                dates: vec![date],
            });
        }
        let slots = slots.map(Option::unwrap);
        let mean_temperature = slots.iter().map(|s| s.temperature.unwrap()).sum::<f64>() / 24.0;
        let mean_sq_wind = slots
            .iter()
            .map(|s| s.wind_speed.unwrap().powi(2))
            .sum::<f64>()
            / 24.0;
        let hourly_cloud = slots.map(|s| s.cloud_cover.unwrap());
        days.push(DailyWeather {
            date,
            mean_temperature,
            mean_sq_wind,
            hourly_cloud,
        });
    }
    Ok(days)
}
