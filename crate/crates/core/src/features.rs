//! The ten prediction vectors.

use std::collections::HashMap;
use std::io::Write;

use chrono::{Datelike, NaiveDate};

use crate::ingest::DailyWeather;
use crate::solar::{effective_daylight, solar_day, Site, SolarDay, DEFAULT_CLOUD_ATTENUATION};
use crate::{DateSpan, Error, Result};

pub const N_FACTORS: usize = 10;

/// Column names in matrix order.
pub const FACTOR_NAMES: [&str; N_FACTORS] = [
    "mon", "tue", "wed", "thu", "fri", "sat", "sun", "thermal", "daylight", "wind_loss",
];

pub const THERMAL: usize = 7;
pub const DAYLIGHT: usize = 8;
pub const WIND_LOSS: usize = 9;

pub const DEFAULT_REFERENCE_TEMPERATURE: f64 = 20.0;

pub type FeatureRow = [f64; N_FACTORS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// °C at which the thermal factor vanishes.
    pub reference_temperature: f64,
    pub cloud_attenuation: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            reference_temperature: DEFAULT_REFERENCE_TEMPERATURE,
            cloud_attenuation: DEFAULT_CLOUD_ATTENUATION,
        }
    }
}

/// Daily prediction vectors over a contiguous span, one row per day.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub start_date: NaiveDate,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn span(&self) -> DateSpan {
        DateSpan::with_len(self.start_date, self.rows.len())
    }

    pub fn row(&self, date: NaiveDate) -> Option<&FeatureRow> {
        self.span().index_of(date).map(|i| &self.rows[i])
    }

    /// Rows covering `span`, or a coverage error listing uncovered dates.
    pub fn slice(&self, span: &DateSpan) -> Result<&[FeatureRow]> {
        let own = self.span();
        if !own.contains_span(span) {
            return Err(Error::Coverage {
                what: "features",
                dates: span.dates().filter(|d| !own.contains(*d)).collect(),
            });
        }
        let i = own.index_of(span.start).unwrap();
        Ok(&self.rows[i..i + span.len()])
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    /// CSV with a `date` column followed by the named factor columns.
    pub fn write_csv<W: Write>(&self, output: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(output);
        let mut header = vec!["date"];
        header.extend(FACTOR_NAMES);
        writer.write_record(&header)?;
        for (date, row) in self.span().dates().zip(&self.rows) {
            let mut rec = vec![date.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&rec)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Monday … Sunday indicators.
pub fn weekday_factors(date: NaiveDate) -> [f64; 7] {
    let mut f = [0.0; 7];
    f[date.weekday().num_days_from_monday() as usize] = 1.0;
    f
}

/// `|T − reference|`.
pub fn thermal_factor(mean_temperature: f64, reference: f64) -> f64 {
    (mean_temperature - reference).abs()
}

pub fn wind_loss_factor(mean_sq_wind: f64, thermal: f64) -> f64 {
    mean_sq_wind * thermal
}

/// One row from its ingredients.
pub fn feature_row(date: NaiveDate, mean_temperature: f64, mean_sq_wind: f64, daylight: f64, reference: f64) -> FeatureRow {
    let mut row = [0.0; N_FACTORS];
    row[..7].copy_from_slice(&weekday_factors(date));
    let thermal = thermal_factor(mean_temperature, reference);
    row[THERMAL] = thermal;
    row[DAYLIGHT] = daylight;
    row[WIND_LOSS] = wind_loss_factor(mean_sq_wind, thermal);
    row
}

/// Assembles the feature matrix for every date of `span`.
///
/// Every date needs a daily weather record and a solar day; otherwise a
/// coverage error lists the uncovered dates.
pub fn build_features(
    span: &DateSpan,
    weather: &[DailyWeather],
    solar: &[SolarDay],
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let weather: HashMap<NaiveDate, &DailyWeather> = weather.iter().map(|w| (w.date, w)).collect();
    let solar: HashMap<NaiveDate, &SolarDay> = solar.iter().map(|s| (s.date, s)).collect();

    let missing: Vec<NaiveDate> = span.dates().filter(|d| !weather.contains_key(d)).collect();
    if !missing.is_empty() {
        return Err(Error::Coverage {
            what: "daily weather",
            dates: missing,
        });
    }
    let missing: Vec<NaiveDate> = span.dates().filter(|d| !solar.contains_key(d)).collect();
    if !missing.is_empty() {
        return Err(Error::Coverage {
            what: "solar geometry",
            dates: missing,
        });
    }

    let rows = span
        .dates()
        .map(|date| {
            let w = weather[&date];
            let daylight = effective_daylight(solar[&date], &w.hourly_cloud, config.cloud_attenuation)?;
            Ok(feature_row(
                date,
                w.mean_temperature,
                w.mean_sq_wind,
                daylight,
                config.reference_temperature,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        start_date: span.start,
        rows,
    })
}

/// [`build_features`] with solar days computed for `site`.
pub fn build_features_for_site(
    span: &DateSpan,
    weather: &[DailyWeather],
    site: &Site,
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let solar = span
        .dates()
        .map(|d| solar_day(site, d))
        .collect::<Result<Vec<_>>>()?;
    build_features(span, weather, &solar, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn weather(date: NaiveDate, t: f64, w2: f64) -> DailyWeather {
        DailyWeather {
            date,
            mean_temperature: t,
            mean_sq_wind: w2,
            hourly_cloud: [0.5; 24],
        }
    }

    #[test]
    fn emergency_declaration_was_a_thursday() {
        assert_eq!(weekday_factors(d("2020-03-12")), [0., 0., 0., 1., 0., 0., 0.]);
    }

    #[test]
    fn weekday_rotates_with_wraparound() {
        let mut prev = weekday_factors(d("2020-01-01"));
        for date in d("2020-01-02").iter_days().take(30) {
            let cur = weekday_factors(date);
            assert_eq!(cur.iter().sum::<f64>(), 1.0);
            let p = prev.iter().position(|&x| x == 1.0).unwrap();
            let c = cur.iter().position(|&x| x == 1.0).unwrap();
            assert_eq!(c, (p + 1) % 7);
            prev = cur;
        }
    }

    #[test]
    fn thermal_and_wind() {
        assert_eq!(thermal_factor(20.0, 20.0), 0.0);
        assert_eq!(thermal_factor(-5.0, 20.0), 25.0);
        assert_eq!(thermal_factor(25.0, 20.0), 5.0);
        assert_eq!(wind_loss_factor(0.0, 17.0), 0.0);
        assert_eq!(wind_loss_factor(12.0, thermal_factor(20.0, 20.0)), 0.0);
        assert_eq!(wind_loss_factor(9.0, 25.0), 225.0);
    }

    #[test]
    fn composed_row() {
        // Thursday, T = -5, mean squared wind 9, daylight 6.
        let row = feature_row(d("2020-03-12"), -5.0, 9.0, 6.0, 20.0);
        assert_eq!(row, [0., 0., 0., 1., 0., 0., 0., 25., 6., 225.]);
    }

    #[test]
    fn builds_thirty_rows() {
        let site = Site::tallinn();
        let span = DateSpan::with_len(d("2020-02-01"), 30);
        let w: Vec<_> = span.dates().map(|d| weather(d, 0.0, 4.0)).collect();
        let s: Vec<_> = span.dates().map(|d| solar_day(&site, d).unwrap()).collect();
        let m = build_features(&span, &w, &s, &FeatureConfig::default()).unwrap();
        assert_eq!(m.rows.len(), 30);
        for row in &m.rows {
            assert_eq!(row[..7].iter().sum::<f64>(), 1.0);
            assert!((0.0..=24.0).contains(&row[DAYLIGHT]));
            assert_eq!(row[WIND_LOSS], row[THERMAL] * 4.0);
        }
        let again = build_features(&span, &w, &s, &FeatureConfig::default()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn missing_solar_is_coverage_error() {
        let span = DateSpan::with_len(d("2020-02-01"), 3);
        let w: Vec<_> = span.dates().map(|d| weather(d, 0.0, 4.0)).collect();
        match build_features(&span, &w, &[], &FeatureConfig::default()) {
            Err(Error::Coverage { dates, .. }) => assert_eq!(dates.len(), 3),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn slice_outside_is_coverage_error() {
        let m = FeatureMatrix {
            start_date: d("2020-02-01"),
            rows: vec![[0.0; N_FACTORS]; 5],
        };
        assert!(m.slice(&DateSpan::with_len(d("2020-02-03"), 3)).is_ok());
        assert!(matches!(
            m.slice(&DateSpan::with_len(d("2020-02-04"), 3)),
            Err(Error::Coverage { .. })
        ));
    }

    proptest! {
        #[test]
        fn thermal_is_even_about_reference(x in -60.0..60.0f64, reference in -10.0..30.0f64) {
            let (up, down) = (thermal_factor(reference + x, reference), thermal_factor(reference - x, reference));
            prop_assert!((up - down).abs() <= 1e-12 * (1.0 + x.abs()));
            prop_assert!((up - x.abs()).abs() <= 1e-12 * (1.0 + x.abs()));
        }

        #[test]
        fn rows_are_one_hot_and_consistent(
            day in 0u64..3000,
            t in -40.0..40.0f64,
            w2 in 0.0..200.0f64,
            light in 0.0..24.0f64,
        ) {
            let date = d("2015-01-01") + Days::new(day);
            let row = feature_row(date, t, w2, light, 20.0);
            prop_assert_eq!(row[..7].iter().filter(|&&x| x == 1.0).count(), 1);
            prop_assert_eq!(row[..7].iter().filter(|&&x| x == 0.0).count(), 6);
            prop_assert!(row[THERMAL] >= 0.0 && row[WIND_LOSS] >= 0.0);
            prop_assert_eq!(row[WIND_LOSS], row[THERMAL] * w2);
        }
    }
}
