//! Solar geometry and the effective-daylight factor.
//!
//! Positions come from the low-precision ephemeris in which the solar
//! declination and the equation of time are truncated Fourier series of the
//! fractional year (Spencer 1971). Accuracy is a few arc-minutes in
//! declination and well under a minute in time between 1950 and 2100, which
//! is far below the noise floor of daily consumption models. Atmospheric
//! refraction is ignored.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default strength of cloud attenuation in [`effective_daylight`].
pub const DEFAULT_CLOUD_ATTENUATION: f64 = 0.75;

const MIN_YEAR: i32 = 1950;
const MAX_YEAR: i32 = 2100;

/// Rule mapping local civil time to UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum UtcOffsetRule {
    /// Constant offset east of UTC, in minutes.
    Fixed { minutes: i32 },
    /// European Union daylight saving: standard offset plus one hour from
    /// 01:00 UTC on the last Sunday of March to 01:00 UTC on the last Sunday
    /// of October.
    EuropeanDst { standard_minutes: i32 },
}

impl UtcOffsetRule {
    pub const UTC: UtcOffsetRule = UtcOffsetRule::Fixed { minutes: 0 };

    /// Offset in force at a UTC instant, in minutes.
    pub fn offset_at_utc(&self, utc: NaiveDateTime) -> i32 {
        match *self {
            UtcOffsetRule::Fixed { minutes } => minutes,
            UtcOffsetRule::EuropeanDst { standard_minutes } => {
                if eu_dst_active(utc) {
                    standard_minutes + 60
                } else {
                    standard_minutes
                }
            }
        }
    }

    /// Converts local civil time to UTC. Local times skipped by the spring
    /// transition map to standard time; repeated autumn times resolve to the
    /// daylight-saving reading.
    pub fn local_to_utc(&self, local: NaiveDateTime) -> NaiveDateTime {
        match *self {
            UtcOffsetRule::Fixed { minutes } => local - Duration::minutes(minutes as i64),
            UtcOffsetRule::EuropeanDst { standard_minutes } => {
                let summer = local - Duration::minutes(standard_minutes as i64 + 60);
                if eu_dst_active(summer) {
                    summer
                } else {
                    local - Duration::minutes(standard_minutes as i64)
                }
            }
        }
    }
}

fn last_sunday(year: i32, month: u32) -> NaiveDate {
    let mut d = NaiveDate::from_ymd_opt(year, month, 1)
        .and_then(|d| d.checked_add_months(chrono::Months::new(1)))
        .and_then(|d| d.pred_opt())
        .expect("valid month end");
    while d.weekday() != Weekday::Sun {
        d = d.pred_opt().expect("date in range");
    }
    d
}

fn eu_dst_active(utc: NaiveDateTime) -> bool {
    let one = NaiveTime::from_hms_opt(1, 0, 0).unwrap();
    let start = last_sunday(utc.year(), 3).and_time(one);
    let end = last_sunday(utc.year(), 10).and_time(one);
    start <= utc && utc < end
}

fn format_offset(minutes: i32) -> String {
    let sign = if minutes < 0 { '-' } else { '+' };
    format!("{sign}{:02}:{:02}", minutes.abs() / 60, minutes.abs() % 60)
}

fn parse_offset(s: &str) -> Option<i32> {
    let (sign, rest) = match s.as_bytes().first()? {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => return None,
    };
    let (h, m) = rest.split_once(':')?;
    let (h, m): (i32, i32) = (h.parse().ok()?, m.parse().ok()?);
    (h <= 14 && m < 60).then_some(sign * (h * 60 + m))
}

impl fmt::Display for UtcOffsetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            UtcOffsetRule::Fixed { minutes: 0 } => f.write_str("UTC"),
            UtcOffsetRule::Fixed { minutes } => f.write_str(&format_offset(minutes)),
            UtcOffsetRule::EuropeanDst { standard_minutes } => {
                write!(f, "eu:{}", format_offset(standard_minutes))
            }
        }
    }
}

impl FromStr for UtcOffsetRule {
    type Err = String;

    /// Accepts `UTC`, a fixed offset such as `+02:00`, `eu:+02:00`, or one of
    /// a few named European zones.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let eu = |h: i32| UtcOffsetRule::EuropeanDst { standard_minutes: h * 60 };
        match s {
            "UTC" | "Z" => return Ok(UtcOffsetRule::UTC),
            "Europe/London" | "Europe/Dublin" | "Europe/Lisbon" => return Ok(eu(0)),
            "Europe/Berlin" | "Europe/Paris" | "Europe/Stockholm" | "Europe/Warsaw"
            | "Europe/Copenhagen" | "Europe/Oslo" => return Ok(eu(1)),
            "Europe/Tallinn" | "Europe/Riga" | "Europe/Vilnius" | "Europe/Helsinki" => {
                return Ok(eu(2))
            }
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("eu:") {
            return parse_offset(rest)
                .map(|standard_minutes| UtcOffsetRule::EuropeanDst { standard_minutes })
                .ok_or_else(|| format!("invalid offset rule '{s}'"));
        }
        parse_offset(s)
            .map(|minutes| UtcOffsetRule::Fixed { minutes })
            .ok_or_else(|| format!("invalid offset rule '{s}'"))
    }
}

impl TryFrom<String> for UtcOffsetRule {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<UtcOffsetRule> for String {
    fn from(r: UtcOffsetRule) -> String {
        r.to_string()
    }
}

/// Observation site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    /// Degrees north.
    pub latitude: f64,
    /// Degrees east.
    pub longitude: f64,
    #[serde(rename = "utc_offset")]
    pub offset_rule: UtcOffsetRule,
}

impl Site {
    pub fn new(latitude: f64, longitude: f64, offset_rule: UtcOffsetRule) -> Result<Self> {
        let site = Site {
            latitude,
            longitude,
            offset_rule,
        };
        site.validate()?;
        Ok(site)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::Parameter(format!(
                "site ({}, {}) outside latitude [-90, 90] / longitude [-180, 180]",
                self.latitude, self.longitude
            )));
        }
        Ok(())
    }

    /// Tallinn airport weather station.
    pub fn tallinn() -> Site {
        Site {
            latitude: 59.41,
            longitude: 24.83,
            offset_rule: UtcOffsetRule::EuropeanDst { standard_minutes: 120 },
        }
    }
}

/// Solar altitude at 24 local mid-hour instants of one day.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarDay {
    pub date: NaiveDate,
    /// Degrees, entry `h` sampled at local `h:30`.
    pub hourly_altitude: [f64; 24],
}

fn days_in_year(year: i32) -> f64 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366.0
    } else {
        365.0
    }
}

/// Fractional year angle γ in radians for a UTC instant.
pub fn fractional_year(utc: NaiveDateTime) -> f64 {
    let hour = utc.time().num_seconds_from_midnight_f64() / 3600.0;
    2.0 * PI / days_in_year(utc.year()) * (utc.ordinal0() as f64 + (hour - 12.0) / 24.0)
}

trait SecondsF64 {
    fn num_seconds_from_midnight_f64(&self) -> f64;
}

impl SecondsF64 for NaiveTime {
    fn num_seconds_from_midnight_f64(&self) -> f64 {
        use chrono::Timelike;
        self.num_seconds_from_midnight() as f64 + self.nanosecond() as f64 * 1e-9
    }
}

/// Solar declination in degrees at fractional year `gamma`.
pub fn declination(gamma: f64) -> f64 {
    let rad = 0.006918 - 0.399912 * gamma.cos() + 0.070257 * gamma.sin()
        - 0.006758 * (2.0 * gamma).cos()
        + 0.000907 * (2.0 * gamma).sin()
        - 0.002697 * (3.0 * gamma).cos()
        + 0.00148 * (3.0 * gamma).sin();
    rad.to_degrees()
}

/// Equation of time in minutes at fractional year `gamma`.
pub fn equation_of_time(gamma: f64) -> f64 {
    229.18
        * (0.000075 + 0.001868 * gamma.cos()
            - 0.032077 * gamma.sin()
            - 0.014615 * (2.0 * gamma).cos()
            - 0.040849 * (2.0 * gamma).sin())
}

fn check_range(utc: NaiveDateTime) -> Result<()> {
    if !(MIN_YEAR..=MAX_YEAR).contains(&utc.year()) {
        return Err(Error::Domain(format!(
            "instant {utc} outside the supported years {MIN_YEAR}-{MAX_YEAR}"
        )));
    }
    Ok(())
}

/// Solar elevation angle in degrees at a UTC instant.
pub fn solar_position(site: &Site, utc: NaiveDateTime) -> Result<f64> {
    check_range(utc)?;
    let gamma = fractional_year(utc);
    let decl = declination(gamma).to_radians();
    let minutes = utc.time().num_seconds_from_midnight_f64() / 60.0;
    let true_solar_time = minutes + equation_of_time(gamma) + 4.0 * site.longitude;
    let hour_angle = (true_solar_time / 4.0 - 180.0).to_radians();
    let lat = site.latitude.to_radians();
    let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    Ok(sin_alt.clamp(-1.0, 1.0).asin().to_degrees())
}

/// UTC instant of true solar noon (hour angle zero) at the site on `date`.
pub fn solar_noon_utc(site: &Site, date: NaiveDate) -> Result<NaiveDateTime> {
    let mut minutes = 720.0 - 4.0 * site.longitude;
    for _ in 0..3 {
        let t = date.and_time(NaiveTime::MIN) + Duration::milliseconds((minutes * 60_000.0) as i64);
        check_range(t)?;
        minutes = 720.0 - 4.0 * site.longitude - equation_of_time(fractional_year(t));
    }
    Ok(date.and_time(NaiveTime::MIN) + Duration::milliseconds((minutes * 60_000.0).round() as i64))
}

/// Solar altitude at local clock times 00:30, 01:30, …, 23:30.
pub fn solar_day(site: &Site, date: NaiveDate) -> Result<SolarDay> {
    let mut hourly_altitude = [0.0; 24];
    for (h, alt) in hourly_altitude.iter_mut().enumerate() {
        let local = date.and_time(NaiveTime::from_hms_opt(h as u32, 30, 0).unwrap());
        *alt = solar_position(site, site.offset_rule.local_to_utc(local))?;
    }
    Ok(SolarDay {
        date,
        hourly_altitude,
    })
}

/// Effective daylight hours: Σₕ clamp(sin altitudeₕ, 0, 1) · (1 − attenuation · cloudₕ).
pub fn effective_daylight(solar: &SolarDay, hourly_cloud: &[f64; 24], cloud_attenuation: f64) -> Result<f64> {
    if let Some(c) = hourly_cloud.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::Validation {
            line: 0,
            message: format!("cloud fraction {c} outside [0, 1] on {}", solar.date),
        });
    }
    if !(0.0..=1.0).contains(&cloud_attenuation) {
        return Err(Error::Parameter(format!(
            "cloud attenuation {cloud_attenuation} outside [0, 1]"
        )));
    }
    Ok(solar
        .hourly_altitude
        .iter()
        .zip(hourly_cloud)
        .map(|(alt, cloud)| alt.to_radians().sin().clamp(0.0, 1.0) * (1.0 - cloud_attenuation * cloud))
        .sum())
}
