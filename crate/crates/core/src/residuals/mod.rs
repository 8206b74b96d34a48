//! Normalized residual demand and its comparisons.

mod calendar;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use chrono::{Datelike, NaiveDate};

pub use calendar::{AlignmentPair, FixedHoliday, HolidayCalendar, MovableHoliday};

use crate::ingest::ConsumptionSeries;
use crate::{DateSpan, Error, Result};

/// Length of the averaging window for the normalization denominator.
pub const NORMALIZATION_WINDOW_DAYS: usize = 30;
pub const DEFAULT_MOVING_AVERAGE: usize = 7;

/// Raw and normalized residuals over contiguous days.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub start_date: NaiveDate,
    /// `rᵢ`, kWh.
    pub raw: Vec<f64>,
    /// `ρᵢ = rᵢ / ⟨cᵢ⟩`.
    pub normalized: Vec<f64>,
    /// `⟨cᵢ⟩`, kWh, always > 0.
    pub denominators: Vec<f64>,
    pub onset: Option<NaiveDate>,
}

impl ResidualSeries {
    pub fn span(&self) -> DateSpan {
        DateSpan::with_len(self.start_date, self.raw.len())
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.start_date.iter_days().take(self.raw.len())
    }

    pub fn rho(&self, date: NaiveDate) -> Option<f64> {
        self.span().index_of(date).map(|i| self.normalized[i])
    }

    /// `ρ` over `span`, if covered.
    pub fn rho_slice(&self, span: &DateSpan) -> Option<&[f64]> {
        let i = self.span().index_of(span.start)?;
        self.span().index_of(span.end)?;
        Some(&self.normalized[i..i + span.len()])
    }

    /// Residual CSV: `#onset=` comment, then `date,raw_kwh,denominator_kwh,rho`.
    pub fn write_csv<W: Write>(&self, mut output: W) -> Result<()> {
        match self.onset {
            Some(d) => writeln!(output, "#onset={d}")?,
            None => writeln!(output, "#onset=")?,
        }
        writeln!(output, "date,raw_kwh,denominator_kwh,rho")?;
        for (i, date) in self.dates().enumerate() {
            writeln!(
                output,
                "{date},{},{},{}",
                self.raw[i], self.denominators[i], self.normalized[i]
            )?;
        }
        Ok(())
    }

    /// Reads the format produced by [`ResidualSeries::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut onset = None;
        let mut start = None;
        let (mut raw, mut denominators, mut normalized) = (Vec::new(), Vec::new(), Vec::new());
        let mut expected: Option<NaiveDate> = None;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let err = |message: String| Error::Format { line: lineno, message };
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.strip_prefix("onset=") {
                    if !v.is_empty() {
                        onset = Some(v.parse().map_err(|_| err(format!("invalid onset '{v}'")))?);
                    }
                }
                continue;
            }
            if line == "date,raw_kwh,denominator_kwh,rho" || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let date: NaiveDate = fields[0].parse().map_err(|_| err(format!("invalid date '{}'", fields[0])))?;
            if let Some(e) = expected {
                if date != e {
                    return Err(err(format!("expected {e}, found {date}")));
                }
            }
            start.get_or_insert(date);
            expected = date.succ_opt();
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("invalid number '{s}'")));
            raw.push(num(fields[1])?);
            denominators.push(num(fields[2])?);
            normalized.push(num(fields[3])?);
        }
        let start_date = start.ok_or_else(|| Error::Format {
            line: 0,
            message: "residual file has no rows".into(),
        })?;
        Ok(ResidualSeries {
            start_date,
            raw,
            normalized,
            denominators,
            onset,
        })
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Normalizes raw residuals starting at `start` by local mean consumption.
///
/// Before `onset` (or everywhere when there is none) the denominator is the
/// mean consumption over a 30-day window centered on the day (15 days before,
/// the day, 14 after), truncated at the ends of the consumption series. From
/// `onset` on it is frozen to the mean of the 30 days immediately before the
/// onset.
pub fn normalize(
    start: NaiveDate,
    raw: &[f64],
    consumption: &ConsumptionSeries,
    onset: Option<NaiveDate>,
) -> Result<ResidualSeries> {
    if raw.is_empty() {
        return Err(Error::Parameter("no residuals to normalize".into()));
    }
    let span = DateSpan::with_len(start, raw.len());
    let cspan = consumption.span();
    if !cspan.contains_span(&span) {
        return Err(Error::Coverage {
            what: "consumption",
            dates: span.dates().filter(|d| !cspan.contains(*d)).collect(),
        });
    }
    let c = &consumption.values;
    let n = c.len();

    let frozen = match onset {
        Some(onset) => {
            let history = (onset - cspan.start).num_days();
            if history < NORMALIZATION_WINDOW_DAYS as i64 {
                return Err(Error::InsufficientHistory {
                    onset,
                    available: history.max(0) as usize,
                });
            }
            let k = history as usize;
            if k <= n {
                Some((onset, mean(&c[k - NORMALIZATION_WINDOW_DAYS..k])))
            } else {
                None
            }
        }
        None => None,
    };

    let offset = cspan.index_of(start).unwrap();
    let half = NORMALIZATION_WINDOW_DAYS / 2;
    let mut denominators = Vec::with_capacity(raw.len());
    for (i, date) in span.dates().enumerate() {
        let denom = match frozen {
            Some((onset, value)) if date >= onset => value,
            _ => {
                let j = offset + i;
                let lo = j.saturating_sub(half);
                let hi = (j + NORMALIZATION_WINDOW_DAYS - half).min(n);
                mean(&c[lo..hi])
            }
        };
        if !(denom > 0.0) {
            return Err(Error::Degenerate(format!(
                "mean consumption around {date} is {denom}"
            )));
        }
        denominators.push(denom);
    }
    let normalized = raw.iter().zip(&denominators).map(|(r, d)| r / d).collect();
    Ok(ResidualSeries {
        start_date: start,
        raw: raw.to_vec(),
        normalized,
        denominators,
        onset,
    })
}

/// Provenance of a year-difference slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotLabel {
    /// Same month and day in both years.
    Day,
    /// Same month and day, falling on a holiday in at least one year.
    Holiday(String),
    /// February 29 paired with February 28 of the non-leap year.
    LeapDay,
    /// Holiday range mean against the other year's holiday range mean.
    Aligned(String),
    /// The complementary comparison of an alignment pair: each year's days
    /// at the other year's holiday dates.
    AlignedSwapped(String),
}

impl fmt::Display for SlotLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotLabel::Day => f.write_str("day"),
            SlotLabel::Holiday(n) => write!(f, "holiday:{n}"),
            SlotLabel::LeapDay => f.write_str("leap-day"),
            SlotLabel::Aligned(n) => write!(f, "aligned:{n}"),
            SlotLabel::AlignedSwapped(n) => write!(f, "aligned-swap:{n}"),
        }
    }
}

/// One paired comparison `ρ_A − ρ_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSlot {
    pub month: u32,
    pub day: u32,
    /// Day of series A that supplies the day-wise value.
    pub date_a: NaiveDate,
    pub date_b: NaiveDate,
    pub diff: f64,
    pub label: SlotLabel,
}

fn single_year(series: &ResidualSeries, which: &str) -> Result<i32> {
    let span = series.span();
    if span.start.year() != span.end.year() {
        return Err(Error::Parameter(format!(
            "series {which} ({span}) spans more than one calendar year"
        )));
    }
    Ok(span.start.year())
}

fn month_day(date: NaiveDate) -> (u32, u32) {
    (date.month(), date.day())
}

fn in_year(year: i32, (month, day): (u32, u32)) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(year, month, day)
}

/// Pairs two single-year residual series day by day and returns `ρ_A − ρ_B`.
///
/// Slots are keyed by month and day and cover the days both series share.
/// When only one year has February 29 it is paired with the other year's
/// February 28. Each alignment pair in `calendar` linking the two years
/// replaces day-wise pairing inside its ranges: the mean of A over its range
/// minus the mean of B over its range fills the slots of the later year's
/// range, and the swapped comparison (A at B's dates minus B at A's dates)
/// fills the slots of the earlier year's range. Swapping A and B negates
/// every slot.
pub fn year_difference(a: &ResidualSeries, b: &ResidualSeries, calendar: &HolidayCalendar) -> Result<Vec<DiffSlot>> {
    let (year_a, year_b) = (single_year(a, "A")?, single_year(b, "B")?);
    let lookup = |s: &ResidualSeries| -> HashMap<(u32, u32), (NaiveDate, f64)> {
        s.dates()
            .zip(&s.normalized)
            .map(|(d, r)| (month_day(d), (d, *r)))
            .collect()
    };
    let (map_a, map_b) = (lookup(a), lookup(b));
    let with_leap = |map: &HashMap<(u32, u32), (NaiveDate, f64)>, key: (u32, u32)| {
        map.get(&key)
            .map(|v| (*v, false))
            .or_else(|| (key == (2, 29)).then(|| map.get(&(2, 28)).map(|v| (*v, true))).flatten())
    };

    let mut keys: Vec<(u32, u32)> = map_a.keys().chain(map_b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();

    let mut slots: BTreeMap<(u32, u32), DiffSlot> = BTreeMap::new();
    for key in keys {
        let (Some(((date_a, ra), leap_a)), Some(((date_b, rb), leap_b))) = (with_leap(&map_a, key), with_leap(&map_b, key))
        else {
            continue;
        };
        let label = if leap_a || leap_b {
            SlotLabel::LeapDay
        } else if let Some(name) = calendar.holiday_name(date_a).or(calendar.holiday_name(date_b)) {
            SlotLabel::Holiday(name.to_string())
        } else {
            SlotLabel::Day
        };
        slots.insert(
            key,
            DiffSlot {
                month: key.0,
                day: key.1,
                date_a,
                date_b,
                diff: ra - rb,
                label,
            },
        );
    }
    if slots.is_empty() {
        return Err(Error::Parameter(format!(
            "series {} and {} share no calendar days",
            a.span(),
            b.span()
        )));
    }

    for (name, range_a, range_b) in calendar.pairs_between(year_a, year_b) {
        let keys_a: Vec<(u32, u32)> = range_a.dates().map(month_day).collect();
        let keys_b: Vec<(u32, u32)> = range_b.dates().map(month_day).collect();
        if keys_a.iter().any(|k| keys_b.contains(k)) {
            return Err(Error::Calendar(format!(
                "alignment '{name}' ranges {range_a} and {range_b} share calendar days"
            )));
        }
        let range_mean = |series: &ResidualSeries, year: i32, keys: &[(u32, u32)]| -> Result<f64> {
            let values = keys
                .iter()
                .map(|&k| in_year(year, k).and_then(|d| series.rho(d)))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| {
                    Error::Calendar(format!(
                        "alignment '{name}' range not covered by the {year} series ({})",
                        series.span()
                    ))
                })?;
            Ok(mean(&values))
        };
        let holiday = range_mean(a, year_a, &keys_a)? - range_mean(b, year_b, &keys_b)?;
        let swapped = range_mean(a, year_a, &keys_b)? - range_mean(b, year_b, &keys_a)?;
        let (holiday_keys, swapped_keys) = if year_b > year_a { (&keys_b, &keys_a) } else { (&keys_a, &keys_b) };
        for (keys, value, label) in [
            (holiday_keys, holiday, SlotLabel::Aligned(name.to_string())),
            (swapped_keys, swapped, SlotLabel::AlignedSwapped(name.to_string())),
        ] {
            for key in keys {
                if let Some(slot) = slots.get_mut(key) {
                    slot.diff = value;
                    slot.label = label.clone();
                }
            }
        }
    }
    Ok(slots.into_values().collect())
}

/// Centered moving average with an odd window, truncated at the edges.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Parameter(format!(
            "moving-average window must be odd and positive, got {window}"
        )));
    }
    let half = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| mean(&values[i.saturating_sub(half)..(i + half + 1).min(n)]))
        .collect())
}

/// Mean `ρ` over `range`, which must lie inside the series.
pub fn period_summary(series: &ResidualSeries, range: &DateSpan) -> Result<f64> {
    let values = series.rho_slice(range).ok_or_else(|| {
        Error::Parameter(format!(
            "summary range {range} not inside residual series {}",
            series.span()
        ))
    })?;
    if values.is_empty() {
        return Err(Error::Parameter("empty summary range".into()));
    }
    Ok(mean(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ConsumerClass;
    use chrono::Days;
    use proptest::prelude::*;

    fn next_day(date: NaiveDate) -> NaiveDate {
        date + Days::new(1)
    }

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn consumption(start: &str, values: Vec<f64>) -> ConsumptionSeries {
        ConsumptionSeries {
            region: "R".into(),
            consumer_class: Some(ConsumerClass::Private),
            start_date: d(start),
            values,
        }
    }

    fn rho_series(start: &str, rho: Vec<f64>) -> ResidualSeries {
        let n = rho.len();
        ResidualSeries {
            start_date: d(start),
            raw: rho.clone(),
            normalized: rho,
            denominators: vec![1.0; n],
            onset: None,
        }
    }

    #[test]
    fn constant_consumption() {
        let c = consumption("2020-01-01", vec![200.0; 60]);
        let s = normalize(d("2020-01-01"), &[10.0; 60], &c, None).unwrap();
        assert!(s.normalized.iter().all(|&r| r == 0.05));
    }

    #[test]
    fn window_is_centered_and_truncated() {
        let values: Vec<f64> = (0..60).map(|i| i as f64 + 1.0).collect();
        let c = consumption("2020-01-01", values.clone());
        let s = normalize(d("2020-01-01"), &[1.0; 60], &c, None).unwrap();
        // Day 0: days 0..=14. Day 30: days 15..=44. Day 59: days 44..=59.
        assert_eq!(s.denominators[0], mean(&values[0..15]));
        assert_eq!(s.denominators[30], mean(&values[15..45]));
        assert_eq!(s.denominators[59], mean(&values[44..60]));
    }

    #[test]
    fn frozen_after_onset() {
        let values: Vec<f64> = (0..90).map(|i| 100.0 + i as f64).collect();
        let c = consumption("2020-01-01", values.clone());
        let onset = d("2020-02-15");
        let s = normalize(d("2020-01-01"), &[1.0; 90], &c, Some(onset)).unwrap();
        let k = 45;
        let frozen = mean(&values[k - 30..k]);
        assert!(s.denominators[k..].iter().all(|&x| x == frozen));
        assert_ne!(s.denominators[k - 1], frozen);
    }

    #[test]
    fn onset_needs_thirty_days() {
        let c = consumption("2020-01-01", vec![100.0; 90]);
        assert!(matches!(
            normalize(d("2020-01-01"), &[1.0; 90], &c, Some(d("2020-01-30"))),
            Err(Error::InsufficientHistory { available: 29, .. })
        ));
        assert!(normalize(d("2020-01-01"), &[1.0; 90], &c, Some(d("2020-01-31"))).is_ok());
    }

    #[test]
    fn step_drop_shows_up_post_onset() {
        let mut values = vec![1000.0; 120];
        for v in values.iter_mut().skip(60) {
            *v = 800.0;
        }
        let c = consumption("2020-01-01", values.clone());
        // Counterfactual prediction is the pre-onset level.
        let raw: Vec<f64> = values.iter().map(|v| v - 1000.0).collect();
        let s = normalize(d("2020-01-01"), &raw, &c, Some(d("2020-03-01"))).unwrap();
        let post = &s.normalized[60..];
        assert!((mean(post) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn identical_series_difference_is_zero() {
        let a = rho_series("2019-01-01", (0..100).map(|i| (i as f64).sin()).collect());
        let diff = year_difference(&a, &a, &HolidayCalendar::default()).unwrap();
        assert_eq!(diff.len(), 100);
        assert!(diff.iter().all(|s| s.diff == 0.0));
    }

    #[test]
    fn same_values_different_years() {
        let a = rho_series("2019-03-01", vec![0.1; 30]);
        let b = rho_series("2020-03-01", vec![0.1; 30]);
        let diff = year_difference(&a, &b, &HolidayCalendar::default()).unwrap();
        assert_eq!(diff.len(), 30);
        assert!(diff.iter().all(|s| s.diff == 0.0 && s.label == SlotLabel::Day));
    }

    #[test]
    fn leap_day_pairs_with_february_28() {
        let a = rho_series("2019-02-01", (0..59).map(|i| i as f64).collect());
        let b = rho_series("2020-02-01", vec![0.0; 60]);
        let diff = year_difference(&a, &b, &HolidayCalendar::default()).unwrap();
        assert_eq!(diff.len(), b.raw.len());
        let leap: Vec<_> = diff.iter().filter(|s| s.label == SlotLabel::LeapDay).collect();
        assert_eq!(leap.len(), 1);
        assert_eq!(leap[0].date_a, d("2019-02-28"));
        assert_eq!(leap[0].date_b, d("2020-02-29"));
        assert_eq!(leap[0].diff, 27.0);
    }

    fn good_friday() -> HolidayCalendar {
        HolidayCalendar {
            alignments: vec![AlignmentPair {
                name: "Good Friday".into(),
                first: "2019-04-18..2019-04-20".parse().unwrap(),
                second: "2020-04-09..2020-04-12".parse().unwrap(),
            }],
            ..Default::default()
        }
    }

    #[test]
    fn aligned_holidays_compare_range_means() {
        let mut ra = vec![0.0; 61];
        let mut rb = vec![0.0; 61];
        // April 1 = index 0. A: Apr 18–20, B: Apr 9–12.
        for r in &mut ra[17..20] {
            *r = -0.05;
        }
        for r in &mut rb[8..12] {
            *r = -0.05;
        }
        let a = rho_series("2019-04-01", ra);
        let b = rho_series("2020-04-01", rb);
        let diff = year_difference(&a, &b, &good_friday()).unwrap();
        let aligned: Vec<_> = diff
            .iter()
            .filter(|s| matches!(s.label, SlotLabel::Aligned(_) | SlotLabel::AlignedSwapped(_)))
            .collect();
        assert_eq!(aligned.len(), 7);
        assert!(aligned.iter().all(|s| s.diff.abs() < 1e-15), "{aligned:?}");
        assert!(diff.iter().all(|s| s.diff.abs() < 1e-15));
        // Without the calendar, day-wise pairing sees the holidays.
        let plain = year_difference(&a, &b, &HolidayCalendar::default()).unwrap();
        assert!(plain.iter().any(|s| s.diff.abs() > 0.01));
    }

    #[test]
    fn alignment_outside_series_is_calendar_error() {
        let a = rho_series("2019-05-01", vec![0.0; 30]);
        let b = rho_series("2020-05-01", vec![0.0; 30]);
        assert!(matches!(
            year_difference(&a, &b, &good_friday()),
            Err(Error::Calendar(_))
        ));
    }

    #[test]
    fn moving_average_cases() {
        assert_eq!(moving_average(&[3.0; 10], 7).unwrap(), vec![3.0; 10]);
        let mut spike = vec![0.0; 21];
        spike[10] = 1.0;
        let ma = moving_average(&spike, 7).unwrap();
        for (i, v) in ma.iter().enumerate() {
            let expected = if (7..=13).contains(&i) { 1.0 / 7.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15, "{i}: {v}");
        }
        assert!(matches!(moving_average(&spike, 6), Err(Error::Parameter(_))));
        assert!(matches!(moving_average(&spike, 0), Err(Error::Parameter(_))));
    }

    // Interior window of 7 alternating ±1 values holds four of one sign and
    // three of the other: (4 - 3) / 7 = ±1/7.
    #[test]
    fn alternating_signs_average_to_one_seventh() {
        let v: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ma = moving_average(&v, 7).unwrap();
        for (i, m) in ma.iter().enumerate().take(27).skip(3) {
            assert!((m.abs() - 1.0 / 7.0).abs() < 1e-15, "{i}: {m}");
        }
    }

    #[test]
    fn summaries() {
        let s = rho_series("2020-03-01", vec![-0.2; 20]);
        let all = s.span();
        assert!((period_summary(&s, &all).unwrap() + 0.2).abs() < 1e-15);
        let alt = rho_series("2020-03-01", (0..20).map(|i| if i % 2 == 0 { 0.3 } else { -0.3 }).collect());
        assert!(period_summary(&alt, &alt.span()).unwrap().abs() < 1e-15);
        assert!(matches!(
            period_summary(&s, &DateSpan::with_len(d("2020-03-15"), 10)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn residual_csv_round_trip() {
        let c = consumption("2020-01-01", (0..60).map(|i| 100.0 + (i as f64 * 0.37).sin() * 7.0).collect());
        let raw: Vec<f64> = (0..60).map(|i| (i as f64 * 1.3).cos() * 3.3).collect();
        let s = normalize(d("2020-01-01"), &raw, &c, Some(d("2020-02-10"))).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#onset=2020-02-10\ndate,raw_kwh,denominator_kwh,rho\n"));
        let back = ResidualSeries::read_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn normalize_scale_invariant_and_consistent(
            base in prop::collection::vec(50.0..500.0f64, 40..80),
            noise in prop::collection::vec(-20.0..20.0f64, 80),
            k in 0.01..100.0f64,
            onset_at in 30usize..40,
        ) {
            let n = base.len();
            let raw = &noise[..n];
            let c = consumption("2019-01-01", base.clone());
            let onset = Some(d("2019-01-01") + Days::new(onset_at as u64));
            let s = normalize(d("2019-01-01"), raw, &c, onset).unwrap();
            let scaled_raw: Vec<f64> = raw.iter().map(|r| r * k).collect();
            let t = normalize(d("2019-01-01"), &scaled_raw, &c.scaled(k), onset).unwrap();
            for i in 0..n {
                prop_assert!((s.normalized[i] - t.normalized[i]).abs() <= 1e-12 * s.normalized[i].abs().max(1e-3));
                prop_assert!(s.denominators[i] > 0.0);
                let back = s.normalized[i] * s.denominators[i];
                prop_assert!((back - raw[i]).abs() <= 4.0 * f64::EPSILON * raw[i].abs());
            }
        }

        #[test]
        fn frozen_denominators_ignore_post_onset_consumption(
            base in prop::collection::vec(50.0..500.0f64, 60),
            bump in prop::collection::vec(0.0..500.0f64, 20),
        ) {
            let onset = d("2019-01-01") + Days::new(40);
            let c = consumption("2019-01-01", base.clone());
            let mut changed = base.clone();
            for (v, b) in changed[40..].iter_mut().zip(&bump) {
                *v += b;
            }
            let c2 = consumption("2019-01-01", changed);
            let raw = vec![1.0; 60];
            let s1 = normalize(d("2019-01-01"), &raw, &c, Some(onset)).unwrap();
            let s2 = normalize(d("2019-01-01"), &raw, &c2, Some(onset)).unwrap();
            prop_assert_eq!(&s1.normalized[40..], &s2.normalized[40..]);
        }

        #[test]
        fn year_difference_is_antisymmetric(
            ra in prop::collection::vec(-0.3..0.3f64, 120),
            rb in prop::collection::vec(-0.3..0.3f64, 121),
            use_calendar in any::<bool>(),
        ) {
            let a = rho_series("2019-02-01", ra);
            let b = rho_series("2020-02-01", rb);
            let cal = if use_calendar { good_friday() } else { HolidayCalendar::default() };
            let ab = year_difference(&a, &b, &cal).unwrap();
            let ba = year_difference(&b, &a, &cal).unwrap();
            prop_assert_eq!(ab.len(), ba.len());
            for (x, y) in ab.iter().zip(&ba) {
                prop_assert_eq!((x.month, x.day), (y.month, y.day));
                prop_assert_eq!(x.diff, -y.diff);
                prop_assert_eq!(&x.label, &y.label);
            }
        }

        #[test]
        fn moving_average_mean_and_constants(
            v in prop::collection::vec(-10.0..10.0f64, 20..200),
            c in -5.0..5.0f64,
        ) {
            let ma = moving_average(&v, 7).unwrap();
            let drift = (mean(&ma) - mean(&v)).abs();
            // Edge truncation touches at most 3 days at each end.
            prop_assert!(drift <= 6.0 * 20.0 / v.len() as f64);
            let flat = moving_average(&vec![c; v.len()], 7).unwrap();
            prop_assert!(flat.iter().all(|x| (x - c).abs() <= 1e-12));
            prop_assert_eq!(moving_average(&flat, 7).unwrap().len(), flat.len());
        }

        #[test]
        fn summary_of_concatenation_is_weighted(
            v in prop::collection::vec(-0.5..0.5f64, 2..120),
            cut in 1usize..119,
        ) {
            prop_assume!(cut < v.len());
            let s = rho_series("2020-01-01", v.clone());
            let first = DateSpan::with_len(s.start_date, cut);
            let second = DateSpan::new(next_day(first.end), s.span().end);
            let whole = period_summary(&s, &s.span()).unwrap();
            let parts = (period_summary(&s, &first).unwrap() * first.len() as f64
                + period_summary(&s, &second).unwrap() * second.len() as f64)
                / v.len() as f64;
            prop_assert!((whole - parts).abs() < 1e-12);
        }
    }
}
