use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::median;
use crate::{DateSpan, Error, Result};

const HEADER: [&str; 4] = ["date", "region", "class", "kwh"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsumerClass {
    Business,
    Private,
}

impl fmt::Display for ConsumerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsumerClass::Business => "business",
            ConsumerClass::Private => "private",
        })
    }
}

impl FromStr for ConsumerClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "business" => Ok(ConsumerClass::Business),
            "private" => Ok(ConsumerClass::Private),
            other => Err(format!("unknown consumer class '{other}'")),
        }
    }
}

/// One metered daily total.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionRecord {
    pub date: NaiveDate,
    pub region: String,
    pub consumer_class: ConsumerClass,
    /// kWh, ≥ 0
    pub energy: f64,
}

/// Contiguous daily consumption of one aggregation group.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionSeries {
    /// Region name, or `*` when all regions were summed.
    pub region: String,
    /// `None` when both consumer classes were summed.
    pub consumer_class: Option<ConsumerClass>,
    pub start_date: NaiveDate,
    /// Daily kWh starting at `start_date`.
    pub values: Vec<f64>,
}

impl ConsumptionSeries {
    pub fn span(&self) -> DateSpan {
        DateSpan::with_len(self.start_date, self.values.len())
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.span().index_of(date).map(|i| self.values[i])
    }

    /// Values over `span`, or `None` if the series does not cover it.
    pub fn slice(&self, span: &DateSpan) -> Option<&[f64]> {
        let i = self.span().index_of(span.start)?;
        self.span().index_of(span.end)?;
        Some(&self.values[i..i + span.len()])
    }

    /// `region/class` label used in reports.
    pub fn label(&self) -> String {
        match self.consumer_class {
            Some(c) => format!("{}/{}", self.region, c),
            None => format!("{}/all", self.region),
        }
    }

    /// Multiplies every value by `k`.
    pub fn scaled(&self, k: f64) -> ConsumptionSeries {
        ConsumptionSeries {
            values: self.values.iter().map(|v| v * k).collect(),
            ..self.clone()
        }
    }
}

/// Which records [`aggregate`] sums; `None` matches everything.
#[derive(Debug, Clone, Default)]
pub struct Selection {
    pub region: Option<String>,
    pub class: Option<ConsumerClass>,
}

impl Selection {
    pub fn new(region: impl Into<String>, class: ConsumerClass) -> Self {
        Selection {
            region: Some(region.into()),
            class: Some(class),
        }
    }

    fn matches(&self, r: &ConsumptionRecord) -> bool {
        self.region.as_deref().is_none_or(|reg| reg == r.region)
            && self.class.is_none_or(|c| c == r.consumer_class)
    }
}

/// Parses the consumption CSV (`date,region,class,kwh`).
pub fn parse_consumption<R: Read>(input: R) -> Result<Vec<ConsumptionRecord>> {
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
            message: format!("expected header '{}'", HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let format_err = |message: String| Error::Format { line, message };
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| format_err(format!("invalid date '{}'", &record[0])))?;
        let region = record[1].to_string();
        if region.is_empty() {
            return Err(format_err("empty region".into()));
        }
        let consumer_class = record[2].parse().map_err(format_err)?;
        let energy: f64 = record[3]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| format_err(format!("invalid kwh '{}'", &record[3])))?;
        if energy < 0.0 {
            return Err(Error::Validation {
                line,
                message: format!("negative energy {energy}"),
            });
        }
        records.push(ConsumptionRecord {
            date,
            region,
            consumer_class,
            energy,
        });
    }
    Ok(records)
}

/// Writes records in the consumption CSV layout.
pub fn write_consumption<W: Write>(output: W, records: &[ConsumptionRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(HEADER)?;
    for r in records {
        writer.write_record([
            r.date.to_string(),
            r.region.clone(),
            r.consumer_class.to_string(),
            r.energy.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Sums matching records per day into a contiguous series.
///
/// Per-day contributions are summed in sorted order, so the result does not
/// depend on record order.
pub fn aggregate(records: &[ConsumptionRecord], selection: &Selection) -> Result<ConsumptionSeries> {
    let mut by_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| selection.matches(r)) {
        by_day.entry(r.date).or_default().push(r.energy);
    }
    let (Some((&start, _)), Some((&end, _))) = (by_day.first_key_value(), by_day.last_key_value())
    else {
        return Err(Error::NoData);
    };
    let span = DateSpan::new(start, end);
    let missing: Vec<NaiveDate> = span.dates().filter(|d| !by_day.contains_key(d)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingDates(missing));
    }
    let values = by_day
        .into_values()
        .map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.iter().sum()
        })
        .collect();
    Ok(ConsumptionSeries {
        region: selection.region.clone().unwrap_or_else(|| "*".into()),
        consumer_class: selection.class,
        start_date: start,
        values,
    })
}

/// One day replaced by outlier repair.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRepair {
    pub date: NaiveDate,
    pub old: f64,
    pub new: f64,
}

/// Replaces isolated outlying days by the mean of their neighbours.
///
/// Each day is compared with a window of `window_days` consecutive days that
/// contains it (centered where the series allows, shifted inward at the
/// edges). Excluding the day itself, it is an outlier when its distance from
/// the window median exceeds `mad_threshold` times the window's median absolute
/// deviation. Outliers take the mean of the nearest non-outlying day on each
/// side (or the one available side at a series edge).
///
/// When more than 10% of the days (rounded up) are flagged the data has a
/// systematic problem and repair is refused.
pub fn repair_consumption_outliers(
    series: &ConsumptionSeries,
    window_days: usize,
    mad_threshold: f64,
) -> Result<(ConsumptionSeries, Vec<OutlierRepair>)> {
    let n = series.values.len();
    if window_days < 2 {
        return Err(Error::Parameter("outlier window must be at least 2 days".into()));
    }
    if n <= window_days {
        return Err(Error::Parameter(format!(
            "series of {n} days is not longer than the {window_days}-day outlier window"
        )));
    }
    let v = &series.values;
    let half = window_days / 2;
    let flagged: Vec<bool> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - window_days);
            let neighbours: Vec<f64> = (start..start + window_days)
                .filter(|&j| j != i)
                .map(|j| v[j])
                .collect();
            let med = median(&neighbours);
            let deviations: Vec<f64> = neighbours.iter().map(|x| (x - med).abs()).collect();
            let mad = median(&deviations);
            (v[i] - med).abs() > mad_threshold * mad
        })
        .collect();

    let count = flagged.iter().filter(|&&f| f).count();
    if count > n.div_ceil(10) {
        return Err(Error::TooManyOutliers { flagged: count, total: n });
    }

    let mut values = v.clone();
    let mut log = Vec::new();
    for i in (0..n).filter(|&i| flagged[i]) {
        let prev = (0..i).rev().find(|&j| !flagged[j]).map(|j| v[j]);
        let next = (i + 1..n).find(|&j| !flagged[j]).map(|j| v[j]);
        let new = match (prev, next) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("at most 10% of days are flagged"),
        };
        values[i] = new;
        log.push(OutlierRepair {
            date: series.start_date + Days::new(i as u64),
            old: v[i],
            new,
        });
    }
    Ok((
        ConsumptionSeries {
            values,
            ..series.clone()
        },
        log,
    ))
}
