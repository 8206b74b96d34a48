use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

/// Inclusive range of calendar days, written `START..END` in text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DateSpan {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateSpan {
    /// Panics if `end` precedes `start`.
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        assert!(start <= end, "span end {end} precedes start {start}");
        DateSpan { start, end }
    }

    /// `days` consecutive days beginning at `start`; `days` must be ≥ 1.
    pub fn with_len(start: NaiveDate, days: usize) -> Self {
        assert!(days >= 1, "empty span");
        DateSpan {
            start,
            end: start + Days::new(days as u64 - 1),
        }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn contains_span(&self, other: &DateSpan) -> bool {
        self.contains(other.start) && self.contains(other.end)
    }

    pub fn overlaps(&self, other: &DateSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn midpoint(&self) -> NaiveDate {
        self.start + Days::new(self.len() as u64 / 2)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.start.iter_days().take(self.len())
    }

    /// Offset of `date` from the span start, if it lies inside.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.contains(date)
            .then(|| (date - self.start).num_days() as usize)
    }
}

impl fmt::Display for DateSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for DateSpan {
    type Err = String;

    /// Parses `YYYY-MM-DD..YYYY-MM-DD` (inclusive) or `YYYY-MM-DD+N` (N days).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |d: &str| {
            NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
                .map_err(|e| format!("invalid date '{d}': {e}"))
        };
        if let Some((a, b)) = s.split_once("..") {
            let (start, end) = (parse(a)?, parse(b)?);
            if end < start {
                return Err(format!("span '{s}' ends before it starts"));
            }
            Ok(DateSpan { start, end })
        } else if let Some((a, n)) = s.split_once('+') {
            let days: usize = n
                .trim()
                .parse()
                .map_err(|_| format!("invalid day count in '{s}'"))?;
            if days == 0 {
                return Err(format!("span '{s}' is empty"));
            }
            Ok(DateSpan::with_len(parse(a)?, days))
        } else {
            Err(format!(
                "invalid span '{s}', expected START..END or START+DAYS"
            ))
        }
    }
}

impl TryFrom<String> for DateSpan {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DateSpan> for String {
    fn from(span: DateSpan) -> String {
        span.to_string()
    }
}


/// Dates in TOML files may be written as native date literals or strings.
pub(crate) mod toml_date {
    use chrono::NaiveDate;
    use serde::{de, Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Literal(toml::value::Datetime),
    }

    fn convert<E: de::Error>(raw: Raw) -> Result<NaiveDate, E> {
        match raw {
            Raw::Text(s) => s.parse().map_err(|_| E::custom(format!("invalid date '{s}'"))),
            Raw::Literal(dt) => match (dt.date, dt.time) {
                (Some(d), None) => NaiveDate::from_ymd_opt(d.year.into(), d.month.into(), d.day.into())
                    .ok_or_else(|| E::custom(format!("invalid date {dt}"))),
                _ => Err(E::custom(format!("expected a date without time, found {dt}"))),
            },
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        convert(Raw::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
            Option::<Raw>::deserialize(d)?.map(convert).transpose()
        }
    }
}

/// [`toml_date`] for reading, plain `YYYY-MM-DD` strings for writing.
pub(crate) mod toml_date_rw {
    use chrono::NaiveDate;
    use serde::Serializer;

    pub use super::toml_date::deserialize;

    pub fn serialize<S: Serializer>(date: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(date)
    }
}
