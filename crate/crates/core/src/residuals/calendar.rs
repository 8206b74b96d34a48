use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::{DateSpan, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedHoliday {
    pub month: u32,
    pub day: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovableHoliday {
    #[serde(with = "crate::span::toml_date_rw")]
    pub date: NaiveDate,
    pub name: String,
}

/// Two date ranges in different years to be compared with each other, e.g.
/// the days around Good Friday in consecutive years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPair {
    pub name: String,
    pub first: DateSpan,
    pub second: DateSpan,
}

/// Holidays and cross-year alignment pairs.
///
/// Stored as TOML:
///
/// ```toml
/// [[fixed]]
/// month = 5
/// day = 1
/// name = "May Day"
///
/// [[movable]]
/// date = "2020-04-10"
/// name = "Good Friday"
///
/// [[align]]
/// name = "Good Friday"
/// first = "2019-04-18..2019-04-20"
/// second = "2020-04-09..2020-04-12"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HolidayCalendar {
    #[serde(default)]
    pub fixed: Vec<FixedHoliday>,
    #[serde(default)]
    pub movable: Vec<MovableHoliday>,
    #[serde(default, rename = "align")]
    pub alignments: Vec<AlignmentPair>,
}

impl HolidayCalendar {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cal: HolidayCalendar =
            toml::from_str(text).map_err(|e| Error::Calendar(e.to_string().trim().replace('\n', " ")))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calendar serializes")
    }

    /// Checks that each pair spans two years, fits within one year per side,
    /// and that aligned ranges do not overlap within a year.
    pub fn validate(&self) -> Result<()> {
        for h in &self.fixed {
            if NaiveDate::from_ymd_opt(2020, h.month, h.day).is_none() {
                return Err(Error::Calendar(format!(
                    "holiday '{}' has invalid month/day {}/{}",
                    h.name, h.month, h.day
                )));
            }
        }
        let mut ranges: Vec<(&str, DateSpan)> = Vec::new();
        for p in &self.alignments {
            for r in [p.first, p.second] {
                if r.start.year() != r.end.year() {
                    return Err(Error::Calendar(format!("range {r} of '{}' crosses a year boundary", p.name)));
                }
            }
            if p.first.start.year() == p.second.start.year() {
                return Err(Error::Calendar(format!(
                    "alignment '{}' pairs two ranges in the same year",
                    p.name
                )));
            }
            for r in [p.first, p.second] {
                if let Some((other, _)) = ranges.iter().find(|(_, q)| q.overlaps(&r)) {
                    return Err(Error::Calendar(format!(
                        "aligned range {r} of '{}' overlaps a range of '{other}'",
                        p.name
                    )));
                }
                ranges.push((&p.name, r));
            }
        }
        Ok(())
    }

    /// Name of the holiday falling on `date`, if any.
    pub fn holiday_name(&self, date: NaiveDate) -> Option<&str> {
        self.movable
            .iter()
            .find(|h| h.date == date)
            .map(|h| h.name.as_str())
            .or_else(|| {
                self.fixed
                    .iter()
                    .find(|h| h.month == date.month() && h.day == date.day())
                    .map(|h| h.name.as_str())
            })
    }

    /// Alignment pairs linking `year_a` and `year_b`, oriented as
    /// `(name, range in year_a, range in year_b)`.
    pub fn pairs_between(&self, year_a: i32, year_b: i32) -> Vec<(&str, DateSpan, DateSpan)> {
        self.alignments
            .iter()
            .filter_map(|p| {
                let (fy, sy) = (p.first.start.year(), p.second.start.year());
                if fy == year_a && sy == year_b {
                    Some((p.name.as_str(), p.first, p.second))
                } else if fy == year_b && sy == year_a {
                    Some((p.name.as_str(), p.second, p.first))
                } else {
                    None
                }
            })
            .collect()
    }
}
