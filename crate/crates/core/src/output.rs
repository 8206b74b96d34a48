//! Output directory handling and the tabular files written by the tool.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! re-reading a file reproduces the in-memory values exactly.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::ingest::ConsumerClass;
use crate::residuals::DiffSlot;
use crate::{Error, Result};

/// Directory receiving the files of one command run.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    /// Creates the directory (and parents) if needed.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(OutputDir { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes `name` by filling a temporary file in the same directory and
    /// renaming it into place, so readers never see a partial file.
    pub fn write<F>(&self, name: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let result = (|| {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            fill(&mut w)?;
            w.flush()?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
            fs::rename(&tmp, &target)?;
            Ok(())
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result.map(|_| target)
    }

    pub fn write_str(&self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

/// Year-difference table with its moving average:
/// `month_day,date_a,date_b,diff,diff_ma7,label`.
pub fn write_difference_csv<W: Write>(output: W, slots: &[DiffSlot], smoothed: &[f64]) -> Result<()> {
    if slots.len() != smoothed.len() {
        return Err(Error::Parameter(format!(
            "{} slots but {} smoothed values",
            slots.len(),
            smoothed.len()
        )));
    }
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["month_day", "date_a", "date_b", "diff", "diff_ma7", "label"])?;
    for (s, ma) in slots.iter().zip(smoothed) {
        w.write_record([
            format!("{:02}-{:02}", s.month, s.day),
            s.date_a.to_string(),
            s.date_b.to_string(),
            s.diff.to_string(),
            ma.to_string(),
            s.label.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A row read back from a difference table.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceRow {
    pub month_day: String,
    pub date_a: NaiveDate,
    pub date_b: NaiveDate,
    pub diff: f64,
    pub diff_ma7: f64,
    pub label: String,
}

pub fn read_difference_csv<R: Read>(input: R) -> Result<Vec<DifferenceRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            let field = |k: usize| rec.get(k).ok_or_else(|| format_err(line, "missing column"));
            Ok(DifferenceRow {
                month_day: field(0)?.to_string(),
                date_a: parse_date(field(1)?, line)?,
                date_b: parse_date(field(2)?, line)?,
                diff: parse_f64(field(3)?, line)?,
                diff_ma7: parse_f64(field(4)?, line)?,
                label: field(5)?.to_string(),
            })
        })
        .collect()
}

/// Mean `ρ` of one (region, class) group over the summary range.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub region: String,
    pub class: Option<ConsumerClass>,
    pub mean_rho: f64,
    pub days: usize,
}

/// `region,class,mean_rho,days`; an unrestricted class is written as `all`.
pub fn write_summary_csv<W: Write>(output: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["region", "class", "mean_rho", "days"])?;
    for r in rows {
        w.write_record([
            r.region.clone(),
            r.class.map_or_else(|| "all".to_string(), |c| c.to_string()),
            r.mean_rho.to_string(),
            r.days.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            let field = |k: usize| rec.get(k).ok_or_else(|| format_err(line, "missing column"));
            let class = match field(1)? {
                "all" => None,
                c => Some(c.parse().map_err(|e: String| format_err(line, &e))?),
            };
            Ok(SummaryRow {
                region: field(0)?.to_string(),
                class,
                mean_rho: parse_f64(field(2)?, line)?,
                days: field(3)?.parse().map_err(|_| format_err(line, "invalid day count"))?,
            })
        })
        .collect()
}

/// Two-column `metric,value` report.
pub fn write_report_csv<W: Write>(output: W, entries: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["metric", "value"])?;
    for (k, v) in entries {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok((rec.get(0).unwrap_or("").to_string(), rec.get(1).unwrap_or("").to_string()))
        })
        .collect()
}

fn format_err(line: usize, message: &str) -> Error {
    Error::Format {
        line,
        message: message.to_string(),
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format_err(line, &format!("invalid date '{s}'")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| format_err(line, &format!("invalid number '{s}'")))
}
