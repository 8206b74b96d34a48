//! Explainable decomposition of daily electricity consumption.
//!
//! Daily consumption of one (region, consumer class) group is regressed, with
//! no intercept, against ten prediction vectors:
//!
//! | column | factor |
//! |--------|--------|
//! | 1–7    | weekday indicators (Monday … Sunday) |
//! | 8      | thermal load `|T − 20 °C|` |
//! | 9      | effective daylight hours (solar altitude and cloud cover) |
//! | 10     | wind loss, mean squared wind speed × thermal load |
//!
//! The fit is trained on a short window, extrapolated forward, and whatever it
//! does not explain is reported as normalized residual demand `ρ`. After a
//! declared onset date the normalization denominator is frozen, so `ρ` measures
//! the shift relative to the pre-onset consumption level.
//!
//! The crate is organized along the processing chain:
//!
//! - [`ingest`]: weather and consumption CSV parsing, gap filling, outlier
//!   repair and aggregation.
//! - [`solar`]: low-precision solar ephemeris and the effective-daylight factor.
//! - [`features`]: the N×10 feature matrix.
//! - [`regress`]: zero-intercept least squares, prediction and rescaling.
//! - [`residuals`]: normalization, year-over-year differencing, smoothing and
//!   period summaries.
//! - [`synth`]: seeded synthetic scenarios with known ground truth.
//! - [`cli`]: the `demand-decomp` command line tool and its file outputs.
//!
//! ```
//! use demand_decomp::features::{thermal_factor, wind_loss_factor};
//!
//! let thermal = thermal_factor(-5.0, 20.0);
//! assert_eq!(thermal, 25.0);
//! assert_eq!(wind_loss_factor(9.0, thermal), 225.0);
//! ```

pub mod cli;
pub mod features;
pub mod ingest;
mod linalg;
pub mod output;
pub mod plot;
pub mod regress;
pub mod residuals;
pub mod solar;
mod span;
pub mod synth;

pub use span::DateSpan;

use chrono::NaiveDate;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input does not follow the documented file layout.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    /// A parsed value is outside its physical range.
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    /// A run of missing weather values exceeds the configured limit.
    #[error("{field} gap of {hours} h from {from} to {to} exceeds the {limit} h limit")]
    GapTooLong {
        field: &'static str,
        from: String,
        to: String,
        hours: usize,
        limit: usize,
    },
    /// Too few valid samples to interpolate a field.
    #[error("field {0} has fewer than two valid samples")]
    InsufficientSamples(&'static str),
    /// Outlier detection flagged more days than a plausible outlier rate.
    #[error("{flagged} of {total} days flagged as outliers; refusing to repair")]
    TooManyOutliers { flagged: usize, total: usize },
    /// Selection matched no consumption records.
    #[error("no consumption records match the selection")]
    NoData,
    /// Dates are missing from a series that must be contiguous.
    #[error("missing dates: {}", format_dates(.0))]
    MissingDates(Vec<NaiveDate>),
    /// Feature inputs do not cover the requested dates.
    #[error("no {what} for dates: {}", format_dates(.dates))]
    Coverage {
        what: &'static str,
        dates: Vec<NaiveDate>,
    },
    /// An instant outside the supported ephemeris range.
    #[error("{0}")]
    Domain(String),
    /// The normal matrix is singular or too ill-conditioned to solve.
    #[error("rank-deficient normal matrix (condition {condition:.3e}); dependent columns: {}", .columns.join(", "))]
    RankDeficient {
        condition: f64,
        columns: Vec<&'static str>,
    },
    /// The model predicts zero mean consumption over the estimation window.
    #[error("degenerate model: {0}")]
    Degenerate(String),
    /// Onset date leaves fewer than 30 days of prior history.
    #[error("onset {onset} leaves {available} days of history, 30 required")]
    InsufficientHistory { onset: NaiveDate, available: usize },
    /// Holiday calendar inconsistent with the series being compared.
    #[error("calendar: {0}")]
    Calendar(String),
    /// An argument violates an operation's precondition.
    #[error("{0}")]
    Parameter(String),
    /// Synthetic generation produced an impossible value.
    #[error("generation: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable kebab-case identifier of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format { .. } => "format",
            Error::Validation { .. } => "validation",
            Error::GapTooLong { .. } => "gap-too-long",
            Error::InsufficientSamples(_) => "insufficient-samples",
            Error::TooManyOutliers { .. } => "too-many-outliers",
            Error::NoData => "no-data",
            Error::MissingDates(_) => "missing-dates",
            Error::Coverage { .. } => "coverage",
            Error::Domain(_) => "domain",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::Degenerate(_) => "degenerate-model",
            Error::InsufficientHistory { .. } => "insufficient-history",
            Error::Calendar(_) => "calendar",
            Error::Parameter(_) => "parameter",
            Error::Generation(_) => "generation",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

fn format_dates(dates: &[NaiveDate]) -> String {
    const SHOWN: usize = 10;
    let mut s = dates
        .iter()
        .take(SHOWN)
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    if dates.len() > SHOWN {
        s.push_str(&format!(" (+{} more)", dates.len() - SHOWN));
    }
    s
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
