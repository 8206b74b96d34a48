//! Zero-intercept least squares on the ten prediction vectors.
//!
//! The seven weekday indicators sum to the constant vector, so the model has
//! no separate intercept; the coefficients solve the 10×10 normal equations
//! `G α = b` with `G[μ][ν] = Σᵢ fᵢ^μ fᵢ^ν` and `b[ν] = Σᵢ cᵢ fᵢ^ν`.

use std::io::Write;

use chrono::{Datelike, NaiveDate};

use crate::features::{FeatureMatrix, FeatureRow, FACTOR_NAMES, N_FACTORS};
use crate::ingest::ConsumptionSeries;
use crate::linalg::{cholesky_solve, lu_solve, symmetric_eigen, Matrix};
use crate::{DateSpan, Error, Result};

pub const DEFAULT_TRAINING_DAYS: usize = 30;
pub const MIN_TRAINING_DAYS: usize = N_FACTORS;
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;
pub const MIN_SCALE_WINDOW_DAYS: usize = 7;
/// Training windows centered closer than this to a solstice get a warning.
pub const SOLSTICE_MARGIN_DAYS: i64 = 45;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Largest acceptable condition number of the equilibrated Gram matrix.
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_condition: DEFAULT_MAX_CONDITION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Cholesky,
    /// Partial-pivoting elimination, used when Cholesky breaks down.
    PivotedLu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// α₁ … α₁₀ in feature column order, kWh per factor unit.
    pub coefficients: [f64; N_FACTORS],
    pub training: DateSpan,
    /// 2-norm condition number of the Gram matrix after scaling it to unit
    /// diagonal.
    pub gram_condition: f64,
    pub solver: Solver,
    pub warnings: Vec<String>,
}

impl RegressionFit {
    pub fn training_start(&self) -> NaiveDate {
        self.training.start
    }

    pub fn training_end(&self) -> NaiveDate {
        self.training.end
    }

    /// Unscaled model value for one feature row.
    pub fn evaluate(&self, row: &FeatureRow) -> f64 {
        self.coefficients.iter().zip(row).map(|(a, f)| a * f).sum()
    }

    /// Writes `factor,alpha` rows with the training metadata as `#` comments.
    pub fn write_csv<W: Write>(&self, mut output: W) -> Result<()> {
        writeln!(output, "# training_start={}", self.training.start)?;
        writeln!(output, "# training_end={}", self.training.end)?;
        writeln!(output, "# training_days={}", self.training.len())?;
        writeln!(output, "# gram_condition={:e}", self.gram_condition)?;
        writeln!(output, "factor,alpha")?;
        for (name, alpha) in FACTOR_NAMES.iter().zip(&self.coefficients) {
            writeln!(output, "{name},{alpha}")?;
        }
        Ok(())
    }
}

/// Gram matrix and right-hand side of the normal equations.
pub fn normal_equations(rows: &[FeatureRow], consumption: &[f64]) -> (Matrix<N_FACTORS>, [f64; N_FACTORS]) {
    let mut g = [[0.0; N_FACTORS]; N_FACTORS];
    let mut b = [0.0; N_FACTORS];
    for (row, c) in rows.iter().zip(consumption) {
        for mu in 0..N_FACTORS {
            b[mu] += c * row[mu];
            for nu in mu..N_FACTORS {
                g[mu][nu] += row[mu] * row[nu];
            }
        }
    }
    for mu in 0..N_FACTORS {
        for nu in 0..mu {
            g[mu][nu] = g[nu][mu];
        }
    }
    (g, b)
}

/// Fits the model over `window` with default options.
pub fn fit(features: &FeatureMatrix, consumption: &ConsumptionSeries, window: &DateSpan) -> Result<RegressionFit> {
    fit_with(features, consumption, window, &FitOptions::default())
}

pub fn fit_with(
    features: &FeatureMatrix,
    consumption: &ConsumptionSeries,
    window: &DateSpan,
    options: &FitOptions,
) -> Result<RegressionFit> {
    let rows = features.slice(window)?;
    let values = consumption.slice(window).ok_or_else(|| Error::Coverage {
        what: "consumption",
        dates: window
            .dates()
            .filter(|d| consumption.get(*d).is_none())
            .collect(),
    })?;
    let (g, b) = normal_equations(rows, values);

    // Equilibrate to unit diagonal so the condition number is unit-free.
    let zero_columns: Vec<&'static str> = (0..N_FACTORS)
        .filter(|&k| g[k][k] <= 0.0)
        .map(|k| FACTOR_NAMES[k])
        .collect();
    if !zero_columns.is_empty() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
            columns: zero_columns,
        });
    }
    let d: [f64; N_FACTORS] = std::array::from_fn(|k| 1.0 / g[k][k].sqrt());
    let scaled: Matrix<N_FACTORS> = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j] * d[i] * d[j]));
    let scaled_b: [f64; N_FACTORS] = std::array::from_fn(|k| b[k] * d[k]);

    let (eigenvalues, eigenvectors) = symmetric_eigen(&scaled);
    let max = eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };

    if window.len() < MIN_TRAINING_DAYS || condition > options.max_condition {
        let cutoff = max / options.max_condition;
        let mut dependent = [false; N_FACTORS];
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            if lambda <= cutoff || window.len() < MIN_TRAINING_DAYS && lambda <= max * 1e-9 {
                for k in 0..N_FACTORS {
                    if eigenvectors[k][j].abs() > 0.1 {
                        dependent[k] = true;
                    }
                }
            }
        }
        return Err(Error::RankDeficient {
            condition,
            columns: (0..N_FACTORS)
                .filter(|&k| dependent[k])
                .map(|k| FACTOR_NAMES[k])
                .collect(),
        });
    }

    let (y, solver) = match cholesky_solve(&scaled, &scaled_b) {
        Some(y) => (y, Solver::Cholesky),
        None => (
            lu_solve(&scaled, &scaled_b).ok_or_else(|| Error::RankDeficient {
                condition,
                columns: Vec::new(),
            })?,
            Solver::PivotedLu,
        ),
    };
    let coefficients: [f64; N_FACTORS] = std::array::from_fn(|k| y[k] * d[k]);
    if coefficients.iter().any(|a| !a.is_finite()) {
        return Err(Error::Degenerate("non-finite coefficients".into()));
    }

    let mut warnings = Vec::new();
    if let Some(days) = days_to_solstice(window.midpoint()) {
        if days < SOLSTICE_MARGIN_DAYS && window.len() < 2 * DEFAULT_TRAINING_DAYS {
            warnings.push(format!(
                "training window {window} is centered {days} days from a solstice; \
                 consider at least {} days",
                2 * DEFAULT_TRAINING_DAYS
            ));
        }
    }

    Ok(RegressionFit {
        coefficients,
        training: *window,
        gram_condition: condition,
        solver,
        warnings,
    })
}

fn days_to_solstice(date: NaiveDate) -> Option<i64> {
    let y = date.year();
    [(y - 1, 12), (y, 6), (y, 12), (y + 1, 6)]
        .into_iter()
        .filter_map(|(year, month)| NaiveDate::from_ymd_opt(year, month, 21))
        .map(|s| (s - date).num_days().abs())
        .min()
}

/// Model output over a span of days.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub start_date: NaiveDate,
    pub predicted: Vec<f64>,
    /// Multiplier already applied to `predicted`.
    pub scale_factor: f64,
}

impl Prediction {
    pub fn span(&self) -> DateSpan {
        DateSpan::with_len(self.start_date, self.predicted.len())
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.span().index_of(date).map(|i| self.predicted[i])
    }

    /// Multiplies predictions (and the recorded scale factor) by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Prediction> {
        check_scale(factor)?;
        Ok(Prediction {
            start_date: self.start_date,
            predicted: self.predicted.iter().map(|p| p * factor).collect(),
            scale_factor: self.scale_factor * factor,
        })
    }
}

fn check_scale(factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Parameter(format!("scale factor {factor} must be positive")));
    }
    Ok(())
}

/// `scale_factor × Σ_μ α_μ f^μ` for every day of `span`.
pub fn predict(fit: &RegressionFit, features: &FeatureMatrix, span: &DateSpan, scale_factor: f64) -> Result<Prediction> {
    check_scale(scale_factor)?;
    let rows = features.slice(span)?;
    Ok(Prediction {
        start_date: span.start,
        predicted: rows.iter().map(|r| scale_factor * fit.evaluate(r)).collect(),
        scale_factor,
    })
}

/// Ratio of mean observed to mean unscaled predicted consumption over a
/// window after the training period.
pub fn estimate_scale(
    fit: &RegressionFit,
    features: &FeatureMatrix,
    consumption: &ConsumptionSeries,
    window: &DateSpan,
) -> Result<f64> {
    if window.overlaps(&fit.training) {
        return Err(Error::Parameter(format!(
            "scale window {window} overlaps training window {}",
            fit.training
        )));
    }
    if window.len() < MIN_SCALE_WINDOW_DAYS {
        return Err(Error::Parameter(format!(
            "scale window {window} shorter than {MIN_SCALE_WINDOW_DAYS} days"
        )));
    }
    let observed = consumption.slice(window).ok_or_else(|| Error::Coverage {
        what: "consumption",
        dates: window.dates().filter(|d| consumption.get(*d).is_none()).collect(),
    })?;
    let predicted = predict(fit, features, window, 1.0)?;
    let n = window.len() as f64;
    let mean_observed = observed.iter().sum::<f64>() / n;
    let mean_predicted = predicted.predicted.iter().sum::<f64>() / n;
    if mean_predicted <= 0.0 || !mean_predicted.is_finite() {
        return Err(Error::Degenerate(format!(
            "mean prediction {mean_predicted} over {window}"
        )));
    }
    let ratio = mean_observed / mean_predicted;
    if !(ratio > 0.0) {
        return Err(Error::Degenerate(format!("scale ratio {ratio} over {window}")));
    }
    Ok(ratio)
}

/// `cᵢ − predictedᵢ` over the prediction span.
pub fn raw_residuals(consumption: &ConsumptionSeries, prediction: &Prediction) -> Result<Vec<f64>> {
    let span = prediction.span();
    let observed = consumption.slice(&span).ok_or_else(|| Error::Coverage {
        what: "consumption",
        dates: span.dates().filter(|d| consumption.get(*d).is_none()).collect(),
    })?;
    Ok(observed
        .iter()
        .zip(&prediction.predicted)
        .map(|(c, p)| c - p)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{feature_row, THERMAL};
    use crate::ingest::ConsumerClass;
    use chrono::Days;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    // Deterministic but irregular weather: a cheap hash of the day index.
    fn wobble(i: usize, salt: u64) -> f64 {
        let mut x = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt;
        x ^= x >> 31;
        x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x ^= x >> 29;
        (x % 10_000) as f64 / 10_000.0
    }

    fn matrix(start: &str, days: usize) -> FeatureMatrix {
        let start = d(start);
        let rows = (0..days)
            .map(|i| {
                let t = -10.0 + 20.0 * wobble(i, 1);
                let w2 = 5.0 + 40.0 * wobble(i, 2);
                let light = 2.0 + 8.0 * wobble(i, 3);
                feature_row(start + Days::new(i as u64), t, w2, light, 20.0)
            })
            .collect();
        FeatureMatrix { start_date: start, rows }
    }

    fn consumption_from(m: &FeatureMatrix, alpha: &[f64; N_FACTORS]) -> ConsumptionSeries {
        ConsumptionSeries {
            region: "R".into(),
            consumer_class: Some(ConsumerClass::Business),
            start_date: m.start_date,
            values: m.rows.iter().map(|r| r.iter().zip(alpha).map(|(f, a)| f * a).sum()).collect(),
        }
    }

    const ALPHA: [f64; N_FACTORS] = [900., 950., 960., 955., 930., 700., 650., 12., -15., 0.4];

    #[test]
    fn recovers_pure_thermal_model() {
        let m = matrix("2020-02-01", 30);
        let mut alpha = [0.0; N_FACTORS];
        alpha[THERMAL] = 100.0;
        let c = consumption_from(&m, &alpha);
        let f = fit(&m, &c, &m.span()).unwrap();
        assert!((f.coefficients[THERMAL] - 100.0).abs() < 1e-8 * 100.0);
        let p = predict(&f, &m, &m.span(), 1.0).unwrap();
        let r = raw_residuals(&c, &p).unwrap();
        let mean = c.values.iter().sum::<f64>() / 30.0;
        assert!(r.iter().all(|x| x.abs() <= 1e-8 * mean));
    }

    #[test]
    fn week_is_rank_deficient() {
        let m = matrix("2020-02-01", 30);
        let c = consumption_from(&m, &ALPHA);
        let err = fit(&m, &c, &DateSpan::with_len(d("2020-02-01"), 7)).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }), "{err:?}");
    }

    #[test]
    fn missing_weekday_names_the_column() {
        let mut m = matrix("2020-02-01", 30);
        for row in m.rows.iter_mut() {
            if row[6] == 1.0 {
                row[6] = 0.0;
            }
        }
        let c = consumption_from(&m, &ALPHA);
        match fit(&m, &c, &m.span()) {
            Err(Error::RankDeficient { columns, .. }) => assert_eq!(columns, vec!["sun"]),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn collinear_columns_are_reported() {
        let mut m = matrix("2020-02-01", 30);
        for row in m.rows.iter_mut() {
            row[8] = 2.0 * row[7];
        }
        let c = consumption_from(&m, &ALPHA);
        match fit(&m, &c, &m.span()) {
            Err(Error::RankDeficient { columns, .. }) => {
                assert!(columns.contains(&"thermal") && columns.contains(&"daylight"), "{columns:?}");
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn scale_factor_behaviour() {
        let m = matrix("2020-02-01", 60);
        let c = consumption_from(&m, &ALPHA);
        let f = fit(&m, &c, &DateSpan::with_len(d("2020-02-01"), 30)).unwrap();
        let span = m.span();
        let unscaled = predict(&f, &m, &span, 1.0).unwrap();
        let scaled = predict(&f, &m, &span, 0.8).unwrap();
        for (u, s) in unscaled.predicted.iter().zip(&scaled.predicted) {
            assert_eq!(*s, 0.8 * u);
        }
        let round = unscaled.rescaled(2.0).unwrap().rescaled(0.5).unwrap();
        assert_eq!(round, unscaled);
        assert!(predict(&f, &m, &span, 0.0).is_err());
        assert!(predict(&f, &m, &DateSpan::with_len(d("2020-03-20"), 30), 1.0).is_err());
    }

    #[test]
    fn prediction_residuals_match_fit() {
        let m = matrix("2020-02-01", 30);
        let mut c = consumption_from(&m, &ALPHA);
        for (i, v) in c.values.iter_mut().enumerate() {
            *v *= 1.0 + 0.02 * (wobble(i, 9) - 0.5);
        }
        let f = fit(&m, &c, &m.span()).unwrap();
        let p = predict(&f, &m, &m.span(), 1.0).unwrap();
        let r = raw_residuals(&c, &p).unwrap();
        for (i, row) in m.rows.iter().enumerate() {
            assert_eq!(r[i], c.values[i] - f.evaluate(row));
        }
    }

    #[test]
    fn scale_estimation() {
        let m = matrix("2020-02-01", 60);
        let c = consumption_from(&m, &ALPHA);
        let train = DateSpan::with_len(d("2020-02-01"), 30);
        let f = fit(&m, &c, &train).unwrap();
        let window = DateSpan::with_len(d("2020-03-05"), 14);
        assert!((estimate_scale(&f, &m, &c, &window).unwrap() - 1.0).abs() < 1e-10);
        let low = c.scaled(0.8);
        assert!((estimate_scale(&f, &m, &low, &window).unwrap() - 0.8).abs() < 1e-10);

        assert!(matches!(
            estimate_scale(&f, &m, &c, &DateSpan::with_len(d("2020-02-25"), 14)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            estimate_scale(&f, &m, &c, &DateSpan::with_len(d("2020-03-05"), 6)),
            Err(Error::Parameter(_))
        ));
        let zero = RegressionFit {
            coefficients: [0.0; N_FACTORS],
            ..f
        };
        assert!(matches!(estimate_scale(&zero, &m, &c, &window), Err(Error::Degenerate(_))));
    }

    #[test]
    fn solstice_warning() {
        let m = matrix("2020-05-20", 45);
        let c = consumption_from(&m, &ALPHA);
        let f = fit(&m, &c, &DateSpan::with_len(d("2020-06-01"), 30)).unwrap();
        assert_eq!(f.warnings.len(), 1);
        let m = matrix("2020-02-01", 30);
        let c = consumption_from(&m, &ALPHA);
        assert!(fit(&m, &c, &m.span()).unwrap().warnings.is_empty());
    }

    #[test]
    fn coefficient_dump_format() {
        let m = matrix("2020-02-01", 30);
        let f = fit(&m, &consumption_from(&m, &ALPHA), &m.span()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# training_start=2020-02-01");
        assert_eq!(lines[1], "# training_end=2020-03-01");
        assert_eq!(lines[4], "factor,alpha");
        assert!(lines[5].starts_with("mon,"));
        assert!(lines[14].starts_with("wind_loss,"));
    }
}
