//! Build the ten-column feature matrix from synthetic weather.

use chrono::NaiveDate;
use demand_decomp::features::{build_features_for_site, FeatureConfig, FACTOR_NAMES};
use demand_decomp::ingest::daily_weather;
use demand_decomp::synth::{generate_weather, ScenarioSpec};
use demand_decomp::DateSpan;

fn main() -> demand_decomp::Result<()> {
    let span = DateSpan::with_len(NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(), 7);
    let spec = ScenarioSpec::new(span, 3);
    let weather = daily_weather(&generate_weather(&spec))?;
    let features = build_features_for_site(&span, &weather, &spec.site, &FeatureConfig::default())?;
    println!("date        {}", FACTOR_NAMES.join(" "));
    for (date, row) in span.dates().zip(&features.rows) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        println!("{date}  {}", cells.join(" "));
    }
    Ok(())
}
