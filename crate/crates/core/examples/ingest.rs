//! Parse hourly weather and consumption CSV, fill gaps, and aggregate.
//!
//! ```text
//! cargo run --example ingest
//! ```

use demand_decomp::ingest::{
    aggregate, daily_weather, fill_weather_gaps, parse_consumption, parse_weather, ConsumerClass, Selection,
    WeatherFormat,
};

const WEATHER: &str = "\
timestamp,temp_c,wind_ms,cloud
2020-01-01T00:00,-2.0,4.0,0.8
2020-01-01T01:00,-2.5,4.5,0.9
2020-01-01T05:00,-4.0,6.0,1.0
";

const CONSUMPTION: &str = "\
date,region,class,kwh
2020-01-01,Harju,business,412000
2020-01-01,Harju,business,8000
2020-01-01,Tartu,business,120000
2020-01-02,Harju,business,615000
";

fn main() -> demand_decomp::Result<()> {
    let samples = parse_weather(WEATHER.as_bytes(), WeatherFormat::default())?;
    let filled = fill_weather_gaps(&samples, 72)?;
    let synthetic = filled.iter().filter(|s| s.synthetic).count();
    println!("{} samples, {synthetic} interpolated", filled.len());
    // Only whole days become daily records, so this partial day is dropped.
    println!("{} complete days", daily_weather(&filled)?.len());

    let records = parse_consumption(CONSUMPTION.as_bytes())?;
    let harju = aggregate(&records, &Selection::new("Harju", ConsumerClass::Business))?;
    for (date, kwh) in harju.span().dates().zip(&harju.values) {
        println!("{date} {} {kwh}", harju.label());
    }
    Ok(())
}
