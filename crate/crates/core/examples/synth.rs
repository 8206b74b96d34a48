//! Generate a scenario from TOML and write the weather and consumption CSVs.

use demand_decomp::features::FeatureConfig;
use demand_decomp::ingest::{write_consumption, write_weather};
use demand_decomp::synth::{generate_consumption, generate_weather, scenario_features, to_records, ScenarioFile};

const SCENARIO: &str = r#"
seed = 2020
span = "2020-01-01..2020-02-29"

[site]
latitude = 59.41
longitude = 24.83
utc_offset = "Europe/Tallinn"

[[series]]
region = "Harju"
class = "business"
noise_sigma = 0.01
interventions = [{ start = 2020-02-15, step = 0.9 }]
"#;

fn main() -> demand_decomp::Result<()> {
    let scenario = ScenarioFile::from_toml(SCENARIO)?;
    for spec in scenario.specs() {
        let features = scenario_features(&spec, &FeatureConfig::default())?;
        let series = generate_consumption(&spec, &features)?;
        let mut weather = Vec::new();
        write_weather(&mut weather, &generate_weather(&spec))?;
        let mut consumption = Vec::new();
        write_consumption(&mut consumption, &to_records(&series))?;
        let text = String::from_utf8(consumption).unwrap();
        println!("{} weather bytes", weather.len());
        for line in text.lines().take(4) {
            println!("{line}");
        }
    }
    Ok(())
}
