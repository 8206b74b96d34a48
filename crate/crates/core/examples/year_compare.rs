//! Day-by-day difference of two years with an aligned Easter.

use chrono::NaiveDate;
use demand_decomp::residuals::{moving_average, normalize, year_difference, HolidayCalendar};
use demand_decomp::synth::{generate_consumption, scenario_features, ScenarioSpec};
use demand_decomp::{features::FeatureConfig, regress, DateSpan};

const CALENDAR: &str = r#"
[[align]]
name = "Easter"
first = "2019-04-18..2019-04-21"
second = "2020-04-09..2020-04-12"
"#;

fn residuals(year: i32, seed: u64) -> demand_decomp::Result<demand_decomp::residuals::ResidualSeries> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
    let span = DateSpan::new(start, NaiveDate::from_ymd_opt(year, 5, 31).unwrap());
    let mut spec = ScenarioSpec::new(span, seed);
    spec.noise_sigma = 0.01;
    let features = scenario_features(&spec, &FeatureConfig::default())?;
    let consumption = generate_consumption(&spec, &features)?;
    let f = regress::fit(&features, &consumption, &DateSpan::with_len(start, 30))?;
    let prediction = regress::predict(&f, &features, &span, 1.0)?;
    normalize(start, &regress::raw_residuals(&consumption, &prediction)?, &consumption, None)
}

fn main() -> demand_decomp::Result<()> {
    let calendar = HolidayCalendar::from_toml(CALENDAR)?;
    let slots = year_difference(&residuals(2020, 1)?, &residuals(2019, 2)?, &calendar)?;
    let diffs: Vec<f64> = slots.iter().map(|s| s.diff).collect();
    let smooth = moving_average(&diffs, 7)?;
    for (slot, ma) in slots.iter().zip(&smooth).filter(|(s, _)| s.month == 4 && s.day <= 21) {
        println!("{:02}-{:02} {:+.3} {:+.3} {}", slot.month, slot.day, slot.diff, ma, slot.label);
    }
    Ok(())
}
