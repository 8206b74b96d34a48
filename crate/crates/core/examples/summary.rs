//! Mean normalized residual per series over a period, drawn as a bar chart.

use chrono::NaiveDate;
use demand_decomp::features::FeatureConfig;
use demand_decomp::ingest::ConsumerClass;
use demand_decomp::plot::BarChart;
use demand_decomp::regress::{fit, predict, raw_residuals};
use demand_decomp::residuals::{normalize, period_summary};
use demand_decomp::synth::{generate_consumption, scenario_features, Intervention, ScenarioSpec};
use demand_decomp::DateSpan;

fn main() -> demand_decomp::Result<()> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let onset = NaiveDate::from_ymd_opt(2020, 3, 12).unwrap();
    let span = DateSpan::new(start, NaiveDate::from_ymd_opt(2020, 4, 30).unwrap());
    let mut groups: Vec<(String, Vec<(String, f64)>)> = Vec::new();
    for (region, class, step) in [
        ("Harju", ConsumerClass::Business, 0.78),
        ("Harju", ConsumerClass::Private, 1.06),
        ("Tartu", ConsumerClass::Business, 0.86),
    ] {
        let mut spec = ScenarioSpec::new(span, 5);
        spec.region = region.into();
        spec.class = class;
        spec.noise_sigma = 0.01;
        spec.interventions.push(Intervention { start: onset, step, weekly_damping: None });
        let features = scenario_features(&spec, &FeatureConfig::default())?;
        let consumption = generate_consumption(&spec, &features)?;
        let f = fit(&features, &consumption, &DateSpan::with_len(start, 30))?;
        let raw = raw_residuals(&consumption, &predict(&f, &features, &span, 1.0)?)?;
        let rho = normalize(start, &raw, &consumption, Some(onset))?;
        let mean = period_summary(&rho, &DateSpan::new(onset, span.end))?;
        println!("{region} {class}: {:+.1}%", 100.0 * mean);
        match groups.iter_mut().find(|(r, _)| r == region) {
            Some((_, bars)) => bars.push((class.to_string(), mean)),
            None => groups.push((region.to_string(), vec![(class.to_string(), mean)])),
        }
    }
    let chart = BarChart { title: "Mean residual after onset".into(), groups, percent: true };
    std::fs::write("summary-example.svg", chart.to_svg())?;
    println!("wrote summary-example.svg");
    Ok(())
}
