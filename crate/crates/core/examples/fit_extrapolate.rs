//! Fit on one month of synthetic data and extrapolate the rest of the season.

use chrono::NaiveDate;
use demand_decomp::features::FeatureConfig;
use demand_decomp::regress::{fit, predict, raw_residuals};
use demand_decomp::residuals::normalize;
use demand_decomp::synth::{generate_consumption, scenario_features, ScenarioSpec};
use demand_decomp::DateSpan;

fn main() -> demand_decomp::Result<()> {
    let start = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    let span = DateSpan::with_len(start, 180);
    let mut spec = ScenarioSpec::new(span, 42);
    spec.noise_sigma = 0.01;
    let features = scenario_features(&spec, &FeatureConfig::default())?;
    let consumption = generate_consumption(&spec, &features)?;

    let training = DateSpan::with_len(start, 30);
    let f = fit(&features, &consumption, &training)?;
    println!("condition {:.3e}, solver {:?}", f.gram_condition, f.solver);
    for (name, (got, want)) in demand_decomp::features::FACTOR_NAMES
        .iter()
        .zip(f.coefficients.iter().zip(&spec.true_coefficients))
    {
        println!("{name:>10} {got:12.2} (true {want})");
    }

    let prediction = predict(&f, &features, &span, 1.0)?;
    let raw = raw_residuals(&consumption, &prediction)?;
    let rho = normalize(start, &raw, &consumption, None)?;
    for month in 1..=6 {
        let days: Vec<f64> = rho
            .dates()
            .zip(&rho.normalized)
            .filter(|(d, _)| chrono::Datelike::month(d) == month)
            .map(|(_, r)| r.abs())
            .collect();
        println!("month {month}: mean |rho| {:.2}%", 100.0 * days.iter().sum::<f64>() / days.len() as f64);
    }
    Ok(())
}
