//! A 20% drop at a known onset, shown before and after rescaling.

use chrono::NaiveDate;
use demand_decomp::features::FeatureConfig;
use demand_decomp::regress::{estimate_scale, fit, predict, raw_residuals};
use demand_decomp::residuals::{normalize, period_summary};
use demand_decomp::synth::{generate_consumption, scenario_features, Intervention, ScenarioSpec};
use demand_decomp::DateSpan;

fn main() -> demand_decomp::Result<()> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let onset = NaiveDate::from_ymd_opt(2020, 3, 12).unwrap();
    let span = DateSpan::new(start, NaiveDate::from_ymd_opt(2020, 5, 31).unwrap());
    let mut spec = ScenarioSpec::new(span, 7);
    spec.noise_sigma = 0.01;
    spec.interventions.push(Intervention {
        start: onset,
        step: 0.8,
        weekly_damping: Some(0.8),
    });
    let features = scenario_features(&spec, &FeatureConfig::default())?;
    let consumption = generate_consumption(&spec, &features)?;
    let f = fit(&features, &consumption, &DateSpan::with_len(start, 30))?;

    let after = DateSpan::new(onset, span.end);
    let scale = estimate_scale(&f, &features, &consumption, &DateSpan::with_len(onset, 14))?;
    for k in [1.0, scale] {
        let prediction = predict(&f, &features, &span, 1.0)?;
        let mut predicted = prediction.predicted.clone();
        let from = (onset - start).num_days() as usize;
        predicted[from..].iter_mut().for_each(|p| *p *= k);
        let prediction = demand_decomp::regress::Prediction { predicted, ..prediction };
        let raw = raw_residuals(&consumption, &prediction)?;
        let rho = normalize(start, &raw, &consumption, Some(onset))?;
        println!("scale {k:.3}: post-onset mean rho {:+.2}%", 100.0 * period_summary(&rho, &after)?);
    }
    Ok(())
}
