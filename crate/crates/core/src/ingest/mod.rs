//! Input files and their cleanup.
//!
//! Weather arrives as hourly samples that may have holes; consumption arrives
//! as per-meter daily records that are summed per (region, consumer class).

mod consumption;
mod weather;

pub use consumption::{
    aggregate, parse_consumption, repair_consumption_outliers, write_consumption, ConsumerClass,
    ConsumptionRecord, ConsumptionSeries, OutlierRepair, Selection,
};
pub use weather::{
    daily_weather, fill_weather_gaps, parse_weather, write_weather, CloudUnit, DailyWeather,
    WeatherFormat, WeatherSample, DEFAULT_MAX_GAP_HOURS,
};

/// Median of a non-empty slice; sorts a copy.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
