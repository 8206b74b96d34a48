//! Solar geometry for a site: altitude, solar noon and daylight hours.

use chrono::NaiveDate;
use demand_decomp::solar::{effective_daylight, solar_day, solar_noon_utc, Site};

fn main() -> demand_decomp::Result<()> {
    let site = Site::tallinn();
    for (m, d) in [(3, 20), (6, 21), (9, 22), (12, 21)] {
        let date = NaiveDate::from_ymd_opt(2020, m, d).unwrap();
        let day = solar_day(&site, date)?;
        let peak = day.hourly_altitude.iter().cloned().fold(f64::MIN, f64::max);
        let clear = effective_daylight(&day, &[0.0; 24], 0.75)?;
        let overcast = effective_daylight(&day, &[1.0; 24], 0.75)?;
        println!(
            "{date}  noon {} UTC  peak {peak:5.1}°  daylight clear {clear:5.2} overcast {overcast:5.2}",
            solar_noon_utc(&site, date)?.format("%H:%M")
        );
    }
    Ok(())
}
