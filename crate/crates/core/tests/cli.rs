use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use demand_decomp::output::{read_difference_csv, read_report_csv, read_summary_csv};
use demand_decomp::residuals::ResidualSeries;
use tempfile::TempDir;

const SITE: &str = "[site]\nlatitude = 59.41\nlongitude = 24.83\nutc_offset = \"Europe/Tallinn\"\n";

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_demand-decomp"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = bin(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

/// Writes a scenario file and synthesizes it into `generated/<name>/`.
fn synth(dir: &Path, name: &str, span: &str, noise: f64, series: &[(&str, &str, &str)]) {
    let mut text = format!("seed = 11\nspan = \"{span}\"\n\n{SITE}");
    for (region, class, interventions) in series {
        text.push_str(&format!(
            "\n[[series]]\nregion = \"{region}\"\nclass = \"{class}\"\nnoise_sigma = {noise}\n{interventions}\n"
        ));
    }
    fs::write(dir.join(format!("{name}.toml")), text).unwrap();
    ok(dir, &["synth", "--config", &format!("{name}.toml"), "--out", &format!("generated/{name}")]);
}

fn config(dir: &Path, file: &str, data: &str, region: &str, class: &str, extra: &str) {
    let text = format!(
        "weather = \"generated/{data}/weather.csv\"\nconsumption = \"generated/{data}/consumption.csv\"\n\
         region = \"{region}\"\nclass = \"{class}\"\n{extra}\n{SITE}"
    );
    fs::write(dir.join(file), text).unwrap();
}

fn report(path: &Path) -> Vec<(String, String)> {
    read_report_csv(fs::File::open(path).unwrap()).unwrap()
}

fn metric(report: &[(String, String)], key: &str) -> f64 {
    report.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

fn residuals(path: &Path) -> ResidualSeries {
    ResidualSeries::read_csv(BufReader::new(fs::File::open(path).unwrap())).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn fit_noise_free_has_zero_residuals() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "clean", "2019-01-01..2019-03-31", 0.0, &[("Harju", "business", "")]);
    config(dir.path(), "run.toml", "clean", "Harju", "business", "train-start = 2019-02-01\nout = \"out\"");
    ok(dir.path(), &["fit", "--config", "run.toml"]);
    let r = report(&dir.path().join("out/fit_report.csv"));
    assert!(metric(&r, "training_max_abs_rho") < 1e-8);
    let coefficients = fs::read_to_string(dir.path().join("out/coefficients.csv")).unwrap();
    assert!(coefficients.contains("# training_start=2019-02-01"));
    assert_eq!(coefficients.lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn fit_with_one_percent_noise_reports_floor() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "noisy", "2019-01-01..2019-03-31", 0.01, &[("Harju", "business", "")]);
    config(dir.path(), "run.toml", "noisy", "Harju", "business", "train-start = 2019-02-01\nout = \"out\"");
    ok(dir.path(), &["fit", "--config", "run.toml", "--dump-features"]);
    let m = metric(&report(&dir.path().join("out/fit_report.csv")), "training_mean_abs_rho");
    assert!((0.005..=0.02).contains(&m), "{m}");
    let features = fs::read_to_string(dir.path().join("out/features.csv")).unwrap();
    assert!(features.starts_with("date,mon,tue,wed,thu,fri,sat,sun,thermal,daylight,wind_loss"));
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "y", "2019-01-01..2019-03-31", 0.0, &[("Harju", "business", "")]);
    config(dir.path(), "run.toml", "y", "Harju", "business", "train-start = 2019-02-01\nout = \"out\"");
    ok(dir.path(), &["fit", "--config", "run.toml", "--train-start", "2019-01-10", "--train-days", "40", "--out", "elsewhere"]);
    let r = report(&dir.path().join("elsewhere/fit_report.csv"));
    assert_eq!(r.iter().find(|(k, _)| k == "training_start").unwrap().1, "2019-01-10");
    assert_eq!(metric(&r, "training_days"), 40.0);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_weather_file_exits_2_with_cause() {
    let dir = TempDir::new().unwrap();
    let out = bin(
        dir.path(),
        &["fit", "--weather", "absent.csv", "--consumption", "c.csv", "--train-start", "2020-01-01"],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error: weather-file-not-found: "), "{stderr}");
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bin(dir.path(), &["fit", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(bin(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let out = bin(dir.path(), &["fit", "--consumption", "c.csv", "--train-start", "2020-01-01"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(bin(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn model_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "y", "2019-01-01..2019-03-31", 0.0, &[("Harju", "business", "")]);
    // Five days cannot determine ten coefficients.
    config(dir.path(), "run.toml", "y", "Harju", "business", "train-start = 2019-02-01\ntrain-days = 5");
    let out = bin(dir.path(), &["fit", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: rank-deficient: "));

    config(dir.path(), "run.toml", "y", "Tartu", "business", "train-start = 2019-02-01");
    let out = bin(dir.path(), &["fit", "--config", "run.toml"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: no-data: "));

    let out = bin(dir.path(), &["summary"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: parameter: "));
}

#[test]
fn analyze_step_then_rescale() {
    let dir = TempDir::new().unwrap();
    let step = "interventions = [{ start = 2020-03-12, step = 0.8 }]";
    synth(dir.path(), "y2020", "2020-01-01..2020-05-31", 0.01, &[("Harju", "business", step)]);
    let base = "train-start = 2020-01-01\nonset = 2020-03-12\nend = 2020-04-30";
    config(dir.path(), "raw.toml", "y2020", "Harju", "business", &format!("{base}\nout = \"raw\""));
    config(
        dir.path(),
        "scaled.toml",
        "y2020",
        "Harju",
        "business",
        &format!("{base}\nscale-window = \"2020-03-12+14\"\nout = \"scaled\""),
    );
    ok(dir.path(), &["analyze", "--config", "raw.toml"]);
    ok(dir.path(), &["analyze", "--config", "scaled.toml"]);

    let onset = "2020-03-12".parse().unwrap();
    let end = "2020-04-30".parse().unwrap();
    let post = demand_decomp::DateSpan::new(onset, end);
    let raw = residuals(&dir.path().join("raw/residuals.csv"));
    let scaled = residuals(&dir.path().join("scaled/residuals.csv"));
    assert_eq!(raw.onset, Some(onset));
    let raw_mean = mean(raw.rho_slice(&post).unwrap());
    let scaled_mean = mean(scaled.rho_slice(&post).unwrap());
    assert!((raw_mean + 0.2).abs() < 0.04, "unscaled post-onset mean {raw_mean}");
    assert!(scaled_mean.abs() < 0.03, "rescaled post-onset mean {scaled_mean}");

    let k = metric(&report(&dir.path().join("scaled/fit_report.csv")), "scale_factor");
    assert!((k - 0.8).abs() < 0.04, "{k}");
    let svg = fs::read_to_string(dir.path().join("raw/residuals.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn analyze_without_onset_has_no_marker() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "y", "2019-01-01..2019-04-30", 0.01, &[("Harju", "private", "")]);
    config(dir.path(), "run.toml", "y", "Harju", "private", "train-start = 2019-01-15\nout = \"out\"");
    ok(dir.path(), &["analyze", "--config", "run.toml"]);
    let svg = fs::read_to_string(dir.path().join("out/residuals.svg")).unwrap();
    assert!(!svg.contains("stroke-dasharray"));
    let rho = residuals(&dir.path().join("out/residuals.csv"));
    assert_eq!(rho.onset, None);
    assert_eq!(rho.span().to_string(), "2019-01-15..2019-04-30");
    for i in 0..rho.raw.len() {
        let back = rho.normalized[i] * rho.denominators[i];
        assert!((back - rho.raw[i]).abs() <= 1e-9 * rho.raw[i].abs().max(1.0));
    }
}

#[test]
fn compare_identical_inputs_is_zero() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "y", "2019-01-01..2019-05-31", 0.01, &[("Harju", "business", "")]);
    config(dir.path(), "a.toml", "y", "Harju", "business", "train-start = 2019-01-01\nout = \"cmp\"");
    ok(dir.path(), &["compare", "--config", "a.toml", "--config", "a.toml"]);
    let rows = read_difference_csv(fs::File::open(dir.path().join("cmp/difference.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 151);
    assert!(rows.iter().all(|r| r.diff == 0.0 && r.diff_ma7 == 0.0 && r.label == "day"));
}

#[test]
fn compare_recovers_offset_and_labels_alignment() {
    let dir = TempDir::new().unwrap();
    let drop = "interventions = [{ start = 2020-03-12, step = 0.9 }]";
    synth(dir.path(), "y2019", "2019-01-01..2019-06-30", 0.01, &[("Harju", "business", "")]);
    synth(dir.path(), "y2020", "2020-01-01..2020-06-30", 0.01, &[("Harju", "business", drop)]);
    fs::write(
        dir.path().join("holidays.toml"),
        "[[align]]\nname = \"Easter\"\nfirst = \"2019-04-18..2019-04-21\"\nsecond = \"2020-04-09..2020-04-12\"\n",
    )
    .unwrap();
    let common = "train-days = 30\nend = 2019-05-31";
    config(dir.path(), "a.toml", "y2020", "Harju", "business", "train-start = 2020-01-01\nonset = 2020-03-12\nend = 2020-05-31\nholidays = \"holidays.toml\"\nout = \"cmp\"");
    config(dir.path(), "b.toml", "y2019", "Harju", "business", &format!("train-start = 2019-01-01\n{common}"));
    ok(dir.path(), &["compare", "--config", "a.toml", "--config", "b.toml"]);
    let rows = read_difference_csv(fs::File::open(dir.path().join("cmp/difference.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 152, "Jan 1 to May 31 of the leap year");
    assert!(rows.iter().any(|r| r.label == "leap-day" && r.month_day == "02-29"));
    assert_eq!(rows.iter().filter(|r| r.label.starts_with("aligned")).count(), 8);
    let late: Vec<f64> = rows
        .iter()
        .filter(|r| r.month_day.as_str() >= "04-01" && r.month_day.as_str() <= "05-31")
        .map(|r| r.diff_ma7)
        .collect();
    let m = mean(&late);
    assert!((m + 0.1).abs() < 0.04, "moving-average difference {m}");
}

#[test]
fn compare_without_shared_days_is_parameter_error() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "a", "2019-01-01..2019-03-31", 0.0, &[("Harju", "business", "")]);
    synth(dir.path(), "b", "2020-06-01..2020-08-31", 0.0, &[("Harju", "business", "")]);
    config(dir.path(), "a.toml", "a", "Harju", "business", "train-start = 2019-01-01");
    config(dir.path(), "b.toml", "b", "Harju", "business", "train-start = 2020-06-01");
    let out = bin(dir.path(), &["compare", "--config", "a.toml", "--config", "b.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: parameter: "));
}

#[test]
fn summary_orders_regions_by_injected_step() {
    let dir = TempDir::new().unwrap();
    let step = |s: f64| format!("interventions = [{{ start = 2020-03-12, step = {s} }}]");
    let (a, b, c) = (step(0.7), step(0.85), step(1.1));
    synth(
        dir.path(),
        "y",
        "2020-01-01..2020-05-31",
        0.01,
        &[("North", "business", &a), ("South", "business", &b), ("South", "private", &c)],
    );
    let extra = "train-start = 2020-01-01\nonset = 2020-03-12\nsummary-range = \"2020-03-12..2020-04-30\"\nout = \"sum\"";
    config(dir.path(), "n.toml", "y", "North", "business", extra);
    config(dir.path(), "sb.toml", "y", "South", "business", extra);
    config(dir.path(), "sp.toml", "y", "South", "private", extra);
    ok(dir.path(), &["summary", "--config", "n.toml", "--config", "sb.toml", "--config", "sp.toml"]);
    let rows = read_summary_csv(fs::File::open(dir.path().join("sum/summary.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.days == 50));
    assert!(rows[0].mean_rho < rows[1].mean_rho && rows[1].mean_rho < rows[2].mean_rho, "{rows:?}");
    assert!((rows[0].mean_rho + 0.3).abs() < 0.05);
    let svg = fs::read_to_string(dir.path().join("sum/summary.svg")).unwrap();
    assert_eq!(svg.matches(">South<").count(), 1, "one group label per region");
}

#[test]
fn synth_seed_flag_changes_output_deterministically() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "y", "2019-01-01..2019-01-31", 0.01, &[("Harju", "business", "")]);
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    ok(dir.path(), &["synth", "--config", "y.toml", "--out", "s1", "--seed", "99"]);
    ok(dir.path(), &["synth", "--config", "y.toml", "--out", "s2", "--seed", "99"]);
    assert_eq!(read("s1/weather.csv"), read("s2/weather.csv"));
    assert_eq!(read("s1/consumption.csv"), read("s2/consumption.csv"));
    assert_ne!(read("s1/weather.csv"), read("generated/y/weather.csv"));
}
