//! Static SVG charts.
//!
//! Output is plain text with coordinates rounded to two decimals, so the same
//! data always produces byte-identical files.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"##,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Round the data range outward to a tick step from the 1-2-5 series.
fn nice_axis(min: f64, max: f64) -> (f64, f64, f64) {
    let (mut lo, mut hi) = if min.is_finite() && max.is_finite() { (min, max) } else { (0.0, 1.0) };
    if hi - lo < 1e-12 {
        lo -= 0.5 * lo.abs().max(1e-3);
        hi += 0.5 * hi.abs().max(1e-3);
    }
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn format_tick(v: f64, percent: bool) -> String {
    if percent {
        format!("{:.0}%", v * 100.0)
    } else if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Thin,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
    pub style: LineStyle,
}

/// Daily values over consecutive dates.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub start_date: NaiveDate,
    pub series: Vec<Series>,
    /// Dashed vertical line at a date, e.g. the onset.
    pub marker: Option<(NaiveDate, String)>,
    /// Format the y axis as percentages.
    pub percent: bool,
}

impl LineChart {
    pub fn new(title: impl Into<String>, start_date: NaiveDate) -> Self {
        LineChart {
            title: title.into(),
            start_date,
            series: Vec::new(),
            marker: None,
            percent: true,
        }
    }

    pub fn line(mut self, name: impl Into<String>, values: Vec<f64>, style: LineStyle) -> Self {
        self.series.push(Series {
            name: name.into(),
            values,
            style,
        });
        self
    }

    pub fn marker(mut self, date: NaiveDate, label: impl Into<String>) -> Self {
        self.marker = Some((date, label.into()));
        self
    }

    pub fn to_svg(&self) -> String {
        let n = self.series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(2);
        let finite = self.series.iter().flat_map(|s| &s.values).filter(|v| v.is_finite());
        let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (lo, hi, step) = nice_axis(min.min(0.0), max.max(0.0));

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let x = |i: f64| MARGIN_LEFT + plot_w * i / (n - 1) as f64;
        let y = |v: f64| MARGIN_TOP + plot_h * (hi - v) / (hi - lo);

        let mut out = String::new();
        header(&mut out, &self.title);

        let ticks = ((hi - lo) / step).round() as i64;
        for k in 0..=ticks {
            let v = lo + k as f64 * step;
            let stroke = if v.abs() < step * 1e-9 { "#888" } else { "#ddd" };
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}"/>"##,
                MARGIN_LEFT,
                y(v),
                WIDTH - MARGIN_RIGHT,
                y(v)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT - 6.0,
                y(v) + 4.0,
                format_tick(v, self.percent)
            );
        }
        for (i, date) in self.start_date.iter_days().take(n).enumerate() {
            if date.day() == 1 {
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#eee"/>"##,
                    x(i as f64),
                    MARGIN_TOP,
                    x(i as f64),
                    HEIGHT - MARGIN_BOTTOM
                );
                let _ = writeln!(
                    out,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    x(i as f64),
                    HEIGHT - MARGIN_BOTTOM + 18.0,
                    date.format("%b %d")
                );
            }
        }

        for (k, s) in self.series.iter().enumerate() {
            let mut path = String::new();
            let mut pen_down = false;
            for (i, v) in s.values.iter().enumerate() {
                if !v.is_finite() {
                    pen_down = false;
                    continue;
                }
                let _ = write!(path, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, x(i as f64), y(*v));
                pen_down = true;
            }
            let width = match s.style {
                LineStyle::Solid => 1.8,
                LineStyle::Thin => 0.9,
            };
            let color = PALETTE[k % PALETTE.len()];
            let _ = writeln!(
                out,
                r##"<path d="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"##,
                path.trim_end()
            );
            let ly = MARGIN_TOP + 14.0 + 16.0 * k as f64;
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"##,
                MARGIN_LEFT + 10.0,
                ly - 4.0,
                MARGIN_LEFT + 30.0,
                ly - 4.0
            );
            let _ = writeln!(out, r##"<text x="{:.2}" y="{ly:.2}">{}</text>"##, MARGIN_LEFT + 36.0, escape(&s.name));
        }

        if let Some((date, label)) = &self.marker {
            let i = (*date - self.start_date).num_days();
            if (0..n as i64).contains(&i) {
                let mx = x(i as f64);
                let _ = writeln!(
                    out,
                    r##"<line x1="{mx:.2}" y1="{:.2}" x2="{mx:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"##,
                    MARGIN_TOP,
                    HEIGHT - MARGIN_BOTTOM
                );
                let _ = writeln!(
                    out,
                    r##"<text x="{:.2}" y="{:.2}">{}</text>"##,
                    mx + 4.0,
                    MARGIN_TOP + 12.0,
                    escape(label)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Bars grouped under category labels (e.g. regions), one bar per member
/// (e.g. consumer class).
#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub groups: Vec<(String, Vec<(String, f64)>)>,
    pub percent: bool,
}

impl BarChart {
    pub fn to_svg(&self) -> String {
        let values = self.groups.iter().flat_map(|(_, bars)| bars.iter().map(|b| b.1));
        let (min, max) = values.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi, step) = nice_axis(min, max);

        let mut members: Vec<&str> = Vec::new();
        for (_, bars) in &self.groups {
            for (name, _) in bars {
                if !members.contains(&name.as_str()) {
                    members.push(name);
                }
            }
        }

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let y = |v: f64| MARGIN_TOP + plot_h * (hi - v) / (hi - lo);
        let group_w = plot_w / self.groups.len().max(1) as f64;
        let bar_w = group_w * 0.8 / members.len().max(1) as f64;

        let mut out = String::new();
        header(&mut out, &self.title);
        let ticks = ((hi - lo) / step).round() as i64;
        for k in 0..=ticks {
            let v = lo + k as f64 * step;
            let stroke = if v.abs() < step * 1e-9 { "#888" } else { "#ddd" };
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}"/>"##,
                MARGIN_LEFT,
                y(v),
                WIDTH - MARGIN_RIGHT,
                y(v)
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT - 6.0,
                y(v) + 4.0,
                format_tick(v, self.percent)
            );
        }
        for (g, (label, bars)) in self.groups.iter().enumerate() {
            let gx = MARGIN_LEFT + g as f64 * group_w + group_w * 0.1;
            for (name, value) in bars {
                let m = members.iter().position(|x| x == name).unwrap();
                let (top, bottom) = if *value >= 0.0 { (y(*value), y(0.0)) } else { (y(0.0), y(*value)) };
                let _ = writeln!(
                    out,
                    r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{} {}: {}</title></rect>"##,
                    gx + m as f64 * bar_w,
                    bar_w * 0.95,
                    bottom - top,
                    PALETTE[m % PALETTE.len()],
                    escape(label),
                    escape(name),
                    format_tick(*value, self.percent)
                );
            }
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                gx + group_w * 0.4,
                HEIGHT - MARGIN_BOTTOM + 18.0,
                escape(label)
            );
        }
        for (m, name) in members.iter().enumerate() {
            let ly = MARGIN_TOP + 14.0 + 16.0 * m as f64;
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="12" height="10" fill="{}"/>"##,
                WIDTH - MARGIN_RIGHT - 120.0,
                ly - 9.0,
                PALETTE[m % PALETTE.len()]
            );
            let _ = writeln!(out, r##"<text x="{:.2}" y="{ly:.2}">{}</text>"##, WIDTH - MARGIN_RIGHT - 102.0, escape(name));
        }
        out.push_str("</svg>\n");
        out
    }
}
