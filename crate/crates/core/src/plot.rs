//! Static SVG charts written as plain geometry.

use std::fmt::Write as _;

use crate::grid::LoadSeries;
use crate::time::Timestamp;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 300.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Linear map from data space to a panel's pixel box.
struct Frame {
    x0: f64,
    x1: f64,
    y_max: f64,
    top: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = (self.x1 - self.x0).max(f64::MIN_POSITIVE);
        LEFT + (x - self.x0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + PANEL_HEIGHT - y / self.y_max * PANEL_HEIGHT
    }

    fn axes(&self, svg: &mut String, y_label: &str) {
        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT}" y="{}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##,
            self.top,
            WIDTH - LEFT - RIGHT
        );
        for i in 0..=4 {
            let v = self.y_max * i as f64 / 4.0;
            let y = self.py(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{v:.0}</text>"##,
                WIDTH - RIGHT,
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.1}" font-size="12" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
            self.top + PANEL_HEIGHT / 2.0,
            self.top + PANEL_HEIGHT / 2.0,
            escape(y_label)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn open(svg: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_ceiling(peak: f64, capacity_kw: f64) -> f64 {
    let top = peak.max(capacity_kw).max(1.0) * 1.1;
    let step = 10f64.powf(top.log10().floor());
    (top / step).ceil() * step
}

fn series_path(svg: &mut String, series: &LoadSeries, frame: &Frame, colour: &str) {
    let mut d = String::with_capacity(series.len() * 16);
    for (i, (t, v)) in series.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.1},{:.1}",
            if i == 0 { "M" } else { " L" },
            frame.px(t.minutes() as f64),
            frame.py(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="1"/>"#
    );
}

fn capacity_line(svg: &mut String, frame: &Frame, capacity_kw: f64) {
    let y = frame.py(capacity_kw);
    let _ = writeln!(
        svg,
        r##"<line class="capacity" x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#c00" stroke-dasharray="6 4" stroke-width="1.5"/>"##,
        WIDTH - RIGHT
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#c00" text-anchor="end">capacity {capacity_kw:.0} kW</text>"##,
        WIDTH - RIGHT - 4.0,
        y - 4.0
    );
}

fn time_labels(
    svg: &mut String,
    frame: &Frame,
    from: Timestamp,
    to: Timestamp,
    format: &str,
    count: usize,
) {
    let bottom = frame.top + PANEL_HEIGHT;
    for i in 0..=count {
        let m = from.minutes() + (to - from) * i as i64 / count as i64;
        let x = frame.px(m as f64);
        let label = Timestamp::from_minutes(m)
            .to_datetime()
            .format(format)
            .to_string();
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{label}</text>"#,
            bottom + 16.0
        );
    }
}

/// Load profile with a dashed capacity line.
pub fn load_profile_svg(series: &LoadSeries, capacity_kw: f64, title: &str) -> String {
    let height = TOP + PANEL_HEIGHT + BOTTOM;
    let mut svg = String::new();
    open(&mut svg, height, title);
    let frame = Frame {
        x0: series.start.minutes() as f64,
        x1: series.end().minutes() as f64,
        y_max: y_ceiling(series.max().unwrap_or(0.0), capacity_kw),
        top: TOP,
    };
    frame.axes(&mut svg, "load [kW]");
    series_path(&mut svg, series, &frame, "#1f5fa8");
    capacity_line(&mut svg, &frame, capacity_kw);
    time_labels(&mut svg, &frame, series.start, series.end(), "%Y-%m-%d", 6);
    svg.push_str("</svg>\n");
    svg
}

/// Bar per EV user (anonymised as 1..n) with their dissatisfaction count; an empty input still
/// yields a valid chart.
pub fn dissatisfaction_svg(counts: &[u64], title: &str) -> String {
    let height = TOP + PANEL_HEIGHT + BOTTOM;
    let mut svg = String::new();
    open(&mut svg, height, title);
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let frame = Frame {
        x0: 0.0,
        x1: counts.len().max(1) as f64,
        y_max: peak.max(4.0).ceil(),
        top: TOP,
    };
    frame.axes(&mut svg, "dissatisfied departures");
    let bar = (frame.px(1.0) - frame.px(0.0)).max(1.0);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let y = frame.py(c as f64);
        let _ = writeln!(
            svg,
            r##"<rect class="bar" x="{:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="#d08a1e"><title>user {}: {c}</title></rect>"##,
            frame.px(i as f64),
            (bar * 0.8).max(0.5),
            TOP + PANEL_HEIGHT - y,
            i + 1
        );
    }
    if counts.is_empty() || counts.iter().all(|&c| c == 0) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">no dissatisfied departures</text>"#,
            WIDTH / 2.0,
            TOP + PANEL_HEIGHT / 2.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">EV user</text>"#,
        WIDTH / 2.0,
        TOP + PANEL_HEIGHT + 36.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Two stacked panels over the same time and load axes, e.g. a baseline day above the same day
/// under a centralized strategy.
pub fn day_zoom_svg(
    top: (&str, &LoadSeries),
    bottom: (&str, &LoadSeries),
    capacity_kw: f64,
    title: &str,
) -> String {
    let gap = 40.0;
    let height = TOP + 2.0 * PANEL_HEIGHT + gap + BOTTOM;
    let mut svg = String::new();
    open(&mut svg, height, title);
    let from = top.1.start.min(bottom.1.start);
    let to = top.1.end().max(bottom.1.end());
    let peak = top
        .1
        .max()
        .unwrap_or(0.0)
        .max(bottom.1.max().unwrap_or(0.0));
    let y_max = y_ceiling(peak, capacity_kw);
    for (k, (label, series)) in [top, bottom].into_iter().enumerate() {
        let frame = Frame {
            x0: from.minutes() as f64,
            x1: to.minutes() as f64,
            y_max,
            top: TOP + k as f64 * (PANEL_HEIGHT + gap),
        };
        frame.axes(&mut svg, "load [kW]");
        series_path(
            &mut svg,
            series,
            &frame,
            if k == 0 { "#555" } else { "#1f5fa8" },
        );
        capacity_line(&mut svg, &frame, capacity_kw);
        let _ = writeln!(
            svg,
            r#"<text class="panel" x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            LEFT + 6.0,
            frame.top + 16.0,
            escape(label)
        );
        time_labels(&mut svg, &frame, from, to, "%H:%M", 8);
    }
    svg.push_str("</svg>\n");
    svg
}
