//! Minimal SVG line charts: STD and QE against session index, and AmV
//! windows over time with the task steps shaded.

use std::fmt::Write;

use crate::acquisition::{Event, Session};
use crate::profiling::WindowedProfile;
use crate::som::QePoint;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const STEP_FILL: [&str; 4] = ["#fde0dd", "#e0f3db", "#deebf7", "#fff7bc"];

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Shaded x interval drawn behind the lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub start: f64,
    pub end: f64,
    pub label: String,
    pub fill: &'static str,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub spans: Vec<Span>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rounded axis limits and a tick step.
fn nice_range(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        for s in &self.spans {
            x0 = x0.min(s.start);
            x1 = x1.max(s.end);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (y0, y1, ystep) = nice_range(y0.min(0.0), y1);
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 1.0, x1 + 1.0) };
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        for s in &self.spans {
            let _ = writeln!(
                o,
                r#"<rect x="{:.2}" y="{TOP}" width="{:.2}" height="{ph}" fill="{}"/>"#,
                sx(s.start),
                (sx(s.end) - sx(s.start)).max(0.0),
                s.fill
            );
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.1}" font-size="10">{}</text>"#,
                sx(s.start) + 3.0,
                TOP + 12.0,
                escape(&s.label)
            );
        }
        let mut y = y0;
        while y <= y1 + ystep * 1e-9 {
            let _ = writeln!(
                o,
                r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#dddddd"/><text x="{2:.1}" y="{3:.2}" text-anchor="end">{4}</text>"##,
                sy(y),
                LEFT + pw,
                LEFT - 6.0,
                sy(y) + 4.0,
                tick_label(y, ystep)
            );
            y += ystep;
        }
        let _ = writeln!(
            o,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">{1}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="{LEFT}" y="{:.1}" text-anchor="middle">{}</text><text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            tick_label(x0, 1.0),
            LEFT + pw,
            TOP + ph + 16.0,
            tick_label(x1, 1.0)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                o,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
            for &(x, y) in &s.points {
                let _ = writeln!(o, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                o,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 18.0,
                lx + 24.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        o.push_str("</svg>\n");
        o
    }
}

fn tick_label(v: f64, step: f64) -> String {
    if step >= 1.0 && v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// STD against session index, one line per group.
pub fn std_chart(groups: &[(String, Vec<(u32, f64)>)]) -> LineChart {
    LineChart {
        title: "Session variability".into(),
        x_label: "session".into(),
        y_label: "STD (mV)".into(),
        series: groups
            .iter()
            .map(|(label, pts)| Series {
                label: label.clone(),
                points: pts.iter().map(|&(k, v)| (k as f64, v)).collect(),
            })
            .collect(),
        spans: Vec::new(),
    }
}

/// QE against session index, one line per group in first-seen order.
pub fn qe_chart(points: &[QePoint]) -> LineChart {
    let mut series: Vec<Series> = Vec::new();
    for p in points {
        let pos = match series.iter().position(|s| s.label == p.group) {
            Some(i) => i,
            None => {
                series.push(Series {
                    label: p.group.clone(),
                    points: Vec::new(),
                });
                series.len() - 1
            }
        };
        series[pos].points.push((p.session_index as f64, p.qe));
    }
    LineChart {
        title: "SOM quantization error".into(),
        x_label: "session".into(),
        y_label: "QE (mV)".into(),
        series,
        spans: Vec::new(),
    }
}

/// AmV windows of one session (x in seconds) with the four task steps shaded.
pub fn amv_chart(session: &Session, profiles: &[WindowedProfile]) -> LineChart {
    let steps: Vec<(usize, u32)> = session
        .annotations()
        .iter()
        .filter_map(|a| a.event.step_number().map(|k| (k, a.t_ms)))
        .collect();
    let end = session
        .annotations()
        .iter()
        .find(|a| a.event == Event::End)
        .map_or(session.end_ms(), |a| a.t_ms);
    let spans = steps
        .iter()
        .enumerate()
        .map(|(i, &(k, t))| Span {
            start: t as f64 / 1000.0,
            end: steps.get(i + 1).map_or(end, |s| s.1) as f64 / 1000.0,
            label: format!("step {}", k + 1),
            fill: STEP_FILL[k % STEP_FILL.len()],
        })
        .collect();
    LineChart {
        title: format!("AmV, {}", session.key()),
        x_label: "time (s)".into(),
        y_label: "AmV (mV)".into(),
        series: profiles
            .iter()
            .map(|p| Series {
                label: p.sensor.to_string(),
                points: p
                    .windows
                    .iter()
                    .map(|w| ((w.start_ms + p.window_ms / 2) as f64 / 1000.0, w.amv))
                    .collect(),
            })
            .collect(),
        spans,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::Hand;
    use crate::profiling::{window_amv, SensorSeries};
    use crate::sensor::SensorId;
    use crate::simulator::{simulate_session, GeneratorConfig, SkillProfile};

    #[test]
    fn ranges() {
        assert_eq!(nice_range(0.0, 97.0), (0.0, 100.0, 20.0));
        assert_eq!(nice_range(0.0, 0.42), (0.0, 0.5, 0.1));
        let (lo, hi, _) = nice_range(5.0, 5.0);
        assert!(lo < 5.0 && hi > 5.0);
    }

    #[test]
    fn std_svg_has_one_line_per_group() {
        let c = std_chart(&[
            ("expert_d".into(), vec![(1, 60.0), (2, 58.0)]),
            ("novice_d".into(), vec![(1, 130.0), (2, 128.5)]),
        ]);
        let svg = c.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("novice_d"));
        assert_eq!(svg, c.to_svg());
    }

    #[test]
    fn amv_svg_has_step_spans() {
        let s = simulate_session(&SkillProfile::expert(), &GeneratorConfig::default(), Hand::Dominant, 1).unwrap();
        let profs: Vec<_> = [SensorId::S5, SensorId::S7]
            .iter()
            .map(|&id| window_amv(&SensorSeries::from_session(&s, id), 2000).unwrap())
            .collect();
        let svg = amv_chart(&s, &profs).to_svg();
        for k in 1..=4 {
            assert!(svg.contains(&format!("step {k}")));
        }
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_chart_renders() {
        assert!(LineChart::default().to_svg().contains("</svg>"));
    }

    #[test]
    fn labels_are_escaped() {
        let c = LineChart {
            title: "a<b & c".into(),
            ..LineChart::default()
        };
        assert!(c.to_svg().contains("a&lt;b &amp; c"));
    }
}
