//! Standalone SVG line plots.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot")]
    Empty,
    #[error("series '{label}' has {x} x values and {y} y values")]
    LengthMismatch { label: String, x: usize, y: usize },
    #[error("series '{0}' contains a non-finite value")]
    NonFinite(String),
    #[error("hysteresis plot needs forward and backward series on one pressure grid: {0}")]
    Hysteresis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    AnglePressure,
    ExpansionPressure,
    Trajectory,
    Hysteresis,
}

impl PlotKind {
    fn axes(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::AnglePressure | PlotKind::Hysteresis => ("Pressure (kPa)", "Bending angle (deg)"),
            PlotKind::ExpansionPressure => ("Pressure (kPa)", "Radial expansion (mm)"),
            PlotKind::Trajectory => ("Lateral tip offset (mm)", "Axial tip position (mm)"),
        }
    }

    fn title(self) -> &'static str {
        match self {
            PlotKind::AnglePressure => "Bending angle against pressure",
            PlotKind::ExpansionPressure => "Radial expansion against pressure",
            PlotKind::Trajectory => "Tip trajectory",
            PlotKind::Hysteresis => "Inflation and deflation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step (1, 2 or 5 times a power of ten) giving about five ticks.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    mag * if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { 0.1 * lo.abs() } else { 1.0 };
        lo -= pad;
        hi += pad;
    }
    let step = tick_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn decimals(step: f64) -> usize {
    if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    }
}

/// Renders `series` as an SVG document. Hysteresis plots take exactly two
/// series (inflation, then deflation) and add their gap as a third curve.
pub fn render_plot(kind: PlotKind, series: &[Series]) -> Result<String, PlotError> {
    if series.is_empty() || series.iter().all(|s| s.x.is_empty()) {
        return Err(PlotError::Empty);
    }
    for s in series {
        if s.x.len() != s.y.len() {
            return Err(PlotError::LengthMismatch { label: s.label.clone(), x: s.x.len(), y: s.y.len() });
        }
        if s.x.iter().chain(&s.y).any(|v| !v.is_finite()) {
            return Err(PlotError::NonFinite(s.label.clone()));
        }
    }
    let mut all: Vec<Series> = series.to_vec();
    if kind == PlotKind::Hysteresis {
        all.push(gap_series(series)?);
    }
    let (x0, x1, xs) = range(all.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1, ys) = range(all.iter().flat_map(|s| s.y.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
    let (xlabel, ylabel) = kind.axes();

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        kind.title()
    );
    let _ = writeln!(s, "<g class=\"axes\" stroke=\"black\" fill=\"none\">");
    let _ = writeln!(s, "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\"/>");
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g class=\"ticks\" fill=\"black\">");
    let (dx, dy) = (decimals(xs), decimals(ys));
    let nx = ((x1 - x0) / xs).round() as usize;
    for i in 0..=nx {
        let v = x0 + i as f64 * xs;
        let x = px(v);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.dx$}</text>",
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
    }
    let ny = ((y1 - y0) / ys).round() as usize;
    for i in 0..=ny {
        let v = y0 + i as f64 * ys;
        let y = py(v);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT:.2}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.dy$}</text>",
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        "<text class=\"xlabel\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xlabel}</text>",
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "<text class=\"ylabel\" x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{ylabel}</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, ser) in all.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let dash = if kind == PlotKind::Hysteresis && i == 2 { " stroke-dasharray=\"6 4\"" } else { "" };
        match ser.x.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    s,
                    "<circle class=\"marker\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{colour}\"/>",
                    px(ser.x[0]),
                    py(ser.y[0])
                );
            }
            _ => {
                let pts: Vec<String> =
                    ser.x.iter().zip(&ser.y).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let _ = writeln!(
                    s,
                    "<polyline class=\"series\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
                    pts.join(" ")
                );
            }
        }
    }
    let _ = writeln!(s, "<g class=\"legend\">");
    for (i, ser) in all.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let y = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{colour}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            LEFT + 10.0,
            y - 4.0,
            LEFT + 30.0,
            y - 4.0,
            LEFT + 36.0,
            y,
            escape(&ser.label)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

fn gap_series(series: &[Series]) -> Result<Series, PlotError> {
    if series.len() != 2 {
        return Err(PlotError::Hysteresis(format!("got {} series", series.len())));
    }
    let sorted = |s: &Series| {
        let mut v: Vec<(f64, f64)> = s.x.iter().copied().zip(s.y.iter().copied()).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let (f, b) = (sorted(&series[0]), sorted(&series[1]));
    if f.len() != b.len() || f.iter().zip(&b).any(|(p, q)| (p.0 - q.0).abs() > 1e-9 * p.0.abs().max(1.0)) {
        return Err(PlotError::Hysteresis("pressure grids differ".into()));
    }
    Ok(Series {
        label: "gap".into(),
        x: f.iter().map(|p| p.0).collect(),
        y: f.iter().zip(&b).map(|(p, q)| (q.1 - p.1).abs()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn single_point_marker() {
        let svg = render_plot(PlotKind::AnglePressure, &[Series::new("SH30", vec![100.0], vec![90.0])]).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(count(&svg, "<circle"), 1);
        assert_eq!(count(&svg, "<polyline"), 0);
        assert!(svg.contains("(kPa)") && svg.contains("(deg)"));
    }

    #[test]
    fn hysteresis_has_gap_curve() {
        let p: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
        let f = Series::new("forward", p.clone(), p.iter().map(|x| 0.9 * x).collect());
        let b =
            Series::new("backward", p.iter().rev().copied().collect(), p.iter().rev().map(|x| 0.9 * x + 3.0).collect());
        let svg = render_plot(PlotKind::Hysteresis, &[f.clone(), b]).unwrap();
        assert_eq!(count(&svg, "<polyline"), 3);
        assert!(svg.contains(">gap<"));
        let short = Series::new("backward", vec![0.0, 50.0], vec![0.0, 1.0]);
        assert!(matches!(render_plot(PlotKind::Hysteresis, &[f, short]), Err(PlotError::Hysteresis(_))));
    }

    #[test]
    fn errors_and_determinism() {
        assert_eq!(render_plot(PlotKind::Trajectory, &[]), Err(PlotError::Empty));
        let bad = Series::new("x", vec![1.0, 2.0], vec![1.0]);
        assert!(matches!(render_plot(PlotKind::ExpansionPressure, &[bad]), Err(PlotError::LengthMismatch { .. })));
        let s = [Series::new("a<b", vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 2.6])];
        let one = render_plot(PlotKind::ExpansionPressure, &s).unwrap();
        assert_eq!(one, render_plot(PlotKind::ExpansionPressure, &s).unwrap());
        assert!(one.contains("a&lt;b") && one.contains("(mm)"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(100.0), 20.0);
        assert_eq!(tick_step(2.6), 1.0);
        assert_eq!(tick_step(2.5), 0.5);
        assert_eq!(range([0.0, 90.0].into_iter()), (0.0, 100.0, 20.0));
    }
}
