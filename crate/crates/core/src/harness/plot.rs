use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::metrics::moving_average;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Moving-average return per episode, mean with a min-max band over seeds.
    LearningCurve,
    /// Final performance per experiment.
    FinalBar,
    /// Clean-output approximation error against pass count, log-log.
    ApproxError,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "learning-curve" | "learning_curve" | "curve" => Ok(Self::LearningCurve),
            "final-bar" | "final_bar" | "bar" => Ok(Self::FinalBar),
            "approx-error" | "approx_error" => Ok(Self::ApproxError),
            other => Err(Error::Config(format!("unknown plot kind `{other}`"))),
        }
    }
}

/// One plotted series: x positions with mean and envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Series {
    /// Aggregates per-seed return sequences after smoothing each one. Seeds
    /// that ran for fewer episodes truncate the series.
    pub fn from_runs(name: &str, runs: &[Vec<f64>], window: usize) -> Result<Self> {
        let len = runs.iter().map(Vec::len).min().ok_or(Error::EmptySeries)?;
        if len == 0 {
            return Err(Error::EmptySeries);
        }
        let smooth: Vec<Vec<f64>> = runs
            .iter()
            .map(|r| moving_average(&r[..len], window))
            .collect();
        let mut s = Series {
            name: name.to_string(),
            x: (1..=len).map(|e| e as f64).collect(),
            mean: Vec::with_capacity(len),
            min: Vec::with_capacity(len),
            max: Vec::with_capacity(len),
        };
        for i in 0..len {
            let col = smooth.iter().map(|r| r[i]);
            s.mean.push(col.clone().sum::<f64>() / smooth.len() as f64);
            s.min.push(col.clone().fold(f64::INFINITY, f64::min));
            s.max.push(col.fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(s)
    }

    pub fn point(name: &str, x: f64, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Series {
            name: name.to_string(),
            x: vec![x],
            mean: vec![values.iter().sum::<f64>() / values.len() as f64],
            min: vec![values.iter().copied().fold(f64::INFINITY, f64::min)],
            max: vec![values.iter().copied().fold(f64::NEG_INFINITY, f64::max)],
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub const CHART_CSV_HEADER: &str = "series,x,mean,min,max";

/// Long-format table of every plotted point.
pub fn write_chart_csv(series: &[Series]) -> String {
    let mut out = String::from(CHART_CSV_HEADER);
    out.push('\n');
    for s in series {
        for i in 0..s.len() {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e}",
                s.name, s.x[i], s.mean[i], s.min[i], s.max[i]
            );
        }
    }
    out
}

pub fn read_chart_csv(text: &str) -> Result<Vec<Series>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CHART_CSV_HEADER => {}
        _ => return Err(Error::parse(1, "expected chart header")),
    }
    let mut out: Vec<Series> = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(n, "expected 5 fields"));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(n, format!("bad number `{f}`")))?;
        }
        let name = fields[0];
        if out.last().map(|s| s.name.as_str()) != Some(name) {
            out.push(Series {
                name: name.to_string(),
                x: vec![],
                mean: vec![],
                min: vec![],
                max: vec![],
            });
        }
        let s = out.last_mut().expect("pushed above");
        s.x.push(v[0]);
        s.mean.push(v[1]);
        s.min.push(v[2]);
        s.max.push(v[3]);
    }
    Ok(out)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log: bool,
}

impl Axes {
    fn fit(series: &[Series], log: bool) -> Result<Self> {
        let tf = |v: f64| if log { v.log10() } else { v };
        let mut a = Axes {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
            log,
        };
        for s in series {
            for i in 0..s.len() {
                let xs = tf(s.x[i]);
                for y in [s.min[i], s.max[i], s.mean[i]].map(tf) {
                    if y.is_finite() {
                        a.y0 = a.y0.min(y);
                        a.y1 = a.y1.max(y);
                    }
                }
                if xs.is_finite() {
                    a.x0 = a.x0.min(xs);
                    a.x1 = a.x1.max(xs);
                }
            }
        }
        if !(a.x0.is_finite() && a.y0.is_finite()) {
            return Err(Error::EmptySeries);
        }
        if a.x1 - a.x0 < 1e-12 {
            a.x0 -= 0.5;
            a.x1 += 0.5;
        }
        if a.y1 - a.y0 < 1e-12 {
            a.y0 -= 0.5;
            a.y1 += 0.5;
        }
        Ok(a)
    }

    fn px(&self, x: f64) -> f64 {
        let x = if self.log { x.log10() } else { x };
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log { y.log10() } else { y };
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn label(&self, v: f64) -> String {
        if self.log {
            format!("1e{v:.1}")
        } else if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
            format!("{v:.1e}")
        } else {
            format!("{v:.2}")
        }
    }
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, axes: &Axes) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = axes.x0 + f * (axes.x1 - axes.x0);
        let yv = axes.y0 + f * (axes.y1 - axes.y0);
        let x = l + f * (r - l);
        let y = b - f * (b - t);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            b + 16.0,
            axes.label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 6.0,
            y + 4.0,
            axes.label(yv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{l}" y1="{y:.1}" x2="{r}" y2="{y:.1}" stroke="#ddd"/>"##
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN + 14.0 * i as f64;
        let x = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{}" y="{:.1}">{}</text>"#,
            y - 9.0,
            x + 14.0,
            y,
            escape(&s.name)
        );
    }
}

fn lines(out: &mut String, series: &[Series], axes: &Axes, band: bool, markers: bool) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if band && s.len() > 1 {
            let mut d = String::new();
            for j in 0..s.len() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if j == 0 { "M" } else { "L" },
                    axes.px(s.x[j]),
                    axes.py(s.max[j])
                );
            }
            for j in (0..s.len()).rev() {
                let _ = write!(d, "L{:.2},{:.2} ", axes.px(s.x[j]), axes.py(s.min[j]));
            }
            let _ = writeln!(
                out,
                r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                d
            );
        }
        let pts: Vec<String> = (0..s.len())
            .map(|j| format!("{:.2},{:.2}", axes.px(s.x[j]), axes.py(s.mean[j])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        if markers {
            for p in &pts {
                let (x, y) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
            }
        }
    }
}

pub fn learning_curve_svg(title: &str, series: &[Series]) -> Result<String> {
    let axes = Axes::fit(series, false)?;
    let mut out = String::new();
    frame(&mut out, title, "episode", "return (moving average)", &axes);
    lines(&mut out, series, &axes, true, false);
    legend(&mut out, series);
    out.push_str("</svg>\n");
    Ok(out)
}

/// One bar per series at its first point, with a min-max whisker.
pub fn final_bar_svg(title: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(Series::is_empty) {
        return Err(Error::EmptySeries);
    }
    let hi = series
        .iter()
        .map(|s| s.max[0])
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let lo = series
        .iter()
        .map(|s| s.min[0])
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let axes = Axes {
        x0: 0.0,
        x1: series.len() as f64,
        y0: lo,
        y1: if hi - lo < 1e-12 { lo + 1.0 } else { hi },
        log: false,
    };
    let mut out = String::new();
    frame(&mut out, title, "", "final performance", &axes);
    let slot = (WIDTH - 2.0 * MARGIN) / series.len() as f64;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let x = MARGIN + slot * (i as f64 + 0.2);
        let w = slot * 0.6;
        let (top, base) = (axes.py(s.mean[0]), axes.py(0.0));
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{color}"/>"#,
            top.min(base),
            (top - base).abs()
        );
        let cx = x + w / 2.0;
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            axes.py(s.min[0]),
            axes.py(s.max[0])
        );
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 30.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Log-log chart; non-positive points are dropped.
pub fn approx_error_svg(title: &str, series: &[Series]) -> Result<String> {
    let positive: Vec<Series> = series
        .iter()
        .map(|s| {
            let keep: Vec<usize> = (0..s.len())
                .filter(|&i| s.x[i] > 0.0 && s.mean[i] > 0.0 && s.min[i] > 0.0)
                .collect();
            Series {
                name: s.name.clone(),
                x: keep.iter().map(|&i| s.x[i]).collect(),
                mean: keep.iter().map(|&i| s.mean[i]).collect(),
                min: keep.iter().map(|&i| s.min[i]).collect(),
                max: keep.iter().map(|&i| s.max[i]).collect(),
            }
        })
        .collect();
    let axes = Axes::fit(&positive, true)?;
    let mut out = String::new();
    frame(&mut out, title, "noisy passes", "mean abs error", &axes);
    lines(&mut out, &positive, &axes, false, true);
    legend(&mut out, &positive);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render(kind: PlotKind, title: &str, series: &[Series]) -> Result<String> {
    match kind {
        PlotKind::LearningCurve => learning_curve_svg(title, series),
        PlotKind::FinalBar => final_bar_svg(title, series),
        PlotKind::ApproxError => approx_error_svg(title, series),
    }
}
