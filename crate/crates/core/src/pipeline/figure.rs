use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z_95: f64 = 1.96;
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 64.0;
const TICKS: usize = 5;

/// Bar-chart data: one bar per group with a symmetric error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub caption: String,
    pub y_label: String,
    pub labels: Vec<String>,
    pub means: Vec<f64>,
    /// 95% normal-approximation half-widths, `1.96 · sd / √n`.
    pub ci_half_widths: Vec<f64>,
}

impl FigureData {
    pub fn new(
        caption: impl Into<String>,
        y_label: impl Into<String>,
        labels: Vec<String>,
        means: Vec<f64>,
        ci_half_widths: Vec<f64>,
    ) -> Result<Self> {
        let f = Self {
            caption: caption.into(),
            y_label: y_label.into(),
            labels,
            means,
            ci_half_widths,
        };
        f.validate()?;
        Ok(f)
    }

    /// Summarizes each `(label, sample)` as mean and CI half-width. The
    /// standard deviation uses the `n - 1` denominator; a single value has
    /// a zero-width interval.
    pub fn from_samples(
        caption: impl Into<String>,
        y_label: impl Into<String>,
        groups: &[(&str, &[f64])],
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(groups.len());
        let mut means = Vec::with_capacity(groups.len());
        let mut cis = Vec::with_capacity(groups.len());
        for (label, sample) in groups {
            if sample.is_empty() {
                return Err(Error::invalid(format!("figure group `{label}` is empty")));
            }
            let n = sample.len() as f64;
            let mean = sample.iter().sum::<f64>() / n;
            let ci = if sample.len() > 1 {
                let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                Z_95 * var.sqrt() / n.sqrt()
            } else {
                0.0
            };
            labels.push((*label).to_owned());
            means.push(mean);
            cis.push(ci);
        }
        Self::new(caption, y_label, labels, means, cis)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::invalid("figure has no groups"));
        }
        if self.means.len() != self.labels.len() || self.ci_half_widths.len() != self.labels.len() {
            return Err(Error::invalid("figure arrays differ in length"));
        }
        if self.means.iter().any(|m| !m.is_finite())
            || self.ci_half_widths.iter().any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(Error::invalid("figure values must be finite, intervals non-negative"));
        }
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Rounds `span / TICKS` up to 1, 2 or 5 times a power of ten.
fn tick_step(span: f64) -> f64 {
    let raw = span / TICKS as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Renders the chart as a standalone SVG document. Identical data gives
/// identical bytes.
pub fn render_bar_svg(f: &FigureData) -> Result<String> {
    f.validate()?;
    let lows = f.means.iter().zip(&f.ci_half_widths).map(|(m, c)| m - c);
    let highs = f.means.iter().zip(&f.ci_half_widths).map(|(m, c)| m + c);
    let lo = lows.fold(0.0f64, f64::min);
    let hi = highs.fold(0.0f64, f64::max);
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let step = tick_step(span);
    let axis_lo = (lo / step).floor() * step;
    let axis_hi = ((hi / step).ceil() * step).max(axis_lo + step);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y = |v: f64| TOP + plot_h * (axis_hi - v) / (axis_hi - axis_lo);

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&f.caption)
    )
    .unwrap();

    let n_ticks = ((axis_hi - axis_lo) / step).round() as usize;
    for t in 0..=n_ticks {
        let v = axis_lo + t as f64 * step;
        let yy = y(v);
        writeln!(w, r##"<line x1="{LEFT:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/>"##, WIDTH - RIGHT).unwrap();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, yy + 4.0, tick_label(v, step)).unwrap();
    }
    writeln!(w, r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="black"/>"#, TOP + plot_h).unwrap();
    writeln!(w, r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, y(0.0), WIDTH - RIGHT, y(0.0)).unwrap();
    writeln!(
        w,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(&f.y_label)
    )
    .unwrap();

    let slot = plot_w / f.len() as f64;
    let bar_w = slot * 0.6;
    for (i, label) in f.labels.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let (m, c) = (f.means[i], f.ci_half_widths[i]);
        let (top, bottom) = if m >= 0.0 { (y(m), y(0.0)) } else { (y(0.0), y(m)) };
        writeln!(
            w,
            r##"<rect x="{:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="#4c72b0"><title>{}: {m:.6} ± {c:.6}</title></rect>"##,
            cx - bar_w / 2.0,
            bottom - top,
            escape(label)
        )
        .unwrap();
        let (e_hi, e_lo) = (y(m + c), y(m - c));
        let cap = bar_w * 0.2;
        writeln!(w, r#"<line x1="{cx:.2}" y1="{e_hi:.2}" x2="{cx:.2}" y2="{e_lo:.2}" stroke="black"/>"#).unwrap();
        for e in [e_hi, e_lo] {
            writeln!(w, r#"<line x1="{:.2}" y1="{e:.2}" x2="{:.2}" y2="{e:.2}" stroke="black"/>"#, cx - cap, cx + cap).unwrap();
        }
        writeln!(
            w,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            escape(label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{m:.4}</text>"#,
            TOP + plot_h + 36.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    // Avoid "-0.00" at the baseline.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

pub fn emit_bar_svg(f: &FigureData, path: &Path) -> Result<()> {
    let svg = render_bar_svg(f)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
