//! Self-contained SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use kai_core::metrics::ComplexityModel;

use crate::complexity::ComplexityReport;
use crate::error::{HarnessError, Result};
use crate::report::write_file;
use crate::sweep::SweepResult;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#7f7f7f", "#bcbd22",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Rmse,
    Resolution,
    Complexity,
    PerIteration,
}

impl PlotKind {
    pub fn suffix(self) -> &'static str {
        match self {
            Self::Rmse => "rmse",
            Self::Resolution => "resolution",
            Self::Complexity => "complexity",
            Self::PerIteration => "iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Non-finite points break the line.
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Fixed vertical range; otherwise fitted to the data.
    pub y_range: Option<(f64, f64)>,
}

/// Chart of a sweep. Complexity charts come from [`complexity_chart`].
pub fn sweep_chart(result: &SweepResult, kind: PlotKind) -> Result<Chart> {
    let points = |f: &dyn Fn(&crate::sweep::Cell) -> f64, label: &str| {
        result.series(label).map(|c| (c.snr_db, f(c))).collect::<Vec<_>>()
    };
    let mut series = Vec::new();
    let (title, y_label, y_range) = match kind {
        PlotKind::Rmse => {
            for label in &result.estimators {
                series.push(Series {
                    label: label.clone(),
                    points: points(&|c| c.rmse_db(), label),
                    dashed: false,
                });
            }
            series.push(Series {
                label: "CRB".into(),
                points: crb_points(result),
                dashed: true,
            });
            ("RMSE versus SNR", "RMSE (dB)", None)
        }
        PlotKind::Resolution => {
            for label in &result.estimators {
                series.push(Series {
                    label: label.clone(),
                    points: points(&|c| c.prob_resolution, label),
                    dashed: false,
                });
            }
            ("Probability of resolution versus SNR", "Probability of resolution", Some((0.0, 1.0)))
        }
        PlotKind::PerIteration => {
            for label in &result.estimators {
                let steps = result.series(label).map(|c| c.iteration_rmse_deg.len()).max().unwrap_or(0);
                if steps == 0 {
                    series.push(Series {
                        label: label.clone(),
                        points: points(&|c| c.rmse_db(), label),
                        dashed: false,
                    });
                }
                for k in 0..steps {
                    series.push(Series {
                        label: format!("{label} step {}", k + 1),
                        points: points(
                            &|c| c.iteration_rmse_deg.get(k).map_or(f64::NAN, |r| 20.0 * r.log10()),
                            label,
                        ),
                        dashed: false,
                    });
                }
            }
            series.push(Series {
                label: "CRB".into(),
                points: crb_points(result),
                dashed: true,
            });
            ("RMSE per refinement step versus SNR", "RMSE (dB)", None)
        }
        PlotKind::Complexity => {
            return Err(HarnessError::Config(
                "complexity plots are drawn from a complexity report".into(),
            ))
        }
    };
    Ok(Chart {
        title: title.into(),
        x_label: "SNR (dB)".into(),
        y_label: y_label.into(),
        series,
        y_range,
    })
}

fn crb_points(result: &SweepResult) -> Vec<(f64, f64)> {
    result
        .estimators
        .first()
        .map(|first| {
            result
                .series(first)
                .map(|c| (c.snr_db, 20.0 * c.crb_sqrt_deg.log10()))
                .collect()
        })
        .unwrap_or_else(|| result.snr_db.iter().map(|&s| (s, f64::NAN)).collect())
}

pub fn complexity_chart(report: &ComplexityReport) -> Chart {
    let series = ComplexityModel::ALL
        .iter()
        .enumerate()
        .map(|(k, model)| Series {
            label: model.name().into(),
            points: report
                .rows
                .iter()
                .map(|r| (f64::from(r.m), (r.counts[k] as f64).log10()))
                .collect(),
            dashed: false,
        })
        .collect();
    Chart {
        title: "Multiplications versus number of sensors".into(),
        x_label: "Number of sensors M".into(),
        y_label: "log10 multiplications".into(),
        series,
        y_range: None,
    }
}

pub fn emit_chart(chart: &Chart, path: &Path) -> Result<()> {
    write_file(path, &chart.to_svg())
}

/// Writes one chart of a sweep.
pub fn emit_plot(result: &SweepResult, path: &Path, kind: PlotKind) -> Result<()> {
    emit_chart(&sweep_chart(result, kind)?, path)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn data_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi - lo < 1e-12 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let marks = (0..=count).map(|k| start + k as f64 * step).collect();
    (start, end, marks)
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = data_range(all().map(|p| p.0)).unwrap_or((0.0, 1.0));
        let (y0, y1) = self
            .y_range
            .or_else(|| data_range(all().map(|p| p.1)))
            .unwrap_or((0.0, 1.0));
        let (x0, x1, x_ticks) = ticks(x0, x1);
        let (y0, y1, y_ticks) = ticks(y0, y1);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text class="title" x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        let _ = writeln!(svg, r#"<g class="axes" stroke="black" fill="none">"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/>"#
        );
        for &t in &x_ticks {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
                TOP + plot_h
            );
        }
        for &t in &y_ticks {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
                LEFT + plot_w
            );
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(svg, r#"<g class="tick-labels" fill="black">"#);
        for &t in &x_ticks {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(t),
                TOP + plot_h + 18.0,
                tick_label(t)
            );
        }
        for &t in &y_ticks {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 8.0,
                sy(t) + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(
            svg,
            r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text class="y-label" x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
                    pen_down = true;
                } else {
                    pen_down = false;
                }
            }
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<path class="series" data-label="{}" d="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                escape(&s.label),
                d.trim_end()
            );
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let lx = LEFT + plot_w + 14.0;
            let _ = writeln!(
                svg,
                r#"<line class="legend-key" x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                svg,
                r#"<text class="legend" x="{}" y="{}">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
