use std::fmt::Write as _;

use serde::Serialize;

use super::run::ResultRow;
use crate::error::{Error, Result};

/// Mean final-checkpoint `regret_gr` over trials for one (policy, T).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub checkpoint_t: usize,
    pub trials: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single trial.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub policy: String,
    pub cells: Vec<CellSummary>,
}

impl SeriesSummary {
    pub fn at(&self, horizon: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.horizon == horizon)
    }
}

pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by policy (first-appearance order) and T (ascending), keeping
/// for each group the rows at its largest checkpoint.
pub fn summarize(rows: &[ResultRow]) -> Vec<SeriesSummary> {
    let mut policies: Vec<&str> = Vec::new();
    for r in rows {
        if !policies.contains(&r.policy.as_str()) {
            policies.push(&r.policy);
        }
    }
    policies
        .into_iter()
        .map(|policy| {
            let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.policy == policy).collect();
            let mut horizons: Vec<usize> = mine.iter().map(|r| r.horizon).collect();
            horizons.sort_unstable();
            horizons.dedup();
            let cells = horizons
                .into_iter()
                .map(|horizon| {
                    let group: Vec<&&ResultRow> = mine.iter().filter(|r| r.horizon == horizon).collect();
                    let last = group.iter().map(|r| r.checkpoint_t).max().expect("non-empty group");
                    let values: Vec<f64> =
                        group.iter().filter(|r| r.checkpoint_t == last).map(|r| r.regret_gr).collect();
                    let (mean, std_err) = mean_and_std_err(&values);
                    CellSummary { horizon, checkpoint_t: last, trials: values.len(), mean, std_err }
                })
                .collect();
            SeriesSummary { policy: policy.to_string(), cells }
        })
        .collect()
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Mean regret against the robust-greedy benchmark versus T (log axis),
/// one polyline per policy with a shaded ±2 standard-error band.
pub fn render_svg(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Parse("no result rows to plot".into()));
    }
    let series = summarize(rows);
    let cells = series.iter().flat_map(|s| s.cells.iter());
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (0.0f64, f64::NEG_INFINITY);
    for c in cells {
        let x = (c.horizon as f64).log10();
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(c.mean - 2.0 * c.std_err);
        y_hi = y_hi.max(c.mean + 2.0 * c.std_err);
    }
    if x_hi - x_lo < 1e-9 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi - y_lo < 1e-9 {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - if y_lo < 0.0 { pad } else { 0.0 }, y_hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: usize| LEFT + ((t as f64).log10() - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );

    let mut xticks: Vec<usize> = series.iter().flat_map(|s| s.cells.iter().map(|c| c.horizon)).collect();
    xticks.sort_unstable();
    xticks.dedup();
    for t in xticks {
        let x = sx(t);
        let _ = writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0
        );
    }
    for i in 0..=5 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.4}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">horizon T (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        w,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean robust-greedy regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = s.cells.iter().map(|c| (sx(c.horizon), sy(c.mean + 2.0 * c.std_err)));
        let lower = s.cells.iter().rev().map(|c| (sx(c.horizon), sy(c.mean - 2.0 * c.std_err)));
        let band: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            w,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = s.cells.iter().map(|c| format!("{:.2},{:.2}", sx(c.horizon), sy(c.mean))).collect();
        let _ = writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for c in &s.cells {
            let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(c.horizon), sy(c.mean));
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            w,
            r#"<rect x="{lx:.2}" y="{ly:.2}" width="14" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            ly + 9.0,
            escape(&s.policy)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}
