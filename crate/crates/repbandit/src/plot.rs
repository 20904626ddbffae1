//! Static regret figures: mean curve with a one-sigma band per series.

use std::fmt::Write as _;

use crate::harness::AggregateResult;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub rounds: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Series {
    pub fn from_result(result: &AggregateResult) -> Self {
        Self {
            label: result.label.clone(),
            rounds: result.checkpoints.clone(),
            mean: result.mean_regret.clone(),
            std: result.std_regret.clone(),
        }
    }
}

/// Tidy long format: `series,round,mean_regret,std_regret`.
pub fn long_csv(series: &[Series]) -> String {
    let mut out = String::from("series,round,mean_regret,std_regret\n");
    for s in series {
        for k in 0..s.rounds.len() {
            writeln!(
                out,
                "{},{},{},{}",
                s.label, s.rounds[k], s.mean[k], s.std[k]
            )
            .unwrap();
        }
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Round number near `span / 5` for axis ticks.
fn tick_step(span: f64) -> f64 {
    if span <= 0.0 {
        return 1.0;
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .find(|&u| u * mag >= raw)
        .unwrap_or(10.0);
    unit * mag
}

fn label(v: f64) -> String {
    if v.abs() >= 1e4 {
        format!("{v:.0e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

pub fn render_svg(title: &str, series: &[Series]) -> String {
    let x_max = series
        .iter()
        .filter_map(|s| s.rounds.last())
        .copied()
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let y_max = series
        .iter()
        .flat_map(|s| s.mean.iter().zip(&s.std).map(|(m, d)| m + d))
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |y: f64| TOP + plot_h - y.max(0.0) / y_max * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    )
    .unwrap();

    let step = tick_step(y_max);
    let mut y = 0.0;
    while y <= y_max {
        writeln!(
            svg,
            r##"<line x1="{LEFT}" x2="{0}" y1="{1:.2}" y2="{1:.2}" stroke="#e5e5e5"/><text x="{2}" y="{3:.2}" text-anchor="end">{4}</text>"##,
            LEFT + plot_w,
            py(y),
            LEFT - 6.0,
            py(y) + 4.0,
            label(y)
        )
        .unwrap();
        y += step;
    }
    let step = tick_step(x_max);
    let mut x = 0.0;
    while x <= x_max {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + plot_h + 18.0,
            label(x)
        )
        .unwrap();
        x += step;
    }
    writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">round</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">cumulative regret</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let upper = s.rounds.iter().zip(s.mean.iter().zip(&s.std));
        let mut band: Vec<String> = upper
            .clone()
            .map(|(&t, (m, d))| format!("{:.2},{:.2}", px(t as f64), py(m + d)))
            .collect();
        band.extend(
            upper
                .rev()
                .map(|(&t, (m, d))| format!("{:.2},{:.2}", px(t as f64), py(m - d))),
        );
        writeln!(
            svg,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        )
        .unwrap();
        let line: Vec<String> = s
            .rounds
            .iter()
            .zip(&s.mean)
            .map(|(&t, &m)| format!("{:.2},{:.2}", px(t as f64), py(m)))
            .collect();
        writeln!(
            svg,
            r#"<polyline class="mean" data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            escape(&s.label),
            line.join(" ")
        )
        .unwrap();
        let ly = TOP + 14.0 + idx as f64 * 20.0;
        let lx = LEFT + plot_w + 16.0;
        writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
