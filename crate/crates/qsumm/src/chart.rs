//! Self-contained SVG bar charts for run comparisons: one bar per approach
//! with standard-deviation error bars. No external assets.

use crate::pipeline::Comparison;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 80.0;
const MARGIN_TOP: f64 = 30.0;

/// Renders the aggregate means of a [`Comparison`] as a grouped bar chart.
pub fn comparison_chart(cmp: &Comparison) -> String {
    let n = cmp.approaches.len();
    let plot_w = WIDTH - MARGIN_LEFT - 20.0;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_max = cmp
        .aggregate_means
        .iter()
        .zip(&cmp.aggregate_stds)
        .map(|(m, s)| m + s)
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.15;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / y_max);
    let slot = plot_w / n as f64;
    let bar_w = slot * 0.6;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h,
        WIDTH - 20.0,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    // y ticks
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_LEFT}\" y2=\"{y}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{v:.3}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">Mean F1 ROUGE-SU4</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    for (i, name) in cmp.approaches.iter().enumerate() {
        let mean = cmp.aggregate_means[i];
        let std = cmp.aggregate_stds[i];
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let y = y_of(mean);
        let h = MARGIN_TOP + plot_h - y;
        svg.push_str(&format!(
            "<rect class=\"bar\" data-approach=\"{}\" data-mean=\"{mean}\" x=\"{x}\" y=\"{y}\" width=\"{bar_w}\" height=\"{h}\" fill=\"#4878a8\" stroke=\"black\"/>\n",
            xml_escape(name)
        ));
        // error bar
        let cx = x + bar_w / 2.0;
        let y_hi = y_of((mean + std).min(y_max));
        let y_lo = y_of((mean - std).max(0.0));
        svg.push_str(&format!(
            "<line x1=\"{cx}\" y1=\"{y_hi}\" x2=\"{cx}\" y2=\"{y_lo}\" stroke=\"black\"/>\n"
        ));
        for ey in [y_hi, y_lo] {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{ey}\" x2=\"{}\" y2=\"{ey}\" stroke=\"black\"/>\n",
                cx - 6.0,
                cx + 6.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{cx}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" transform=\"rotate(-30 {cx} {})\">{}</text>\n",
            MARGIN_TOP + plot_h + 16.0,
            MARGIN_TOP + plot_h + 16.0,
            xml_escape(name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
