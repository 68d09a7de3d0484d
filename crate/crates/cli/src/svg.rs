//! Self-contained static SVG plots, generated from parsed trajectory CSV.
//!
//! Both emitters are pure functions of the parsed rows: regenerating a plot
//! from the same CSV bytes yields the same SVG bytes. No external assets,
//! scripts, or fonts beyond the viewer's sans-serif default.

use crate::csv::TrajectoryRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Inclusive data range with a small visual pad; degenerate ranges widen to
/// a unit interval so a constant signal still plots.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    /// Axes, grid ticks, and labels shared by both plots.
    fn chrome(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        out.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"15\">{title}</text>\n",
            0.5 * WIDTH
        ));
        for j in 0..=4 {
            let f = j as f64 / 4.0;
            let xv = self.x_lo + f * (self.x_hi - self.x_lo);
            let yv = self.y_lo + f * (self.y_hi - self.y_lo);
            let xs = self.sx(xv);
            let ys = self.sy(yv);
            out.push_str(&format!(
                "<line x1=\"{xs:.1}\" y1=\"{y0:.1}\" x2=\"{xs:.1}\" y2=\"{y1:.1}\" \
                 stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
            ));
            out.push_str(&format!(
                "<line x1=\"{x0:.1}\" y1=\"{ys:.1}\" x2=\"{x1:.1}\" y2=\"{ys:.1}\" \
                 stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
            ));
            out.push_str(&format!(
                "<text x=\"{xs:.1}\" y=\"{:.1}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                y0 + 16.0,
                tick_label(xv)
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" \
                 font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                x0 - 6.0,
                ys + 4.0,
                tick_label(yv)
            ));
        }
        out.push_str(&format!(
            "<rect x=\"{x0:.1}\" y=\"{y1:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
             stroke=\"black\" stroke-width=\"1\"/>\n",
            x1 - x0,
            y0 - y1
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">{x_label}</text>\n",
            0.5 * (x0 + x1),
            HEIGHT - 14.0
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\" transform=\"rotate(-90 18 {:.1})\">{y_label}</text>\n",
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        ));
    }
}

fn open_svg() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    )
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str) {
    let path: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
        path.join(" ")
    ));
}

/// UAV ids in first-appearance order.
fn uav_ids(rows: &[TrajectoryRow]) -> Vec<u32> {
    let mut ids = Vec::new();
    for row in rows {
        if !ids.contains(&row.uav_id) {
            ids.push(row.uav_id);
        }
    }
    ids
}

/// Top-down trajectory plot: one polyline per UAV, hollow start and filled
/// end markers, ground users implied by the motion itself.
pub fn trajectory_svg(rows: &[TrajectoryRow]) -> String {
    let frame = Frame {
        x_lo: padded_range(rows.iter().map(|r| r.x)).0,
        x_hi: padded_range(rows.iter().map(|r| r.x)).1,
        y_lo: padded_range(rows.iter().map(|r| r.y)).0,
        y_hi: padded_range(rows.iter().map(|r| r.y)).1,
    };
    let mut out = open_svg();
    frame.chrome(&mut out, "UAV trajectories", "x (m)", "y (m)");
    for (k, id) in uav_ids(rows).into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.uav_id == id)
            .map(|r| (frame.sx(r.x), frame.sy(r.y)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        polyline(&mut out, &pts, color);
        let (sx, sy) = pts[0];
        let (ex, ey) = pts[pts.len() - 1];
        out.push_str(&format!(
            "<circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"4\" fill=\"white\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n"
        ));
        out.push_str(&format!(
            "<circle cx=\"{ex:.2}\" cy=\"{ey:.2}\" r=\"4\" fill=\"{color}\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"{color}\">uav {id}</text>\n",
            WIDTH - MARGIN_RIGHT - 70.0,
            MARGIN_TOP + 16.0 + 16.0 * k as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Minimum user rate against time.
pub fn rate_svg(rows: &[TrajectoryRow]) -> String {
    // r_min repeats across the UAV rows of one instant; keep one per t
    let first = rows.first().map(|r| r.uav_id);
    let series: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| Some(r.uav_id) == first)
        .map(|r| (r.t, r.r_min))
        .collect();
    let frame = Frame {
        x_lo: padded_range(series.iter().map(|p| p.0)).0,
        x_hi: padded_range(series.iter().map(|p| p.0)).1,
        y_lo: padded_range(series.iter().map(|p| p.1)).0,
        y_hi: padded_range(series.iter().map(|p| p.1)).1,
    };
    let mut out = open_svg();
    frame.chrome(
        &mut out,
        "Minimum user rate",
        "t (s)",
        "R_min (bits/channel-use)",
    );
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|(t, r)| (frame.sx(*t), frame.sy(*r)))
        .collect();
    polyline(&mut out, &pts, PALETTE[0]);
    out.push_str("</svg>\n");
    out
}
