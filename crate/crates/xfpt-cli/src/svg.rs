//! Minimal native SVG output: log-x line charts and field overlays.

use xfpt_core::geodesic::{MetricField, RegionMasks};

const W: f64 = 760.0;
const H: f64 = 520.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Line chart with a log10 x axis.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart_log_x(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(x.log10());
            ys.push(y);
        }
    }
    let (x0, x1) = min_max(&xs);
    let (mut y0, mut y1) = min_max(&ys);
    if y0 == y1 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut out = header(W, H);
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        title
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    // ticks: integer decades on x, 5 linear ticks on y
    for d in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = px(d as f64);
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{b}\" x2=\"{x:.1}\" y2=\"{b2}\" stroke=\"black\"/>\n\
             <text x=\"{x:.1}\" y=\"{ty}\" text-anchor=\"middle\" font-size=\"11\">1e{d}</text>\n",
            b = H - MARGIN,
            b2 = H - MARGIN + 6.0,
            ty = H - MARGIN + 20.0
        ));
    }
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let yy = py(y);
        out.push_str(&format!(
            "<line x1=\"{m2}\" y1=\"{yy:.1}\" x2=\"{m}\" y2=\"{yy:.1}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\" text-anchor=\"end\" font-size=\"11\">{y:.3}</text>\n",
            m = MARGIN,
            m2 = MARGIN - 6.0,
            tx = MARGIN - 9.0,
            ty = yy + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        W / 2.0,
        H - 15.0,
        x_label
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {:.0})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        y_label
    ));
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x.log10()), py(y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.join(" ")
        ));
        let ly = MARGIN + 16.0 * i as f64 + 10.0;
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{ly:.1}\" x2=\"{x2}\" y2=\"{ly:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"/><text x=\"{tx}\" y=\"{ty:.1}\" font-size=\"12\">{}</text>\n",
            s.label,
            x = W - MARGIN - 120.0,
            x2 = W - MARGIN - 96.0,
            tx = W - MARGIN - 90.0,
            ty = ly + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Field overlay: slow cells shaded, obstacles dark, regions outlined, paths
/// drawn on top.
pub fn field_overlay(
    field: &MetricField,
    masks: &RegionMasks,
    paths: &[(String, Vec<[f64; 2]>)],
) -> String {
    let scale = (W - 2.0 * MARGIN) / field.width().max(field.height());
    let px = |x: f64| MARGIN + x * scale;
    let py = |y: f64| MARGIN + (field.height() - y) * scale;
    let mut out = header(W, MARGIN * 2.0 + field.height() * scale);
    let h = field.h();
    for iy in 0..field.ny() {
        for ix in 0..field.nx() {
            let i = field.idx(ix, iy);
            let fill = if field.is_obstacle(ix, iy) {
                Some("#444444".to_string())
            } else if masks.source_mask[i] {
                Some("#7fbf7f".to_string())
            } else if masks.target_mask[i] {
                Some("#e87f7f".to_string())
            } else {
                let (lo, _) = field.tensor(ix, iy).eigenvalues();
                if lo < 1.0 {
                    // shade slow diffusion toward gray
                    let g = (230.0 - 80.0 * (1.0 - lo).min(1.0)) as u8;
                    Some(format!("#{g:02x}{g:02x}{g:02x}"))
                } else {
                    None
                }
            };
            if let Some(f) = fill {
                let (x, y) = (ix as f64 * h, (iy + 1) as f64 * h);
                out.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{f}\"/>\n",
                    px(x),
                    py(y),
                    h * scale,
                    h * scale
                ));
            }
        }
    }
    for (i, (label, path)) in paths.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = path
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p[0]), py(p[1])))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" \
             opacity=\"0.9\"><title>{label}</title></polyline>\n",
            pts.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn min_max(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}
