//! Minimal static SVG 1.1 line plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str, log_y: bool) {
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN / 2.0, H - MARGIN, MARGIN / 1.5);
    let _ = writeln!(
        out,
        r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#
    );
    let fmt = |v: f64| if log_y { format!("1e{v:.0}") } else { format!("{v:.3}") };
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.0);
    let _ = writeln!(out, r#"<text x="{x1}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.1);
    let _ = writeln!(out, r#"<text x="{}" y="{y0}" text-anchor="end">{}</text>"#, x0 - 4.0, fmt(y.0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y1 + 8.0, fmt(y.1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

/// Line plot; with `log_y` the y values are plotted as `log10`.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let tf = |v: f64| if log_y { if v > 0.0 { v.log10() } else { f64::NAN } } else { v };
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.points.iter().map(|p| tf(p.1))));
    let yr = if log_y { (yr.0.floor(), yr.1.ceil()) } else { yr };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xr, yr, xlabel, ylabel, log_y);
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (W - 1.5 * MARGIN);
    let sy = |y: f64| (H - MARGIN) - (y - yr.0) / (yr.1 - yr.0) * (H - MARGIN - MARGIN / 1.5);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| tf(p.1).is_finite())
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(tf(p.1))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - MARGIN * 2.5,
            MARGIN + 14.0 * k as f64,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `values[j][i]` at `(xs[i], ys[j])`, blue-white-red about zero.
pub fn heatmap(title: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> String {
    let vmax = values.iter().flatten().fold(0.0f64, |a, v| if v.is_finite() { a.max(v.abs()) } else { a });
    let vmax = if vmax > 0.0 { vmax } else { 1.0 };
    let mut out = String::new();
    header(&mut out, &format!("{title}  (|max| = {vmax:.3e})"));
    let size = H - 1.7 * MARGIN;
    let (cw, ch) = (size / xs.len() as f64, size / ys.len() as f64);
    let left = (W - size) / 2.0;
    let top = MARGIN / 1.5;
    for (j, row) in values.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let t = if v.is_finite() { (v / vmax).clamp(-1.0, 1.0) } else { 0.0 };
            let (r, g, b) = if t >= 0.0 {
                (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
            } else {
                (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({:.0},{:.0},{:.0})"/>"#,
                left + i as f64 * cw,
                top + (ys.len() - 1 - j) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                r,
                g,
                b
            );
        }
    }
    let label = |x: f64, y: f64, anchor: &str, s: String| format!(r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{s}</text>"#);
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let (y0, y1) = (ys[0], ys[ys.len() - 1]);
    let _ = writeln!(out, "{}", label(left, top + size + 14.0, "middle", format!("{x0:.2}")));
    let _ = writeln!(out, "{}", label(left + size, top + size + 14.0, "middle", format!("{x1:.2}")));
    let _ = writeln!(out, "{}", label(left - 4.0, top + size, "end", format!("{y0:.2}")));
    let _ = writeln!(out, "{}", label(left - 4.0, top + 8.0, "end", format!("{y1:.2}")));
    out.push_str("</svg>\n");
    out
}
