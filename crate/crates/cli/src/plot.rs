//! Minimal SVG charts. Callers feed them values parsed back from CSV files.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(svg: &mut String, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let (x0, x1, y0, y1) = (PAD, W - PAD / 2.0, H - PAD, PAD / 1.5);
    let _ = writeln!(
        svg,
        "<path d=\"M{x0} {y1} L{x0} {y0} L{x1} {y0}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        H - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
    for (v, px) in [(x.0, x0), (x.1, x1)] {
        let _ = writeln!(
            svg,
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            y0 + 14.0,
            tick(v)
        );
    }
    for (v, py) in [(y.0, y0), (y.1, y1)] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{py}\" text-anchor=\"end\">{}</text>",
            x0 - 4.0,
            tick(v)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let yr = (yr.0.min(0.0), yr.1);
    let sx = |v: f64| PAD + (v - xr.0) / (xr.1 - xr.0) * (W - 1.5 * PAD);
    let sy = |v: f64| H - PAD - (v - yr.0) / (yr.1 - yr.0) * (H - PAD - PAD / 1.5);
    let mut svg = header(title);
    axes(&mut svg, xlabel, ylabel, xr, yr);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = s
            .points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                format!(
                    "{}{:.2} {:.2}",
                    if i == 0 { "M" } else { "L" },
                    sx(x),
                    sy(y)
                )
            })
            .collect();
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            d.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>",
            PAD + 8.0,
            PAD / 1.5 + 14.0 * (k as f64 + 1.0),
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// `values[row][col]` in `[0, 1]`, row 0 drawn at the bottom; optional
/// per-column curve ordinates in `(0, 1]`.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    values: &[Vec<f64>],
    curve: &[Option<f64>],
) -> String {
    let rows = values.len().max(1);
    let cols = values.first().map_or(1, |r| r.len().max(1));
    let (pw, ph) = (W - 1.5 * PAD, H - PAD - PAD / 1.5);
    let (cw, ch) = (pw / cols as f64, ph / rows as f64);
    let mut svg = header(title);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                PAD + j as f64 * cw,
                H - PAD - (i + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let pts: Vec<String> = curve
        .iter()
        .enumerate()
        .filter_map(|(j, c)| {
            c.map(|y| format!("{:.2},{:.2}", PAD + (j as f64 + 0.5) * cw, H - PAD - y * ph))
        })
        .collect();
    if !pts.is_empty() {
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
    }
    axes(&mut svg, xlabel, ylabel, (0.0, 1.0), (0.0, 1.0));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let s = line_chart(
            "t",
            "C",
            "v",
            &[Series {
                label: "a<b".into(),
                points: vec![(1.0, 1.0), (2.0, 4.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        let h = heatmap(
            "t",
            "x",
            "y",
            &[vec![0.0, 1.0], vec![0.5, 1.0]],
            &[None, Some(1.0)],
        );
        assert_eq!(h.matches("<rect").count(), 5);
        assert!(h.contains("polyline"));
    }
}
