//! Minimal SVG chart of ratio against target dimension.

use std::fmt::Write;

/// One x position with a central value and a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub t: f64,
    pub mid: f64,
    pub lo: f64,
    pub hi: f64,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// A standalone SVG with the medians joined by a polyline, the bands as
/// vertical bars and a dashed reference line at ratio 1.
pub fn ratio_chart(title: &str, points: &[BandPoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let finite: Vec<&BandPoint> = points.iter().filter(|p| p.lo.is_finite() && p.hi.is_finite()).collect();
    if finite.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let tmin = finite.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
    let tmax = finite.iter().map(|p| p.t).fold(f64::NEG_INFINITY, f64::max);
    let ymin = finite.iter().map(|p| p.lo).fold(1.0, f64::min);
    let ymax = finite.iter().map(|p| p.hi).fold(1.0, f64::max);
    let pad = 0.05 * (ymax - ymin).max(1e-9);
    let (ymin, ymax) = (ymin - pad, ymax + pad);
    let xs = |t: f64| {
        if tmax > tmin {
            MARGIN + (t - tmin) / (tmax - tmin) * (W - 2.0 * MARGIN)
        } else {
            W / 2.0
        }
    };
    let ys = |y: f64| H - MARGIN - (y - ymin) / (ymax - ymin) * (H - 2.0 * MARGIN);

    let _ = writeln!(
        s,
        r##"<g stroke="#333" fill="none"><line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}"/></g>"##,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{y}" x2="{r}" y2="{y}" stroke="#999" stroke-dasharray="4 4"/>"##,
        y = ys(1.0),
        r = W - MARGIN
    );
    for (label, y) in [(ymin, ys(ymin)), (1.0, ys(1.0)), (ymax, ys(ymax))] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{label:.3}</text>"#,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    for p in &finite {
        let x = xs(p.t);
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#8ab" stroke-width="3"/>"##,
            ys(p.lo),
            ys(p.hi)
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            H - MARGIN + 16.0,
            p.t
        );
    }
    let path: Vec<String> = finite.iter().map(|p| format!("{},{}", xs(p.t), ys(p.mid))).collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#c33" stroke-width="2"/>"##,
        path.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">target dimension t</text>"#,
        W / 2.0,
        H - 16.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
