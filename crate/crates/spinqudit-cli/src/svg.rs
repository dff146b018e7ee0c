//! Minimal native SVG output: line charts and scattered heat maps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub markers: bool,
}

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series<'a>>,
    /// Dashed vertical guides at these x values.
    pub vlines: Vec<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl LinePlot<'_> {
    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
            .map(|(x, y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in &pts {
            x0 = x0.min(*x);
            x1 = x1.max(*x);
            y0 = y0.min(*y);
            y1 = y1.max(*y);
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-300 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
        let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(self.title));
        let _ = writeln!(s, r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - ML - MR, H - MT - MB);
        for i in 0..=5 {
            let fx = x0 + (x1 - x0) * i as f64 / 5.0;
            let fy = y0 + (y1 - y0) * i as f64 / 5.0;
            let lx = if self.log_x { 10f64.powf(fx) } else { fx };
            let ly = if self.log_y { 10f64.powf(fy) } else { fy };
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(fx), H - MB + 16.0, fmt_tick(lx));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, ML - 6.0, py(fy) + 4.0, fmt_tick(ly));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ML + W - MR) / 2.0, H - 12.0, esc(self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0,
            esc(self.y_label)
        );
        for v in &self.vlines {
            let x = tx(*v);
            if x.is_finite() && x >= x0 && x <= x1 {
                let _ = writeln!(s, r#"<line x1="{0:.1}" x2="{0:.1}" y1="{MT}" y2="{1}" stroke="gray" stroke-dasharray="5,4"/>"#, px(x), H - MB);
            }
        }
        for (k, ser) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let p: Vec<(f64, f64)> = ser
                .points
                .iter()
                .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
                .map(|(x, y)| (px(tx(*x)), py(ty(*y))))
                .collect();
            if ser.markers {
                for (x, y) in &p {
                    let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
                }
            }
            if p.len() > 1 {
                let d: Vec<String> = p.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, d.join(" "));
            }
            let ly = MT + 16.0 + 16.0 * k as f64;
            let _ = writeln!(s, r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - MR - 150.0, W - MR - 130.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - MR - 125.0, ly + 4.0, esc(ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Diverging blue-white-red colour, white at zero, saturated at `|v| = limit`.
pub fn diverging(v: f64, limit: f64) -> String {
    let t = (v / limit).clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (1.0, 1.0 - t, 1.0 - t)
    } else {
        (1.0 + t, 1.0 + t, 1.0)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}

/// Heat map of scattered `(x, y, value)` samples in a `[-extent, extent]`
/// box, each drawn as a small square. The colour scale is fixed by `limit`.
pub fn heatmap(title: &str, points: &[(f64, f64, f64)], extent: (f64, f64), limit: f64) -> String {
    let size = 520.0;
    let scale = size / (2.0 * extent.0.max(extent.1));
    let (w, h) = (2.0 * extent.0 * scale + 40.0, 2.0 * extent.1 * scale + 70.0);
    let cell = 2.2;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.0}" y="18" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, esc(title));
    let (cx, cy) = (w / 2.0, 30.0 + extent.1 * scale);
    for (x, y, v) in points {
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="{}"/>"#,
            cx + x * scale - cell / 2.0,
            cy - y * scale - cell / 2.0,
            diverging(*v, limit)
        );
    }
    // colour bar
    let by = h - 28.0;
    for i in 0..100 {
        let v = -limit + 2.0 * limit * i as f64 / 99.0;
        let _ = writeln!(s, r#"<rect x="{:.1}" y="{by}" width="2.6" height="10" fill="{}"/>"#, w / 2.0 - 130.0 + 2.6 * i as f64, diverging(v, limit));
    }
    let _ = writeln!(s, r#"<text x="{:.0}" y="{}" text-anchor="end">{}</text>"#, w / 2.0 - 135.0, by + 9.0, fmt_tick(-limit));
    let _ = writeln!(s, r#"<text x="{:.0}" y="{}">{}</text>"#, w / 2.0 + 135.0, by + 9.0, fmt_tick(limit));
    s.push_str("</svg>\n");
    s
}
