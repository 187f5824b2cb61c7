//! Minimal step-plot SVG writer (800×400 viewport).

use std::fmt::Write as _;

use crate::lti::ControlSignal;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

pub struct Series<'a> {
    pub name: &'a str,
    pub control: &'a ControlSignal,
    pub color: &'a str,
    pub dashed: bool,
}

pub fn step_plot(title: &str, series: &[Series<'_>]) -> String {
    let horizon = series.iter().map(|s| s.control.horizon()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for s in series {
        for &v in s.control.values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.1 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |t: f64| MARGIN + t / horizon * (WIDTH - 2.0 * MARGIN);
    let sy = |u: f64| HEIGHT - MARGIN - (u - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);
    // axes
    let (x0, x1, y0) = (sx(0.0), sx(horizon), sy(0.0));
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0:.2}" x2="{x1}" y2="{y0:.2}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{}" x2="{x0}" y2="{}" stroke="black"/>"#, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14">t</text>"#, x1 + 8.0, y0 + 4.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14">u</text>"#, x0 - 4.0, MARGIN - 10.0);
    for tick in [lo + pad, 0.0, hi - pad] {
        let y = sy(tick);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            super::csv::fmt_f64((tick * 100.0).round() / 100.0)
        );
    }
    for i in 0..=5 {
        let t = horizon * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx(t),
            HEIGHT - MARGIN + 16.0,
            super::csv::fmt_f64((t * 100.0).round() / 100.0)
        );
    }

    for (i, s) in series.iter().enumerate() {
        let u = s.control;
        let mut pts = String::new();
        let mut last = None;
        for (k, &v) in u.values().iter().enumerate() {
            let (a, b) = (u.interval_start(k), u.interval_start(k) + u.delta());
            if last != Some(v) {
                let _ = write!(pts, "{:.2},{:.2} ", sx(a), sy(v));
            }
            if k + 1 == u.n_intervals() || u.values()[k + 1] != v {
                let _ = write!(pts, "{:.2},{:.2} ", sx(b), sy(v));
            }
            last = Some(v);
        }
        let dash = if s.dashed { r#" stroke-dasharray="8,5""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
            s.color,
            pts.trim_end()
        );
        let ly = MARGIN + 20.0 * i as f64;
        let lx = WIDTH - MARGIN - 170.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 30.0,
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
            lx + 38.0,
            ly + 4.0,
            s.name
        );
    }
    out.push_str("</svg>\n");
    out
}
