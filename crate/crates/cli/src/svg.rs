//! Minimal SVG line plot of an estimated tau curve with a shaded band.
//!
//! The vertical axis is always [-1, 1] and the horizontal axis spans the
//! evaluation grid, so plots of different fits are directly comparable.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        MARGIN_L + (x - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let y = y.clamp(-1.0, 1.0);
        MARGIN_T + (1.0 - y) / 2.0 * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

/// Maximal runs of indices where every value in `cols` is finite.
fn finite_runs(n: usize, ok: impl Fn(usize) -> bool) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for i in 0..=n {
        match (i < n && ok(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Renders the curve; `band` holds pointwise `(lo, hi)` when available.
/// `comment` is embedded verbatim in an XML comment.
pub fn render(
    xs: &[f64],
    tau: &[f64],
    band: Option<(&[f64], &[f64])>,
    title: &str,
    comment: &str,
) -> String {
    let f = Frame {
        x0: xs.first().copied().unwrap_or(0.0),
        x1: xs.last().copied().unwrap_or(1.0),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<!--\n{}-->", comment.replace("--", "- -"));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let (left, right) = (MARGIN_L, WIDTH - MARGIN_R);
    let (top, bottom) = (MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for k in 0..=4 {
        let y = -1.0 + 0.5 * k as f64;
        let py = f.py(y);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{py:.2}" x2="{right}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{y:.1}</text>"##,
            left - 6.0,
            py + 4.0
        );
    }
    for k in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let px = f.px(x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x:.3}</text>"#,
            bottom + 5.0,
            bottom + 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">x</text>"#,
        (left + right) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {:.2})">tau(x)</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        escape(title)
    );

    if let Some((lo, hi)) = band {
        for run in finite_runs(xs.len(), |i| lo[i].is_finite() && hi[i].is_finite()) {
            let mut pts: Vec<String> = run
                .clone()
                .map(|i| format!("{:.2},{:.2}", f.px(xs[i]), f.py(hi[i])))
                .collect();
            pts.extend(run.rev().map(|i| format!("{:.2},{:.2}", f.px(xs[i]), f.py(lo[i]))));
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
                pts.join(" ")
            );
        }
    }
    for run in finite_runs(xs.len(), |i| tau[i].is_finite()) {
        let pts: Vec<String> = run
            .map(|i| format!("{:.2},{:.2}", f.px(xs[i]), f.py(tau[i])))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
