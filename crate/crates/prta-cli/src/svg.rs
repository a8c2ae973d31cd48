//! Minimal static SVG scatter plots with logarithmic axes.
//!
//! Two layouts: ratio plots (reference cross at x = 1, y = 1) and value
//! plots (shared scale on both axes with a y = x diagonal). Points with a
//! non-positive coordinate cannot be placed on a log scale; they are counted
//! in an annotation instead of being silently dropped.

use std::fmt::Write as _;
use std::path::Path;

use crate::table::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceLines {
    /// Vertical x = 1 and horizontal y = 1 (ratio plots).
    RatioCross,
    /// The y = x diagonal on a shared scale (value plots).
    Diagonal,
}

#[derive(Debug, Clone)]
pub struct PlotAxes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub reference: ReferenceLines,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 56.0;

struct LogScale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl LogScale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> LogScale {
        LogScale {
            lo,
            hi,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln());
        self.px_lo + t * (self.px_hi - self.px_lo)
    }

    fn decades(&self) -> Vec<i32> {
        let first = self.lo.log10().ceil() as i32;
        let last = self.hi.log10().floor() as i32;
        (first..=last).collect()
    }
}

fn padded_range(values: impl Iterator<Item = f64>, include: Option<f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.chain(include) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.1, 10.0);
    }
    // pad a quarter decade; force at least a decade of visible span
    let pad = 10f64.powf(0.25);
    let (mut lo, mut hi) = (lo / pad, hi * pad);
    if hi / lo < 10.0 {
        let mid = (lo.ln() + hi.ln()) / 2.0;
        lo = (mid - std::f64::consts::LN_10 / 2.0).exp();
        hi = (mid + std::f64::consts::LN_10 / 2.0).exp();
    }
    (lo, hi)
}

/// Renders the plot; see module docs for the layout rules.
pub fn scatter_svg(points: &[ScatterPoint], axes: &PlotAxes) -> String {
    let plottable: Vec<ScatterPoint> = points
        .iter()
        .copied()
        .filter(|p| p.x > 0.0 && p.y > 0.0)
        .collect();
    let omitted = points.len() - plottable.len();

    let include = match axes.reference {
        ReferenceLines::RatioCross => Some(1.0),
        ReferenceLines::Diagonal => None,
    };
    let (x_range, y_range) = match axes.reference {
        ReferenceLines::Diagonal => {
            // shared scale so the diagonal is meaningful
            let all = plottable.iter().flat_map(|p| [p.x, p.y]);
            let r = padded_range(all, include);
            (r, r)
        }
        ReferenceLines::RatioCross => (
            padded_range(plottable.iter().map(|p| p.x), include),
            padded_range(plottable.iter().map(|p| p.y), include),
        ),
    };

    let xs = LogScale::new(x_range.0, x_range.1, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let ys = LogScale::new(y_range.0, y_range.1, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if omitted > 0 {
        let _ = writeln!(
            svg,
            "<!-- {omitted} non-positive points omitted from log axes -->"
        );
    }

    // gridlines and tick labels at decades
    for e in xs.decades() {
        let px = xs.map(10f64.powi(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="#dddddd"/>"##,
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" font-size="11" text-anchor="middle">1e{e}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 16.0
        );
    }
    for e in ys.decades() {
        let py = ys.map(10f64.powi(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{py:.2}" font-size="11" text-anchor="end" dominant-baseline="middle">1e{e}</text>"#,
            MARGIN_LEFT - 8.0
        );
    }

    // reference geometry
    match axes.reference {
        ReferenceLines::RatioCross => {
            let px = xs.map(1.0);
            let py = ys.map(1.0);
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="#cc3333" stroke-dasharray="5,4"/>"##,
                MARGIN_TOP,
                HEIGHT - MARGIN_BOTTOM
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#cc3333" stroke-dasharray="5,4"/>"##,
                MARGIN_LEFT,
                WIDTH - MARGIN_RIGHT
            );
        }
        ReferenceLines::Diagonal => {
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#cc3333" stroke-dasharray="5,4"/>"##,
                xs.map(x_range.0),
                ys.map(y_range.0),
                xs.map(x_range.1),
                ys.map(y_range.1),
            );
        }
    }

    // frame
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        MARGIN_LEFT,
        MARGIN_TOP,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );

    for p in &plottable {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#33688c" fill-opacity="0.65"/>"##,
            xs.map(p.x),
            ys.map(p.y)
        );
    }

    // labels
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(&axes.title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        xml_escape(&axes.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(&axes.y_label)
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_scatter_svg(
    points: &[ScatterPoint],
    axes: &PlotAxes,
    path: &Path,
) -> Result<(), HarnessError> {
    std::fs::write(path, scatter_svg(points, axes))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
