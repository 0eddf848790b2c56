//! Two-panel SVG per stratum: step survival curves on top, the horizon
//! p-value trace below with the background striped by evidence band.
//!
//! Output is plain text assembled with fixed-precision coordinates, so the
//! same report always renders byte-identically.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::record::Group;
use crate::survival::SignificanceBand;

use super::{AuditReport, StratumBlock};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 640.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const CURVE_TOP: f64 = 48.0;
const CURVE_BOTTOM: f64 = 312.0;
const PVALUE_TOP: f64 = 372.0;
const PVALUE_BOTTOM: f64 = 596.0;
// log10 display floor for p-values
const P_FLOOR: f64 = 1e-4;

const MAJORITY_COLOR: &str = "#1f77b4";
const MINORITY_COLOR: &str = "#ff7f0e";
pub const BAND_INSUFFICIENT_COLOR: &str = "#d9d9d9";
pub const BAND_MARGINAL_COLOR: &str = "#ffc0cb";
pub const BAND_SIGNIFICANT_COLOR: &str = "#ef5350";

fn band_color(band: SignificanceBand) -> &'static str {
    match band {
        SignificanceBand::Insufficient => BAND_INSUFFICIENT_COLOR,
        SignificanceBand::Marginal => BAND_MARGINAL_COLOR,
        SignificanceBand::Significant => BAND_SIGNIFICANT_COLOR,
    }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new() -> Canvas {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(
            out,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
        );
        Canvas { out }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            fmt2(x),
            fmt2(y),
            fmt2(w),
            fmt2(h),
            fill
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed {
            " stroke-dasharray=\"4 3\""
        } else {
            ""
        };
        let _ = writeln!(
            self.out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\"{}/>",
            fmt2(x1),
            fmt2(y1),
            fmt2(x2),
            fmt2(y2),
            stroke,
            dash
        );
    }

    fn path(&mut self, d: &str, stroke: &str, width: f64) {
        let _ = writeln!(
            self.out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            d,
            stroke,
            fmt2(width)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{}\">{}</text>",
            fmt2(x),
            fmt2(y),
            anchor,
            content
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn x_scale(day: f64, max_day: f64) -> f64 {
    MARGIN_LEFT + (day / max_day) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
}

fn y_survival(s: f64) -> f64 {
    CURVE_TOP + (1.0 - s) * (CURVE_BOTTOM - CURVE_TOP)
}

fn y_pvalue(p: f64) -> f64 {
    let clamped = p.clamp(P_FLOOR, 1.0);
    let frac = -clamped.log10() / -P_FLOOR.log10();
    PVALUE_TOP + frac * (PVALUE_BOTTOM - PVALUE_TOP)
}

fn curve_path(points: &[(f64, f64)], max_day: f64) -> String {
    let mut d = String::new();
    let mut last_y = y_survival(1.0);
    for (i, &(day, survival)) in points.iter().enumerate() {
        let x = x_scale(day, max_day);
        let y = y_survival(survival);
        if i == 0 {
            let _ = write!(d, "M {} {}", fmt2(x), fmt2(y));
        } else {
            let _ = write!(d, " H {} V {}", fmt2(x), fmt2(y));
        }
        last_y = y;
    }
    let _ = write!(d, " H {}", fmt2(x_scale(max_day, max_day)));
    let _ = write!(d, " V {}", fmt2(last_y)); // keep path well-formed for single-point curves
    d
}

/// Render the two-panel figure for one stratum of the report. Errors with
/// `UnknownStratum` when the report has no block for `stratum`.
pub fn render_svg(report: &AuditReport, stratum: &str) -> Result<String> {
    let block = report
        .stratum(stratum)
        .ok_or_else(|| Error::UnknownStratum(stratum.to_string()))?;
    Ok(render_block(block))
}

fn render_block(block: &StratumBlock) -> String {
    let max_curve_day = block
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.time_days))
        .max()
        .unwrap_or(0);
    let max_horizon = block.timeline.last().map(|e| e.horizon_days).unwrap_or(0);
    let max_day = f64::from(max_curve_day.max(max_horizon).max(1));

    let mut canvas = Canvas::new();
    canvas.text(
        MARGIN_LEFT,
        24.0,
        "start",
        &format!(
            "stratum {} — majority n={} minority n={} events={}",
            block.stratum, block.counts.majority, block.counts.minority, block.counts.events
        ),
    );

    // ---- top panel: survival curves ----
    canvas.rect(
        MARGIN_LEFT,
        CURVE_TOP,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        CURVE_BOTTOM - CURVE_TOP,
        "#fafafa",
    );
    for i in 0..=4 {
        let s = f64::from(i) * 0.25;
        let y = y_survival(s);
        canvas.line(MARGIN_LEFT, y, WIDTH - MARGIN_RIGHT, y, "#e6e6e6", false);
        canvas.text(MARGIN_LEFT - 8.0, y + 4.0, "end", &format!("{s:.2}"));
    }
    for curve in &block.curves {
        let color = match curve.group {
            Group::Majority => MAJORITY_COLOR,
            Group::Minority => MINORITY_COLOR,
        };
        let points: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|p| (f64::from(p.time_days), p.survival))
            .collect();
        if !points.is_empty() {
            canvas.path(&curve_path(&points, max_day), color, 1.8);
        }
    }
    canvas.text(
        WIDTH - MARGIN_RIGHT - 150.0,
        CURVE_TOP + 16.0,
        "start",
        "majority",
    );
    canvas.line(
        WIDTH - MARGIN_RIGHT - 180.0,
        CURVE_TOP + 12.0,
        WIDTH - MARGIN_RIGHT - 156.0,
        CURVE_TOP + 12.0,
        MAJORITY_COLOR,
        false,
    );
    canvas.text(
        WIDTH - MARGIN_RIGHT - 150.0,
        CURVE_TOP + 32.0,
        "start",
        "minority",
    );
    canvas.line(
        WIDTH - MARGIN_RIGHT - 180.0,
        CURVE_TOP + 28.0,
        WIDTH - MARGIN_RIGHT - 156.0,
        CURVE_TOP + 28.0,
        MINORITY_COLOR,
        false,
    );
    canvas.text(
        MARGIN_LEFT - 44.0,
        (CURVE_TOP + CURVE_BOTTOM) / 2.0,
        "middle",
        "S(t)",
    );

    // ---- bottom panel: p-value trace over horizons ----
    // one stripe per horizon, colored by that horizon's band
    let mut previous = 0.0;
    for entry in &block.timeline {
        let x0 = x_scale(previous, max_day);
        let x1 = x_scale(f64::from(entry.horizon_days), max_day);
        canvas.rect(
            x0,
            PVALUE_TOP,
            x1 - x0,
            PVALUE_BOTTOM - PVALUE_TOP,
            band_color(entry.band),
        );
        previous = f64::from(entry.horizon_days);
    }
    if block.timeline.is_empty() {
        canvas.rect(
            MARGIN_LEFT,
            PVALUE_TOP,
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            PVALUE_BOTTOM - PVALUE_TOP,
            "#fafafa",
        );
        canvas.text(
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            (PVALUE_TOP + PVALUE_BOTTOM) / 2.0,
            "middle",
            "no horizons",
        );
    }

    for (p, label) in [(1.0, "1"), (0.1, "0.1"), (0.01, "0.01"), (0.001, "0.001")] {
        let y = y_pvalue(p);
        canvas.line(MARGIN_LEFT - 4.0, y, MARGIN_LEFT, y, "#333333", false);
        canvas.text(MARGIN_LEFT - 8.0, y + 4.0, "end", label);
    }
    // evidence thresholds, drawn exactly at p = 0.1 and p = 0.05
    for (p, label) in [(0.1, "p = 0.1"), (0.05, "p = 0.05")] {
        let y = y_pvalue(p);
        canvas.line(MARGIN_LEFT, y, WIDTH - MARGIN_RIGHT, y, "#333333", true);
        canvas.text(WIDTH - MARGIN_RIGHT - 4.0, y - 4.0, "end", label);
    }

    if !block.timeline.is_empty() {
        let mut d = String::new();
        for (i, entry) in block.timeline.iter().enumerate() {
            let x = x_scale(f64::from(entry.horizon_days), max_day);
            let y = y_pvalue(entry.p_value);
            let _ = write!(
                d,
                "{} {} {}",
                if i == 0 { "M" } else { " L" },
                fmt2(x),
                fmt2(y)
            );
        }
        canvas.path(&d, "#111111", 1.5);
    }
    canvas.text(
        MARGIN_LEFT - 44.0,
        (PVALUE_TOP + PVALUE_BOTTOM) / 2.0,
        "middle",
        "p",
    );

    // shared x axis
    canvas.line(
        MARGIN_LEFT,
        PVALUE_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        PVALUE_BOTTOM,
        "#333333",
        false,
    );
    canvas.line(
        MARGIN_LEFT,
        CURVE_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        CURVE_BOTTOM,
        "#333333",
        false,
    );
    for i in 0..=4 {
        let day = max_day * f64::from(i) / 4.0;
        let x = x_scale(day, max_day);
        canvas.line(x, PVALUE_BOTTOM, x, PVALUE_BOTTOM + 4.0, "#333333", false);
        canvas.text(
            x,
            PVALUE_BOTTOM + 18.0,
            "middle",
            &format!("{}", day.round() as u64),
        );
    }
    canvas.text(
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 8.0,
        "middle",
        "days since release",
    );

    canvas.finish()
}
