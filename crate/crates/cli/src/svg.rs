//! Self-contained SVG charts for box plots and Tukey intervals.

use std::fmt::Write as _;

use qsarnet::bench::{ComparisonReport, MetricComparison};

const WIDTH: f64 = 760.0;
const MARGIN_LEFT: f64 = 150.0;
const MARGIN_RIGHT: f64 = 30.0;
const PANEL_TOP: f64 = 50.0;
const PANEL_GAP: f64 = 70.0;
const SIGNIFICANT: &str = "#c0392b";
const PLAIN: &str = "#2c3e50";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn n(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Maps data values onto a pixel interval, padding the data range by 5%.
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
            .collect()
    }

    fn label(&self, v: f64) -> String {
        let span = self.hi - self.lo;
        let digits = (2.0 - span.log10().floor()).clamp(0.0, 6.0) as usize;
        let s = format!("{v:.digits$}");
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }
}

fn header(out: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = n(WIDTH),
        h = n(height)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        n(WIDTH),
        n(height)
    );
}

fn box_panel(out: &mut String, mc: &MetricComparison, top: f64, height: f64) {
    let bottom = top + height;
    let left = MARGIN_LEFT - 80.0;
    let right = WIDTH - MARGIN_RIGHT;
    let stats: Vec<_> = mc.boxes.iter().filter_map(|b| b.stats.as_ref()).collect();
    let lo = stats.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
    let hi = stats.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if stats.is_empty() { (0.0, 1.0) } else { (lo, hi) };
    let y = Scale::new(lo, hi, bottom, top);
    let metric = mc.metric.label();

    let _ = writeln!(out, r#"<g class="panel" data-metric="{metric}">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/><line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = n(left),
        t = n(top),
        b = n(bottom),
        r = n(right)
    );
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x1}" y1="{py}" x2="{l}" y2="{py}" stroke="black"/><text x="{tx}" y="{ty}" text-anchor="end">{label}</text>"#,
            x1 = n(left - 5.0),
            l = n(left),
            py = n(py),
            tx = n(left - 8.0),
            ty = n(py + 4.0),
            label = y.label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="{x}" y="{y}" text-anchor="middle" transform="rotate(-90 {x} {y})">{metric}</text>"#,
        x = n(left - 50.0),
        y = n(0.5 * (top + bottom))
    );

    let slot = (right - left) / mc.boxes.len().max(1) as f64;
    for (i, b) in mc.boxes.iter().enumerate() {
        let cx = left + slot * (i as f64 + 0.5);
        let half = 0.2 * slot;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            n(cx),
            n(bottom + 18.0),
            escape(&b.model)
        );
        let Some(s) = &b.stats else {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle">n/a</text>"#,
                n(cx),
                n(0.5 * (top + bottom))
            );
            continue;
        };
        let _ = writeln!(out, r#"<g class="box" data-model="{}">"#, escape(&b.model));
        for (from, to) in [(s.whisker_low, s.q1), (s.q3, s.whisker_high)] {
            let _ = writeln!(
                out,
                r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
                n(y.map(from)),
                n(y.map(to)),
                cx = n(cx)
            );
        }
        for w in [s.whisker_low, s.whisker_high] {
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{py}" x2="{}" y2="{py}" stroke="black"/>"#,
                n(cx - 0.5 * half),
                n(cx + 0.5 * half),
                py = n(y.map(w))
            );
        }
        let (y_top, y_bottom) = (y.map(s.q3), y.map(s.q1));
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#dfe6ee" stroke="black"/>"##,
            n(cx - half),
            n(y_top),
            n(2.0 * half),
            n(y_bottom - y_top)
        );
        let _ = writeln!(
            out,
            r#"<line class="median" x1="{}" y1="{py}" x2="{}" y2="{py}" stroke="black" stroke-width="2"/>"#,
            n(cx - half),
            n(cx + half),
            py = n(y.map(s.median))
        );
        for &o in &s.outliers {
            let _ = writeln!(
                out,
                r#"<circle class="outlier" cx="{}" cy="{}" r="3" fill="none" stroke="black"/>"#,
                n(cx),
                n(y.map(o))
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");
}

/// One panel per metric, one box per model.
pub fn box_plot_svg(report: &ComparisonReport) -> String {
    let panel = 300.0;
    let height = PANEL_TOP + report.metrics.len() as f64 * (panel + PANEL_GAP);
    let mut out = String::new();
    header(&mut out, height, "Test-set performance over resampled runs");
    for (i, mc) in report.metrics.iter().enumerate() {
        let top = PANEL_TOP + i as f64 * (panel + PANEL_GAP);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">Test {} by model</text>"#,
            n(WIDTH / 2.0),
            n(top - 15.0),
            mc.metric.label()
        );
        box_panel(&mut out, mc, top, panel);
    }
    out.push_str("</svg>\n");
    out
}

fn tukey_panel(out: &mut String, mc: &MetricComparison, top: f64, row_h: f64) {
    let rows = mc.tukey.len().max(1) as f64;
    let bottom = top + rows * row_h;
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let lo = mc.tukey.iter().map(|t| t.lower).fold(0.0, f64::min);
    let hi = mc.tukey.iter().map(|t| t.upper).fold(0.0, f64::max);
    let x = Scale::new(lo, hi, left, right);
    let metric = mc.metric.label();

    let _ = writeln!(out, r#"<g class="panel" data-metric="{metric}">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = n(left),
        b = n(bottom),
        r = n(right)
    );
    for t in x.ticks() {
        let px = x.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px}" y1="{b}" x2="{px}" y2="{b5}" stroke="black"/><text x="{px}" y="{ty}" text-anchor="middle">{label}</text>"#,
            px = n(px),
            b = n(bottom),
            b5 = n(bottom + 5.0),
            ty = n(bottom + 18.0),
            label = x.label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">Difference in mean {metric}</text>"#,
        n(0.5 * (left + right)),
        n(bottom + 38.0)
    );
    let _ = writeln!(
        out,
        r#"<line class="zero" x1="{z}" y1="{t}" x2="{z}" y2="{b}" stroke="gray" stroke-dasharray="4 3"/>"#,
        z = n(x.map(0.0)),
        t = n(top),
        b = n(bottom)
    );
    for (i, iv) in mc.tukey.iter().enumerate() {
        let py = top + row_h * (i as f64 + 0.5);
        let (class, color) = if iv.significant {
            ("interval significant", SIGNIFICANT)
        } else {
            ("interval", PLAIN)
        };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{} - {}</text>"#,
            n(left - 8.0),
            n(py + 4.0),
            escape(&iv.model_a),
            escape(&iv.model_b)
        );
        let _ = writeln!(
            out,
            r#"<g class="{class}" stroke="{color}"><line x1="{x1}" y1="{py}" x2="{x2}" y2="{py}" stroke-width="2"/><line x1="{x1}" y1="{c1}" x2="{x1}" y2="{c2}"/><line x1="{x2}" y1="{c1}" x2="{x2}" y2="{c2}"/><circle cx="{xe}" cy="{py}" r="4" fill="{color}"/></g>"#,
            x1 = n(x.map(iv.lower)),
            x2 = n(x.map(iv.upper)),
            xe = n(x.map(iv.estimate)),
            py = n(py),
            c1 = n(py - 5.0),
            c2 = n(py + 5.0)
        );
    }
    out.push_str("</g>\n");
}

/// Horizontal interval per model pair with a zero reference line; pairs
/// whose interval excludes zero are drawn in a distinct colour.
pub fn tukey_svg(report: &ComparisonReport) -> String {
    let row_h = 26.0;
    let panel_heights: Vec<f64> = report
        .metrics
        .iter()
        .map(|mc| mc.tukey.len().max(1) as f64 * row_h)
        .collect();
    let height = PANEL_TOP + panel_heights.iter().map(|h| h + PANEL_GAP).sum::<f64>();
    let mut out = String::new();
    header(
        &mut out,
        height,
        &format!(
            "{:.0}% family-wise Tukey intervals after alignment",
            report.confidence * 100.0
        ),
    );
    let mut top = PANEL_TOP;
    for (mc, h) in report.metrics.iter().zip(&panel_heights) {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}: {:.0}% family-wise confidence level</text>"#,
            n(WIDTH / 2.0),
            n(top - 15.0),
            mc.metric.label(),
            report.confidence * 100.0
        );
        tukey_panel(&mut out, mc, top, row_h);
        top += h + PANEL_GAP;
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsarnet::bench::{compare_all, BenchmarkResult};

    fn report() -> ComparisonReport {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|r| {
                let b = (r as f64 * 0.37).sin();
                vec![
                    1.0 + b,
                    1.1 + b + 0.01 * r as f64,
                    2.0 + b,
                    1.0 + b + 0.05 * ((r * 7 % 5) as f64 - 2.0),
                ]
            })
            .collect();
        let names = ["A", "B", "C<&>", "D"].iter().map(|s| s.to_string()).collect();
        compare_all(
            &BenchmarkResult::from_matrices(names, rows.clone(), rows).unwrap(),
            0.05,
            0.95,
        )
        .unwrap()
    }

    #[test]
    fn box_plot_has_one_box_per_model_and_panel() {
        let svg = box_plot_svg(&report());
        assert_eq!(svg.matches(r#"class="box""#).count(), 8);
        assert!(svg.contains(">RMSE</text>"));
        assert!(svg.contains("C&lt;&amp;&gt;"));
        assert!(!svg.contains("href"));
        assert!(svg.starts_with("<svg xmlns"));
    }

    #[test]
    fn tukey_chart_marks_significance() {
        let r = report();
        let svg = tukey_svg(&r);
        let total: usize = r.metrics.iter().map(|m| m.tukey.len()).sum();
        let significant: usize = r
            .metrics
            .iter()
            .flat_map(|m| &m.tukey)
            .filter(|t| t.significant)
            .count();
        assert!(significant > 0 && significant < total);
        assert_eq!(svg.matches(r#"class="interval significant""#).count(), significant);
        assert_eq!(svg.matches(r#"class="interval""#).count(), total - significant);
        assert_eq!(svg.matches(r#"class="zero""#).count(), 2);
    }

    #[test]
    fn scale_handles_constant_range() {
        let s = Scale::new(2.0, 2.0, 0.0, 100.0);
        assert!(s.map(2.0) > 0.0 && s.map(2.0) < 100.0);
    }
}
