//! Minimal hand-rolled SVG emission: enough rects, lines, polylines and text
//! for the analysis outputs and the browser demo, no plotting dependency.

use std::fmt::Write as _;

pub struct SvgBuilder {
    width: f64,
    height: f64,
    body: String,
}

impl SvgBuilder {
    pub fn new(width: f64, height: f64) -> Self {
        SvgBuilder {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) -> &mut Self {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="{stroke}"/>"#
        );
        self
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) -> &mut Self {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
        self
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) -> &mut Self {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            pts.join(" ")
        );
        self
    }

    /// Closed filled polygon, used for quantile bands.
    pub fn polygon(&mut self, points: &[(f64, f64)], fill: &str, opacity: f64) -> &mut Self {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>"#,
            pts.join(" ")
        );
        self
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) -> &mut Self {
        let escaped = content
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" font-family="monospace">{escaped}</text>"#
        );
        self
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Grayscale fill for a value in `[lo, hi]`; lighter means lower.
pub fn gray_fill(value: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((value - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    let level = (245.0 - t * 190.0) as u8;
    format!("rgb({level},{level},{level})")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_valid_svg() {
        let mut b = SvgBuilder::new(100.0, 50.0);
        b.rect(0.0, 0.0, 10.0, 10.0, "red", "none")
            .line(0.0, 0.0, 100.0, 50.0, "black", 1.0)
            .text(5.0, 5.0, 8.0, "a<b");
        let svg = b.finish();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
    }

    #[test]
    fn gray_fill_monotone() {
        assert_eq!(gray_fill(0.0, 0.0, 1.0), "rgb(245,245,245)");
        assert_eq!(gray_fill(1.0, 0.0, 1.0), "rgb(55,55,55)");
    }
}
