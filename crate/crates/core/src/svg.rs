//! SVG rendering of curve snapshots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::point::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct SvgStyle {
    /// Image width in pixels; the height follows the viewport aspect.
    pub width: f64,
    pub stroke_width: f64,
    /// Stroke width of the initial curve in overlays.
    pub bold_width: f64,
    /// Draw a dot at every node.
    pub markers: bool,
    pub marker_radius: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 600.0,
            stroke_width: 1.0,
            bold_width: 3.0,
            markers: true,
            marker_radius: 1.5,
        }
    }
}

/// World-space rectangle mapped onto the image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub min: Point,
    pub max: Point,
}

impl Viewport {
    /// Bounding box of all curves, padded by 5% on each side.
    pub fn enclosing<'a>(curves: impl IntoIterator<Item = &'a [Point]>) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in curves.into_iter().flatten() {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        if !(min.x <= max.x) {
            return Viewport {
                min: Point::new(-1.0, -1.0),
                max: Point::new(1.0, 1.0),
            };
        }
        let pad = 0.05 * (max.x - min.x).max(max.y - min.y).max(1e-12);
        Viewport {
            min: Point::new(min.x - pad, min.y - pad),
            max: Point::new(max.x + pad, max.y + pad),
        }
    }

    fn size(&self) -> (f64, f64) {
        (self.max.x - self.min.x, self.max.y - self.min.y)
    }
}

struct Canvas {
    view: Viewport,
    scale: f64,
    height: f64,
    body: String,
    style: SvgStyle,
}

impl Canvas {
    fn new(view: Viewport, style: &SvgStyle) -> Self {
        let (w, h) = view.size();
        let scale = style.width / w;
        Canvas {
            view,
            scale,
            height: h * scale,
            body: String::new(),
            style: style.clone(),
        }
    }

    // SVG's y axis points down
    fn map(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.view.min.x) * self.scale,
            (self.view.max.y - p.y) * self.scale,
        )
    }

    fn curve(&mut self, nodes: &[Point], stroke_width: f64, color: &str) {
        let mut d = String::new();
        for (i, p) in nodes.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="{stroke_width}"/>"#
        );
        if self.style.markers {
            let _ = writeln!(self.body, r#"<g fill="{color}">"#);
            for p in nodes {
                let (x, y) = self.map(*p);
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{x:.3}" cy="{y:.3}" r="{}"/>"#,
                    self.style.marker_radius
                );
            }
            self.body.push_str("</g>\n");
        }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.style.width,
            h = self.height,
            body = self.body
        )
    }
}

/// One closed curve.
pub fn render_frame(nodes: &[Point], view: Viewport, style: &SvgStyle) -> String {
    let mut c = Canvas::new(view, style);
    c.curve(nodes, style.stroke_width, "black");
    c.finish()
}

/// All curves in one image; the first one is drawn bold.
pub fn render_overlay(curves: &[&[Point]], view: Viewport, style: &SvgStyle) -> String {
    let mut c = Canvas::new(view, style);
    for (i, nodes) in curves.iter().enumerate() {
        let width = if i == 0 { style.bold_width } else { style.stroke_width };
        c.curve(nodes, width, "black");
    }
    c.finish()
}

/// Writes `frame_<k>.svg` for each curve into `dir` with a viewport shared
/// by all frames.
pub fn write_frames(dir: &Path, curves: &[&[Point]], style: &SvgStyle) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let view = Viewport::enclosing(curves.iter().copied());
    let mut paths = Vec::with_capacity(curves.len());
    for (k, nodes) in curves.iter().enumerate() {
        let path = dir.join(format!("frame_{k:05}.svg"));
        std::fs::write(&path, render_frame(nodes, view, style))?;
        paths.push(path);
    }
    Ok(paths)
}
