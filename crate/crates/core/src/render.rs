//! SVG frames and plot data from episode traces.
//!
//! World coordinates map to the viewport by
//!
//! ```text
//! px = margin + scale * x
//! py = margin + scale * (height - y)
//! ```
//!
//! so the world's y axis points up in the picture.

use std::path::{Path as FsPath, PathBuf};

use svg::node::element::{Circle, Group, Line, Polygon, Polyline, Rectangle};
use svg::Document;

use crate::environment::TraceRecord;
use crate::error::{Error, Result};
use crate::geometry::{polyline_length, Point};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
    /// Pixels per meter.
    pub scale: f64,
    pub margin: f64,
}

impl Viewport {
    pub fn new(width: f64, height: f64) -> Self {
        Viewport {
            width,
            height,
            scale: 2.0,
            margin: 10.0,
        }
    }

    pub fn to_view(&self, p: Point) -> Point {
        Point::new(
            self.margin + self.scale * p.x,
            self.margin + self.scale * (self.height - p.y),
        )
    }

    pub fn to_world(&self, v: Point) -> Point {
        Point::new(
            (v.x - self.margin) / self.scale,
            self.height - (v.y - self.margin) / self.scale,
        )
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (
            2.0 * self.margin + self.scale * self.width,
            2.0 * self.margin + self.scale * self.height,
        )
    }

    fn points_attr(&self, pts: &[Point]) -> String {
        pts.iter()
            .map(|p| {
                let v = self.to_view(*p);
                format!("{},{}", v.x, v.y)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One frame for one trace record.
pub fn frame(rec: &TraceRecord, view: &Viewport) -> Document {
    let (w, h) = view.pixel_size();
    let mut obstacles = Group::new().set("id", "obstacles");
    for o in &rec.obstacles {
        let fill = if o.velocity == Point::default() { "#555" } else { "#c44" };
        obstacles = obstacles.add(
            Polygon::new()
                .set("points", view.points_attr(&o.vertices))
                .set("fill", fill),
        );
    }
    let mut kinematic = Group::new().set("id", "kinematic").set("stroke", "#e90").set("stroke-width", 1.5);
    for s in &rec.kinematic {
        let (a, b) = (view.to_view(s.a), view.to_view(s.b));
        kinematic = kinematic.add(
            Line::new()
                .set("x1", a.x)
                .set("y1", a.y)
                .set("x2", b.x)
                .set("y2", b.y),
        );
    }
    let path = Polyline::new()
        .set("id", "path")
        .set("points", view.points_attr(&rec.path))
        .set("fill", "none")
        .set("stroke", "#26c")
        .set("stroke-width", 1.5);
    let usv = view.to_view(rec.usv);
    let target = view.to_view(rec.target);
    Document::new()
        .set("width", w)
        .set("height", h)
        .set("viewBox", (0, 0, w, h))
        .add(Rectangle::new().set("width", w).set("height", h).set("fill", "#f4f8fb"))
        .add(obstacles)
        .add(kinematic)
        .add(path)
        .add(
            Circle::new()
                .set("id", "target")
                .set("cx", target.x)
                .set("cy", target.y)
                .set("r", 5)
                .set("fill", "#2a2"),
        )
        .add(
            Circle::new()
                .set("id", "usv")
                .set("cx", usv.x)
                .set("cy", usv.y)
                .set("r", 4)
                .set("fill", "#000"),
        )
}

/// Per-tick plot data.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub tick: u32,
    pub path_length: f64,
    pub fitness: Option<f64>,
}

pub const SUMMARY_SCHEMA: &str = "# schema: okayplan-render-summary/1";

pub fn summary_rows(trace: &[TraceRecord]) -> Vec<SummaryRow> {
    trace
        .iter()
        .map(|r| SummaryRow {
            tick: r.tick,
            path_length: polyline_length(&r.path),
            fitness: r.fitness,
        })
        .collect()
}

/// Writes `frame_NNNN.svg` per record and `summary.csv` into `out_dir`.
/// Returns the frame paths in tick order.
pub fn render_trace(trace: &[TraceRecord], view: &Viewport, out_dir: &FsPath) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut frames = Vec::with_capacity(trace.len());
    for rec in trace {
        let path = out_dir.join(format!("frame_{:04}.svg", rec.tick));
        svg::save(&path, &frame(rec, view)).map_err(|e| Error::io(&path, e))?;
        frames.push(path);
    }
    let csv_path = out_dir.join("summary.csv");
    let mut buf = format!("{SUMMARY_SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in summary_rows(trace) {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
    }
    std::fs::write(&csv_path, buf).map_err(|e| Error::io(&csv_path, e))?;
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_round_trip() {
        let v = Viewport::new(366.0, 366.0);
        let p = Point::new(12.5, 300.25);
        let back = v.to_world(v.to_view(p));
        assert!((back.x - p.x).abs() < 1e-12 && (back.y - p.y).abs() < 1e-12);
        assert_eq!(v.to_view(Point::new(0.0, 366.0)), Point::new(10.0, 10.0));
    }
}
