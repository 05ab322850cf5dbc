//! Mesh-quality and shape observables.

use serde::{Deserialize, Serialize};

use crate::geometry::{enclosed_area, min_max, PlanarCurve};
use crate::point::Point;
use crate::solver::Snapshot;

/// Distribution of grid points along a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityMetrics {
    pub t: f64,
    /// `max g / min g`
    pub ratio: f64,
    /// `max |n g / L - 1|`
    pub dispersion: f64,
    /// Standard deviation of `n g / L`.
    pub stdev: f64,
}

impl MeshQualityMetrics {
    /// From segment lengths (any positive multiple of `g`).
    pub fn from_lengths(t: f64, lengths: &[f64]) -> Self {
        let n = lengths.len() as f64;
        let total: f64 = lengths.iter().sum();
        let (lo, hi) = min_max(lengths);
        let rel = lengths.iter().map(|l| n * l / total);
        let (mut dispersion, mut sq) = (0.0_f64, 0.0);
        for r in rel {
            dispersion = dispersion.max((r - 1.0).abs());
            sq += (r - 1.0) * (r - 1.0);
        }
        MeshQualityMetrics {
            t,
            ratio: hi / lo,
            dispersion,
            stdev: (sq / n).sqrt(),
        }
    }

    pub fn of_curve(t: f64, curve: &PlanarCurve) -> Self {
        Self::from_lengths(t, &curve.segment_lengths())
    }

    pub fn of_snapshot(s: &Snapshot) -> Self {
        Self::from_lengths(s.t, &s.g)
    }
}

pub fn series(snapshots: &[Snapshot]) -> Vec<MeshQualityMetrics> {
    snapshots.iter().map(MeshQualityMetrics::of_snapshot).collect()
}

/// Area centroid of the enclosed region.
pub fn centroid(curve: &PlanarCurve) -> Point {
    let nodes = curve.nodes();
    let n = nodes.len();
    let a = enclosed_area(curve);
    let mut c = Point::ZERO;
    for i in 0..n {
        let (p, q) = (nodes[i], nodes[(i + 1) % n]);
        c += (p + q) * p.cross(q);
    }
    c * (1.0 / (6.0 * a))
}

/// Mean node distance from the area centroid.
pub fn fitted_radius(curve: &PlanarCurve) -> f64 {
    let c = centroid(curve);
    curve.nodes().iter().map(|p| p.distance(c)).sum::<f64>() / curve.len() as f64
}

/// Ratio of principal axes of the enclosed region, from its second area
/// moments; equals `a / b` for an ellipse with semi-axes `a >= b`.
pub fn axis_ratio(curve: &PlanarCurve) -> f64 {
    let nodes = curve.nodes();
    let n = nodes.len();
    let c = centroid(curve);
    let (mut ixx, mut iyy, mut ixy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = nodes[i] - c;
        let q = nodes[(i + 1) % n] - c;
        let cr = p.cross(q);
        ixx += (p.x * p.x + p.x * q.x + q.x * q.x) * cr;
        iyy += (p.y * p.y + p.y * q.y + q.y * q.y) * cr;
        ixy += (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y) * cr;
    }
    // common factors 1/12 and 1/24 folded into a symmetric matrix
    let (sxx, syy, sxy) = (ixx / 12.0, iyy / 12.0, ixy / 24.0);
    let mean = 0.5 * (sxx + syy);
    let dev = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    ((mean + dev) / (mean - dev)).sqrt()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab * t)
}

fn point_polygon_distance(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two closed polygons, evaluated at
/// the vertices and segment midpoints of each polygon.
pub fn hausdorff(a: &PlanarCurve, b: &PlanarCurve) -> f64 {
    fn directed(from: &[Point], to: &[Point]) -> f64 {
        let n = from.len();
        (0..n)
            .flat_map(|i| [from[i], from[i].lerp(from[(i + 1) % n], 0.5)])
            .map(|p| point_polygon_distance(p, to))
            .fold(0.0, f64::max)
    }
    directed(a.nodes(), b.nodes()).max(directed(b.nodes(), a.nodes()))
}
