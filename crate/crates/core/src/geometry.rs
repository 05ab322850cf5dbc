//! Closed polygonal curves and their discrete intrinsic quantities.
//!
//! A curve with `n` nodes is parameterized on `u_i = i/n`, so the discrete local
//! length of segment `i` (from node `i` to node `i + 1`) is `g_i = n |x_{i+1} - x_i|`
//! and `L = sum(g_i) / n` is the Euclidean perimeter.
//!
//! Tangent angles live on two staggered grids: segment (chord) angles `phi_i`
//! and node angles `nu_i = phi_i - turn_i / 2`, where `turn_i` is the signed
//! exterior angle at node `i`. Curvature is the angle increment over the dual
//! cell, `k_i = turn_i / w_i` with `w_i = (|e_{i-1}| + |e_i|) / 2`, which makes
//! the discrete Gauss-Bonnet sum `sum(k_i w_i)` exactly `2 pi m`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::point::Point;

pub const MIN_NODES: usize = 4;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

/// Closed curve given by its nodes; node `n` is identified with node `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarCurve {
    nodes: Vec<Point>,
}

impl PlanarCurve {
    pub fn new(nodes: Vec<Point>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::TooFewNodes {
                got: nodes.len(),
                min: MIN_NODES,
            });
        }
        if let Some(index) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let n = nodes.len();
        for i in 0..n {
            if nodes[i] == nodes[(i + 1) % n] {
                return Err(Error::DegenerateSegment { index: i });
            }
        }
        Ok(PlanarCurve { nodes })
    }

    pub fn from_xy<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        Self::new(points.into_iter().map(Point::from).collect())
    }

    #[inline]
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> Point {
        self.nodes[i % self.nodes.len()]
    }

    pub fn into_nodes(self) -> Vec<Point> {
        self.nodes
    }

    /// Same nodes traversed in the opposite direction, starting from node 0.
    pub fn reversed(&self) -> PlanarCurve {
        let mut nodes = Vec::with_capacity(self.len());
        nodes.push(self.nodes[0]);
        nodes.extend(self.nodes[1..].iter().rev());
        PlanarCurve { nodes }
    }

    /// Euclidean segment lengths `|x_{i+1} - x_i|`.
    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| self.nodes[(i + 1) % n].distance(self.nodes[i]))
            .collect()
    }
}

/// Intrinsic quantities of a [`PlanarCurve`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGeometry {
    /// Local length per segment, `n |x_{i+1} - x_i|`.
    pub g: Vec<f64>,
    /// Unwrapped node tangent angles.
    pub nu: Vec<f64>,
    /// Node curvatures.
    pub k: Vec<f64>,
    /// Total length.
    pub length: f64,
    /// Signed enclosed area (positive for counterclockwise curves).
    pub area: f64,
    /// Turning number.
    pub winding: i32,
    /// Euclidean segment lengths.
    pub seg: Vec<f64>,
    /// Dual-cell arc-length weights per node.
    pub weights: Vec<f64>,
    /// Unwrapped chord angles per segment.
    pub chord_angles: Vec<f64>,
    /// Signed exterior angle per node, in `(-pi, pi]`.
    pub turning: Vec<f64>,
}

impl DiscreteGeometry {
    pub fn from_curve(curve: &PlanarCurve) -> Result<Self> {
        let n = curve.len();
        let nodes = curve.nodes();
        let mut seg = Vec::with_capacity(n);
        let mut raw_angles = Vec::with_capacity(n);
        for i in 0..n {
            let e = nodes[(i + 1) % n] - nodes[i];
            let len = e.hypot();
            if !(len > 0.0) {
                return Err(Error::DegenerateSegment { index: i });
            }
            seg.push(len);
            raw_angles.push(e.atan2());
        }

        let turning: Vec<f64> = (0..n)
            .map(|i| wrap_angle(raw_angles[i] - raw_angles[(i + n - 1) % n]))
            .collect();
        let total_turn: f64 = turning.iter().sum();
        let winding = (total_turn / TAU).round() as i32;

        // forward sweep from segment 0
        let mut chord_angles = Vec::with_capacity(n);
        chord_angles.push(raw_angles[0]);
        for i in 1..n {
            let prev = chord_angles[i - 1];
            chord_angles.push(prev + turning[i]);
        }

        let nu = (0..n).map(|i| chord_angles[i] - 0.5 * turning[i]).collect();
        let weights: Vec<f64> = (0..n)
            .map(|i| 0.5 * (seg[(i + n - 1) % n] + seg[i]))
            .collect();
        let k = turning
            .iter()
            .zip(&weights)
            .map(|(t, w)| t / w)
            .collect();
        let length: f64 = seg.iter().sum();
        let g = seg.iter().map(|l| l * n as f64).collect();

        Ok(DiscreteGeometry {
            g,
            nu,
            k,
            length,
            area: enclosed_area(curve),
            winding,
            seg,
            weights,
            chord_angles,
            turning,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.g.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Largest over smallest segment length.
    pub fn mesh_ratio(&self) -> f64 {
        let (lo, hi) = min_max(&self.seg);
        hi / lo
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.k.iter().fold(0.0_f64, |m, k| m.max(k.abs()))
    }

    /// Sum of signed exterior angles.
    pub fn total_turn(&self) -> f64 {
        self.turning.iter().sum()
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

pub fn compute_local_lengths(curve: &PlanarCurve) -> Result<Vec<f64>> {
    let n = curve.len() as f64;
    curve
        .segment_lengths()
        .into_iter()
        .enumerate()
        .map(|(index, l)| {
            if l > 0.0 {
                Ok(l * n)
            } else {
                Err(Error::DegenerateSegment { index })
            }
        })
        .collect()
}

pub fn compute_tangent_angles(curve: &PlanarCurve) -> Result<Vec<f64>> {
    Ok(DiscreteGeometry::from_curve(curve)?.nu)
}

pub fn compute_curvature(curve: &PlanarCurve) -> Result<Vec<f64>> {
    Ok(DiscreteGeometry::from_curve(curve)?.k)
}

pub fn total_length(geom: &DiscreteGeometry) -> f64 {
    geom.g.iter().sum::<f64>() / geom.len() as f64
}

/// Signed shoelace area; positive for counterclockwise orientation.
pub fn enclosed_area(curve: &PlanarCurve) -> f64 {
    let nodes = curve.nodes();
    let n = nodes.len();
    0.5 * (0..n)
        .map(|i| nodes[i].cross(nodes[(i + 1) % n]))
        .sum::<f64>()
}

/// Arc-length average `(1/L) sum(v_i w_i)` of a node field.
pub fn curve_average(values: &[f64], geom: &DiscreteGeometry) -> Result<f64> {
    if values.len() != geom.len() {
        return Err(Error::InconsistentLengths {
            expected: geom.len(),
            got: values.len(),
        });
    }
    let total: f64 = geom.weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::LengthZero);
    }
    let acc: f64 = values.iter().zip(&geom.weights).map(|(v, w)| v * w).sum();
    Ok(acc / total)
}

/// Point at arc length `s` along the closed polyline.
fn point_at(nodes: &[Point], cumulative: &[f64], s: f64) -> Point {
    let n = nodes.len();
    let total = cumulative[n];
    let s = s.rem_euclid(total);
    let j = match cumulative.binary_search_by(|c| c.total_cmp(&s)) {
        Ok(j) => j.min(n - 1),
        Err(j) => j - 1,
    };
    let seg = cumulative[j + 1] - cumulative[j];
    let t = (s - cumulative[j]) / seg;
    nodes[j].lerp(nodes[(j + 1) % n], t)
}

/// Places `n_out` nodes on the input polyline with equal chord lengths,
/// starting at node 0.
pub fn resample_uniform(curve: &PlanarCurve, n_out: usize) -> Result<PlanarCurve> {
    if n_out < MIN_NODES {
        return Err(Error::TooFewNodes {
            got: n_out,
            min: MIN_NODES,
        });
    }
    let nodes = curve.nodes();
    let n = nodes.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for (i, l) in curve.segment_lengths().into_iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::DegenerateSegment { index: i });
        }
        cumulative.push(cumulative[i] + l);
    }
    let total = cumulative[n];

    // Equal arc-length stations, then a few sweeps that shift stations until
    // the chords (not the arcs) are equal.
    let mut stations: Vec<f64> = (0..n_out)
        .map(|j| total * j as f64 / n_out as f64)
        .collect();
    let mut out: Vec<Point> = stations
        .iter()
        .map(|&s| point_at(nodes, &cumulative, s))
        .collect();
    for _ in 0..50 {
        let chords: Vec<f64> = (0..n_out)
            .map(|j| out[(j + 1) % n_out].distance(out[j]))
            .collect();
        let mean = chords.iter().sum::<f64>() / n_out as f64;
        let spread = chords
            .iter()
            .fold(0.0_f64, |m, c| m.max((c / mean - 1.0).abs()));
        if spread < 1e-13 {
            break;
        }
        let mut shift = 0.0;
        for j in 1..n_out {
            shift += mean - chords[j - 1];
            stations[j] += shift;
        }
        for j in 1..n_out {
            out[j] = point_at(nodes, &cumulative, stations[j]);
        }
    }
    PlanarCurve::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn regular_polygon(n: usize, r: f64) -> PlanarCurve {
        PlanarCurve::new((0..n).map(|i| Point::from_angle(TAU * i as f64 / n as f64) * r).collect()).unwrap()
    }

    fn ellipse(n: usize, a: f64, b: f64) -> PlanarCurve {
        PlanarCurve::new(
            (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    Point::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            PlanarCurve::from_xy([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]),
            Err(Error::TooFewNodes { got: 3, min: 4 })
        ));
        assert!(matches!(
            PlanarCurve::from_xy([(0.0, 0.0), (1.0, 0.0), (1.0, f64::NAN), (0.0, 1.0)]),
            Err(Error::NonFinite { index: 2 })
        ));
        assert!(matches!(
            PlanarCurve::from_xy([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)]),
            Err(Error::DegenerateSegment { index: 3 })
        ));
    }

    #[test]
    fn unit_square() {
        let sq = PlanarCurve::from_xy([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let geom = DiscreteGeometry::from_curve(&sq).unwrap();
        assert_eq!(geom.g, vec![4.0; 4]);
        assert_eq!(geom.length, 4.0);
        assert_eq!(geom.area, 1.0);
        assert_eq!(geom.winding, 1);
        // each corner turns by pi/2 over a dual cell of length 1
        for k in &geom.k {
            assert!((k - PI / 2.0).abs() < 1e-15);
        }
        assert!((geom.nu[0] - (-PI / 4.0)).abs() < 1e-15);
        assert!((geom.nu[1] - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn regular_polygon_curvature() {
        let n = 64;
        let r = 2.0;
        let geom = DiscreteGeometry::from_curve(&regular_polygon(n, r)).unwrap();
        // exterior angle 2 pi / n over a side 2 r sin(pi / n)
        let exact = (TAU / n as f64) / (2.0 * r * (PI / n as f64).sin());
        for k in &geom.k {
            assert!((k - exact).abs() < 1e-12);
        }
        assert!((geom.total_turn() - TAU).abs() < 1e-12);
        // nu increases by 2 pi / n per node, unwrapped
        for i in 1..n {
            assert!((geom.nu[i] - geom.nu[i - 1] - TAU / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_curvature_within_one_percent() {
        let (a, b) = (2.0, 1.0);
        let n = 400;
        let geom = DiscreteGeometry::from_curve(&ellipse(n, a, b)).unwrap();
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let exact = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
            assert!((geom.k[i] / exact - 1.0).abs() < 1e-2, "node {i}");
        }
    }

    #[test]
    fn curvature_converges_at_second_order() {
        // uniformly sampled ellipse parameter gives a graded mesh
        let err = |n: usize| {
            let geom = DiscreteGeometry::from_curve(&ellipse(n, 2.0, 1.0)).unwrap();
            (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let exact = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
                    (geom.k[i] - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(100) / err(200);
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn orientation_and_winding() {
        let ccw = regular_polygon(12, 1.0);
        let cw = ccw.reversed();
        let g = DiscreteGeometry::from_curve(&cw).unwrap();
        assert_eq!(g.winding, -1);
        assert!((g.total_turn() + TAU).abs() < 1e-12);
        assert!(g.area < 0.0);
        // lemniscate of Gerono traced once: turning number zero
        let eight = PlanarCurve::new(
            (0..200)
                .map(|i| {
                    let t = TAU * i as f64 / 200.0;
                    Point::new(t.sin(), t.sin() * t.cos())
                })
                .collect(),
        )
        .unwrap();
        let g = DiscreteGeometry::from_curve(&eight).unwrap();
        assert_eq!(g.winding, 0);
        assert!(g.total_turn().abs() < 1e-10);
        // doubly traced circle
        let twice = PlanarCurve::new(
            (0..100).map(|i| Point::from_angle(2.0 * TAU * i as f64 / 100.0)).collect(),
        )
        .unwrap();
        assert_eq!(DiscreteGeometry::from_curve(&twice).unwrap().winding, 2);
    }

    #[test]
    fn shoelace_matches_triangle_fan() {
        let c = ellipse(50, 1.3, 0.4);
        let nodes = c.nodes();
        let fan: f64 = (1..49)
            .map(|i| 0.5 * (nodes[i] - nodes[0]).cross(nodes[i + 1] - nodes[0]))
            .sum();
        assert!((enclosed_area(&c) - fan).abs() < 1e-14);
        // inscribed polygon of the ellipse: (n/2) a b sin(2 pi / n)
        assert!((enclosed_area(&c) - 25.0 * 1.3 * 0.4 * (TAU / 50.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn averages() {
        let geom = DiscreteGeometry::from_curve(&ellipse(40, 2.0, 0.5)).unwrap();
        assert!((curve_average(&[3.0; 40], &geom).unwrap() - 3.0).abs() < 1e-14);
        // sum k w = 2 pi, so <k> = 2 pi / L
        assert!((curve_average(&geom.k, &geom).unwrap() - TAU / geom.length).abs() < 1e-13);
        assert!(matches!(
            curve_average(&[1.0; 39], &geom),
            Err(Error::InconsistentLengths { expected: 40, got: 39 })
        ));
        assert!((total_length(&geom) - geom.length).abs() < 1e-13);
    }

    #[test]
    fn helper_functions_agree_with_geometry() {
        let c = ellipse(30, 1.0, 0.7);
        let geom = DiscreteGeometry::from_curve(&c).unwrap();
        assert_eq!(compute_local_lengths(&c).unwrap(), geom.g);
        assert_eq!(compute_tangent_angles(&c).unwrap(), geom.nu);
        assert_eq!(compute_curvature(&c).unwrap(), geom.k);
    }

    #[test]
    fn resample_uniform_equalizes_chords() {
        let c = ellipse(37, 3.0, 1.0);
        let u = resample_uniform(&c, 64).unwrap();
        assert_eq!(u.len(), 64);
        let geom = DiscreteGeometry::from_curve(&u).unwrap();
        assert!(geom.mesh_ratio() < 1.0 + 1e-9);
        // nodes stay on the input polygon
        assert_eq!(u.node(0), c.node(0));
        assert!(resample_uniform(&c, 3).is_err());
    }

    fn star(n: usize, amp: f64, petals: f64, phase: f64) -> PlanarCurve {
        PlanarCurve::new(
            (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64 + phase;
                    Point::from_angle(t) * (1.0 + amp * (petals * t).cos())
                })
                .collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn gauss_bonnet(n in 16usize..200, amp in 0.0..0.5, petals in 2u32..7, phase in 0.0..TAU) {
            let geom = DiscreteGeometry::from_curve(&star(n, amp, petals as f64, phase)).unwrap();
            let total: f64 = geom.k.iter().zip(&geom.weights).map(|(k, w)| k * w).sum();
            prop_assert_eq!(geom.winding, 1);
            prop_assert!((total - TAU).abs() < 1e-10);
            prop_assert!(geom.turning.iter().all(|t| t.abs() <= PI));
        }

        #[test]
        fn invariant_under_rigid_motion(rot in 0.0..TAU, dx in -5.0..5.0, dy in -5.0..5.0) {
            let c = star(48, 0.3, 3.0, 0.1);
            let (s, co) = rot.sin_cos();
            let moved = PlanarCurve::new(
                c.nodes().iter().map(|p| Point::new(co * p.x - s * p.y + dx, s * p.x + co * p.y + dy)).collect(),
            ).unwrap();
            let a = DiscreteGeometry::from_curve(&c).unwrap();
            let b = DiscreteGeometry::from_curve(&moved).unwrap();
            prop_assert!((a.area - b.area).abs() < 1e-11);
            for i in 0..48 {
                prop_assert!((a.k[i] - b.k[i]).abs() < 1e-9);
                prop_assert!((a.g[i] - b.g[i]).abs() < 1e-9);
                prop_assert!((wrap_angle(b.nu[i] - a.nu[i] - rot)).abs() < 1e-9);
            }
        }
    }
}
