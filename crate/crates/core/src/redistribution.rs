//! Tangential velocity laws controlling how grid points are distributed
//! along the evolving curve.
//!
//! With `theta = ln(g / L)` the tangential velocity enters only through
//! `d_t theta + k beta - <k beta> = d_s alpha`. The relative-local-length law
//! picks `d_s alpha = k beta - <k beta>` so that `theta` is frozen; the
//! asymptotically uniform law adds `(L/g - 1) omega` so that `theta` relaxes
//! to zero at rate `omega = kappa1 + kappa2 <k beta>`.
//!
//! The source `d_s alpha` is sampled at segment midpoints, where `g` and
//! `theta` live. The node field `k beta` is averaged onto each segment, which
//! makes the discrete compatibility `sum(source_i * |e_i|) = 0` exact up to
//! round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curve_average, DiscreteGeometry};

/// Tolerance on the closure defect of the integrated source, relative to
/// `L * max|source|`.
pub const COMPATIBILITY_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "StrategyRepr", into = "StrategyRepr")]
pub enum RedistributionStrategy {
    Zero,
    RelativeLocalLength,
    AsymptoticallyUniform { kappa1: f64, kappa2: f64 },
}

// struct variants only, so that unknown keys are rejected
#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum StrategyRepr {
    #[serde(rename = "zero")]
    Zero {},
    #[serde(rename = "rll")]
    RelativeLocalLength {},
    #[serde(rename = "asymptotic")]
    AsymptoticallyUniform { kappa1: f64, kappa2: f64 },
}

impl From<StrategyRepr> for RedistributionStrategy {
    fn from(r: StrategyRepr) -> Self {
        match r {
            StrategyRepr::Zero {} => RedistributionStrategy::Zero,
            StrategyRepr::RelativeLocalLength {} => RedistributionStrategy::RelativeLocalLength,
            StrategyRepr::AsymptoticallyUniform { kappa1, kappa2 } => {
                RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2 }
            }
        }
    }
}

impl From<RedistributionStrategy> for StrategyRepr {
    fn from(s: RedistributionStrategy) -> Self {
        match s {
            RedistributionStrategy::Zero => StrategyRepr::Zero {},
            RedistributionStrategy::RelativeLocalLength => StrategyRepr::RelativeLocalLength {},
            RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2 } => {
                StrategyRepr::AsymptoticallyUniform { kappa1, kappa2 }
            }
        }
    }
}

impl RedistributionStrategy {
    /// Asymptotically uniform law with `kappa1 = 10 / t_end`, `kappa2 = 10`.
    pub fn asymptotic_for(t_end: f64) -> Self {
        let kappa1 = if t_end > 0.0 { 10.0 / t_end } else { 10.0 };
        RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2: 10.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2 } = *self {
            if !(kappa1 >= 0.0 && kappa1.is_finite()) {
                return Err(Error::validation("strategy.kappa1", "must be finite and >= 0"));
            }
            if !(kappa2 >= 0.0 && kappa2.is_finite()) {
                return Err(Error::validation("strategy.kappa2", "must be finite and >= 0"));
            }
            if !(kappa1 + kappa2 > 0.0) {
                return Err(Error::validation(
                    "strategy",
                    "kappa1 + kappa2 must be positive",
                ));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            RedistributionStrategy::Zero => "zero",
            RedistributionStrategy::RelativeLocalLength => "rll",
            RedistributionStrategy::AsymptoticallyUniform { .. } => "au",
        }
    }
}

/// `theta_i = ln(g_i / L)` per segment.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaField(pub Vec<f64>);

impl ThetaField {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `sum(exp(theta_i)) / n`; exactly one for a consistent field.
    pub fn normalization(&self) -> f64 {
        self.0.iter().map(|t| t.exp()).sum::<f64>() / self.0.len() as f64
    }
}

pub fn compute_theta(geom: &DiscreteGeometry) -> Result<ThetaField> {
    let length = geom.length;
    if !(length > 0.0) {
        return Err(Error::LengthZero);
    }
    Ok(ThetaField(geom.g.iter().map(|g| (g / length).ln()).collect()))
}

/// Control function `kappa1 + kappa2 <k beta>`.
pub fn omega(strategy: &RedistributionStrategy, kbeta_avg: f64) -> Result<f64> {
    match *strategy {
        RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2 } => Ok(kappa1 + kappa2 * kbeta_avg),
        _ => Err(Error::WrongStrategy),
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::InconsistentLengths { expected, got })
    }
}

/// Transfers a node field to segments by splitting each dual cell between
/// its two segments: `(f_i w_i + f_{i+1} w_{i+1}) / (2 l_i)`. Preserves the
/// curve integral, and matches the rate at which normal motion of the
/// polygon stretches each segment.
pub fn to_segments(geom: &DiscreteGeometry, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            0.5 * (f[i] * geom.weights[i] + f[j] * geom.weights[j]) / geom.seg[i]
        })
        .collect()
}

/// Segment values of `d_s alpha` for the given law; `k` and `beta` are node
/// fields, `omega` is ignored unless the law is asymptotically uniform.
pub fn alpha_source(
    strategy: &RedistributionStrategy,
    geom: &DiscreteGeometry,
    k: &[f64],
    beta: &[f64],
    omega: f64,
) -> Result<Vec<f64>> {
    let n = geom.len();
    check_len(n, k.len())?;
    check_len(n, beta.len())?;
    if let RedistributionStrategy::Zero = strategy {
        return Ok(vec![0.0; n]);
    }
    let kbeta: Vec<f64> = k.iter().zip(beta).map(|(k, b)| k * b).collect();
    let avg = curve_average(&kbeta, geom)?;
    let mut source = to_segments(geom, &kbeta);
    source.iter_mut().for_each(|s| *s -= avg);
    if let RedistributionStrategy::AsymptoticallyUniform { .. } = strategy {
        let length = geom.length;
        for (s, g) in source.iter_mut().zip(&geom.g) {
            // exp(-theta) - 1 == L/g - 1
            *s += (length / g - 1.0) * omega;
        }
    }
    Ok(source)
}

/// Cumulative midpoint quadrature of a segment source with `alpha_0 = 0`.
///
/// The closure defect `alpha_n - alpha_0` is removed by subtracting a
/// correction linear in arc length.
pub fn integrate_alpha(source: &[f64], geom: &DiscreteGeometry) -> Result<Vec<f64>> {
    integrate_alpha_scaled(source, geom, 0.0)
}

/// As [`integrate_alpha`], with the compatibility tolerance measured against
/// `max(max|source|, scale)`; `scale` bounds the terms whose cancellation
/// produced the source.
fn integrate_alpha_scaled(source: &[f64], geom: &DiscreteGeometry, scale: f64) -> Result<Vec<f64>> {
    let n = geom.len();
    check_len(n, source.len())?;
    let mut alpha = Vec::with_capacity(n);
    let mut arc = Vec::with_capacity(n);
    let (mut a, mut s) = (0.0, 0.0);
    for i in 0..n {
        alpha.push(a);
        arc.push(s);
        a += source[i] * geom.seg[i];
        s += geom.seg[i];
    }
    let defect = a;
    let max_source = source.iter().fold(scale, |m, v| m.max(v.abs()));
    let limit = COMPATIBILITY_TOL * s * max_source;
    if defect.abs() > limit || !defect.is_finite() {
        return Err(Error::CompatibilityViolation { defect, limit });
    }
    if defect.abs() > 1e-10 * s * max_source {
        log::warn!("projecting tangential velocity closure defect {defect:e}");
    }
    for (a, s_i) in alpha.iter_mut().zip(&arc) {
        *a -= defect * s_i / s;
    }
    Ok(alpha)
}

/// Tangential velocity and the scalars it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentialVelocity {
    /// Node values of `alpha`.
    pub alpha: Vec<f64>,
    /// Segment values of `d_s alpha`.
    pub source: Vec<f64>,
    pub kbeta_avg: f64,
    /// Zero unless the law is asymptotically uniform.
    pub omega: f64,
}

pub fn tangential_velocity(
    strategy: &RedistributionStrategy,
    geom: &DiscreteGeometry,
    k: &[f64],
    beta: &[f64],
) -> Result<TangentialVelocity> {
    check_len(geom.len(), k.len())?;
    check_len(geom.len(), beta.len())?;
    let kbeta: Vec<f64> = k.iter().zip(beta).map(|(k, b)| k * b).collect();
    let kbeta_avg = curve_average(&kbeta, geom)?;
    let omega = match strategy {
        RedistributionStrategy::AsymptoticallyUniform { .. } => omega(strategy, kbeta_avg)?,
        _ => 0.0,
    };
    let source = alpha_source(strategy, geom, k, beta, omega)?;
    let alpha = match strategy {
        RedistributionStrategy::Zero => vec![0.0; geom.len()],
        _ => {
            let scale = kbeta.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + omega.abs();
            integrate_alpha_scaled(&source, geom, scale)?
        }
    };
    Ok(TangentialVelocity {
        alpha,
        source,
        kbeta_avg,
        omega,
    })
}

/// Advances segment local lengths over `tau` by the exact solution of their
/// ODE with frozen `k beta` and `omega`:
///
/// * zero: `d_t g = -g (k beta)`, with `k beta` transferred to the segment
/// * rll: `d_t g = -g <k beta>`
/// * au: `d_t g = -g <k beta> + (L(t) - g) omega`, where the length follows
///   `L(t) = L exp(-<k beta> t)`; in terms of `theta = ln(g / L)` this is
///   `d_t theta = (exp(-theta) - 1) omega`, so uniform `g` stays uniform.
pub fn advance_local_lengths(
    strategy: &RedistributionStrategy,
    g: &[f64],
    kbeta_seg: &[f64],
    kbeta_avg: f64,
    omega: f64,
    length: f64,
    tau: f64,
) -> Vec<f64> {
    let shrink = (-kbeta_avg * tau).exp();
    match strategy {
        RedistributionStrategy::Zero => g
            .iter()
            .zip(kbeta_seg)
            .map(|(g, kb)| g * (-kb * tau).exp())
            .collect(),
        RedistributionStrategy::RelativeLocalLength => g.iter().map(|g| g * shrink).collect(),
        RedistributionStrategy::AsymptoticallyUniform { .. } => {
            let relax = (-omega * tau).exp();
            g.iter()
                .map(|g| length * shrink * (1.0 + (g / length - 1.0) * relax))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlanarCurve;
    use crate::point::Point;
    use std::f64::consts::TAU;

    #[test]
    fn serde_shapes() {
        let au: RedistributionStrategy =
            serde_json::from_str(r#"{"kind":"asymptotic","kappa1":2,"kappa2":10}"#).unwrap();
        assert_eq!(au, RedistributionStrategy::AsymptoticallyUniform { kappa1: 2.0, kappa2: 10.0 });
        let rll = serde_json::to_string(&RedistributionStrategy::RelativeLocalLength).unwrap();
        assert_eq!(rll, r#"{"kind":"rll"}"#);
        assert!(serde_json::from_str::<RedistributionStrategy>(r#"{"kind":"zero","kappa1":1}"#).is_err());
        assert!(serde_json::from_str::<RedistributionStrategy>(r#"{"kind":"asymptotic"}"#).is_err());
    }

    fn circle(n: usize, r: f64) -> PlanarCurve {
        PlanarCurve::new(
            (0..n)
                .map(|i| Point::from_angle(TAU * i as f64 / n as f64) * r)
                .collect(),
        )
        .unwrap()
    }

    fn clustered_ellipse(n: usize, a: f64, b: f64, gamma: f64) -> PlanarCurve {
        PlanarCurve::new(
            (0..n)
                .map(|i| {
                    let u = i as f64 / n as f64;
                    let phi = TAU * u + gamma * (TAU * u).sin();
                    Point::new(a * phi.cos(), b * phi.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    const AU: RedistributionStrategy = RedistributionStrategy::AsymptoticallyUniform { kappa1: 3.0, kappa2: 2.0 };
    const ALL: [RedistributionStrategy; 3] = [RedistributionStrategy::Zero, RedistributionStrategy::RelativeLocalLength, AU];

    #[test]
    fn theta_of_uniform_curve_vanishes() {
        let geom = DiscreteGeometry::from_curve(&circle(64, 1.3)).unwrap();
        let theta = compute_theta(&geom).unwrap();
        assert!(theta.values().iter().all(|t| t.abs() < 1e-12));
        assert!((theta.normalization() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_of_doubled_segment() {
        // unit steps along a rectangle, one side made of a single double-length step
        let pts = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (0.0, 1.0)];
        let geom = DiscreteGeometry::from_curve(&PlanarCurve::from_xy(pts).unwrap()).unwrap();
        let theta = compute_theta(&geom).unwrap();
        let unit = theta.values()[1];
        assert!((theta.values()[0] - unit - 2f64.ln()).abs() < 1e-14);
        assert!((theta.normalization() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_matches_direct_recomputation() {
        let curve = clustered_ellipse(37, 2.0, 0.7, 0.5);
        let geom = DiscreteGeometry::from_curve(&curve).unwrap();
        let theta = compute_theta(&geom).unwrap();
        let nodes = curve.nodes();
        let perimeter: f64 = (0..37).map(|i| nodes[i].distance(nodes[(i + 1) % 37])).sum();
        for i in 0..37 {
            let g = 37.0 * nodes[i].distance(nodes[(i + 1) % 37]);
            assert!((theta.values()[i] - (g / perimeter).ln()).abs() < 1e-13);
        }
        assert!((theta.normalization() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn omega_values() {
        let s = RedistributionStrategy::AsymptoticallyUniform { kappa1: 10.0, kappa2: 0.0 };
        assert_eq!(omega(&s, 123.0).unwrap(), 10.0);
        let s = RedistributionStrategy::AsymptoticallyUniform { kappa1: 0.0, kappa2: 1.0 };
        assert_eq!(omega(&s, 1.0 / 4.0).unwrap(), 0.25);
        let s = RedistributionStrategy::AsymptoticallyUniform { kappa1: 5.0, kappa2: 2.0 };
        assert_eq!(omega(&s, 3.0).unwrap(), 11.0);
        assert!(matches!(omega(&RedistributionStrategy::Zero, 1.0), Err(Error::WrongStrategy)));
        assert!(matches!(
            omega(&RedistributionStrategy::RelativeLocalLength, 1.0),
            Err(Error::WrongStrategy)
        ));
    }

    #[test]
    fn strategy_validation() {
        assert!(RedistributionStrategy::AsymptoticallyUniform { kappa1: 0.0, kappa2: 0.0 }.validate().is_err());
        assert!(RedistributionStrategy::AsymptoticallyUniform { kappa1: -1.0, kappa2: 2.0 }.validate().is_err());
        assert!(AU.validate().is_ok());
        assert_eq!(
            RedistributionStrategy::asymptotic_for(0.5),
            RedistributionStrategy::AsymptoticallyUniform { kappa1: 20.0, kappa2: 10.0 }
        );
    }

    #[test]
    fn circle_source_vanishes_for_every_law() {
        let geom = DiscreteGeometry::from_curve(&circle(128, 2.0)).unwrap();
        let beta = geom.k.clone();
        for s in ALL {
            let tv = tangential_velocity(&s, &geom, &geom.k, &beta).unwrap();
            assert!(tv.source.iter().all(|v| v.abs() < 1e-12), "{s:?}");
            assert!(tv.alpha.iter().all(|v| v.abs() < 1e-12), "{s:?}");
        }
    }

    #[test]
    fn sources_are_compatible_on_clustered_ellipse() {
        let geom = DiscreteGeometry::from_curve(&clustered_ellipse(200, 2.0, 1.0, 0.6)).unwrap();
        let beta = geom.k.clone();
        let s = alpha_source(&AU, &geom, &geom.k, &beta, 1.0).unwrap();
        // independent quadrature over the segment chords
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (v, l) in s.iter().zip(&geom.seg) {
            // Kahan summation
            let y = v * l - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let max = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(sum.abs() < 1e-10 * geom.length * max, "{sum:e}");
    }

    #[test]
    fn zero_source_gives_zero_alpha() {
        let geom = DiscreteGeometry::from_curve(&clustered_ellipse(50, 2.0, 1.0, 0.3)).unwrap();
        let alpha = integrate_alpha(&vec![0.0; 50], &geom).unwrap();
        assert!(alpha.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn constant_source_is_incompatible() {
        let geom = DiscreteGeometry::from_curve(&circle(50, 1.0)).unwrap();
        assert!(matches!(
            integrate_alpha(&vec![0.7; 50], &geom),
            Err(Error::CompatibilityViolation { .. })
        ));
        assert!(matches!(
            integrate_alpha(&[0.0; 3], &geom),
            Err(Error::InconsistentLengths { .. })
        ));
    }

    #[test]
    fn sinusoidal_source_matches_antiderivative() {
        // source cos(2 pi s / L) has antiderivative (L / 2 pi) sin(2 pi s / L)
        let errs: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let geom = DiscreteGeometry::from_curve(&circle(n, 1.0)).unwrap();
                let l = geom.length;
                let mut arc = vec![0.0; n + 1];
                for i in 0..n {
                    arc[i + 1] = arc[i] + geom.seg[i];
                }
                let source: Vec<f64> = (0..n)
                    .map(|i| (TAU * 0.5 * (arc[i] + arc[i + 1]) / l).cos())
                    .collect();
                let alpha = integrate_alpha(&source, &geom).unwrap();
                assert_eq!(alpha[0], 0.0);
                (0..n)
                    .map(|i| (alpha[i] - l / TAU * (TAU * arc[i] / l).sin()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-3);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn closure_defect_is_projected_out() {
        let geom = DiscreteGeometry::from_curve(&clustered_ellipse(80, 1.5, 1.0, 0.4)).unwrap();
        let beta = geom.k.clone();
        let s = alpha_source(&AU, &geom, &geom.k, &beta, 7.0).unwrap();
        let alpha = integrate_alpha(&s, &geom).unwrap();
        let max = alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let closure = alpha[79] + s[79] * geom.seg[79];
        assert!(closure.abs() <= 1e-8 * max);
    }

    #[test]
    fn relaxation_matches_analytic_theta() {
        // frozen geometry: <k beta> = 0, so d_t theta = (exp(-theta) - 1) omega
        let omega = 4.0;
        let length = 2.0;
        let tau = 0.01;
        let s = RedistributionStrategy::AsymptoticallyUniform { kappa1: omega, kappa2: 0.0 };
        let mut g: Vec<f64> = vec![0.5, 1.0, 3.0, 3.5];
        let theta0: Vec<f64> = g.iter().map(|g| (g / length).ln()).collect();
        for step in 1..=100 {
            g = advance_local_lengths(&s, &g, &[0.0; 4], 0.0, omega, length, tau);
            let t = step as f64 * tau;
            for (gi, th0) in g.iter().zip(&theta0) {
                let exact = (1.0 + (th0.exp() - 1.0) * (-omega * t).exp()).ln();
                assert!(((gi / length).ln() - exact).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn relative_lengths_are_preserved_by_rll() {
        let g = vec![0.5, 1.0, 3.0, 3.5];
        let out = advance_local_lengths(&RedistributionStrategy::RelativeLocalLength, &g, &[9.0; 4], 2.0, 0.0, 2.0, 0.1);
        for (a, b) in g.iter().zip(&out) {
            assert!((b / a - (-0.2f64).exp()).abs() < 1e-15);
        }
        let zero = advance_local_lengths(&RedistributionStrategy::Zero, &g, &[1.0, 2.0, 0.0, -1.0], 0.0, 0.0, 2.0, 0.1);
        assert!((zero[1] - (-0.2f64).exp()).abs() < 1e-15);
        assert_eq!(zero[2], 3.0);
    }
}
