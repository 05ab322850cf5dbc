//! Semi-implicit time stepping of the intrinsic system for `(k, nu, g, x)`.
//!
//! Each step freezes the velocity law, the tangential velocity and the
//! averaged reaction at time `t`, advances the local lengths `g` by their
//! exact linear ODE, and then solves one cyclic tridiagonal system each for
//! `nu`, `k` and both components of `x`. Arc-length derivatives use the
//! advanced local lengths as the metric:
//!
//! ```text
//! D[f]_i = ((f_{i+1} - f_i) / h_i - (f_i - f_{i-1}) / h_{i-1}) / w_i
//! h_i = g_i / n,  w_i = (h_{i-1} + h_i) / 2
//! ```
//!
//! Advection by `alpha` is implicit, centred where the cell Peclet number
//! `|alpha| h / beta'_k` is at most 2 and upwinded elsewhere. Nodes are
//! displaced tangentially along the neighbour chord `x_{i+1} - x_{i-1}`,
//! with a second-order curvature correction, so redistribution does not
//! change the enclosed area to first order.
//!
//! Positions are authoritative: after the position update the local lengths
//! are re-derived from `x`, and `k`, `nu` are re-synchronised from `x`
//! whenever they drift beyond the configured tolerance.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiscreteGeometry, PlanarCurve};
use crate::linalg::CyclicTridiagonal;
use crate::model::{Partials, VelocityModel};
use crate::point::Point;
use crate::redistribution::{advance_local_lengths, tangential_velocity, to_segments, RedistributionStrategy};

pub const DEFAULT_RESYNC_TOL: f64 = 5e-2;
pub const DEFAULT_L_MIN: f64 = 1e-2;
pub const DEFAULT_K_MAX: f64 = 1e3;

/// Exterior angle beyond which a node is treated as folded.
const FOLD_ANGLE: f64 = 0.9 * PI;

fn default_l_min() -> f64 {
    DEFAULT_L_MIN
}

fn default_k_max() -> f64 {
    DEFAULT_K_MAX
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopCriteria {
    #[serde(rename = "L_min", default = "default_l_min")]
    pub l_min: f64,
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    /// Stop once `max g / min g` exceeds this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            l_min: DEFAULT_L_MIN,
            k_max: DEFAULT_K_MAX,
            ratio_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_end: f64,
    pub model: VelocityModel,
    pub strategy: RedistributionStrategy,
    pub stop: StopCriteria,
    pub resync_tol: f64,
    /// Record a snapshot every this many steps.
    pub snapshot_every: usize,
    /// When set, each step is shortened so that
    /// `tau * max(beta'_k) / min(h)^2 <= tau_ratio`.
    pub tau_ratio: Option<f64>,
}

impl SolverConfig {
    pub fn new(model: VelocityModel, strategy: RedistributionStrategy, tau: f64, t_end: f64) -> Self {
        SolverConfig {
            tau,
            t_end,
            model,
            strategy,
            stop: StopCriteria::default(),
            resync_tol: DEFAULT_RESYNC_TOL,
            snapshot_every: 100,
            tau_ratio: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::validation("tau", "must be positive and finite"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::validation("t_end", "must be finite and >= 0"));
        }
        if !(self.stop.l_min > 0.0) {
            return Err(Error::validation("stop.L_min", "must be positive"));
        }
        if !(self.stop.k_max > 0.0) {
            return Err(Error::validation("stop.k_max", "must be positive"));
        }
        if let Some(r) = self.stop.ratio_max {
            if !(r >= 1.0) {
                return Err(Error::validation("stop.ratio_max", "must be >= 1"));
            }
        }
        if !(self.resync_tol > 0.0) {
            return Err(Error::validation("resync_tol", "must be positive"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::validation("snapshot_every", "must be >= 1"));
        }
        if let Some(r) = self.tau_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::validation("tau_ratio", "must be positive"));
            }
        }
        self.model.validate()?;
        self.strategy.validate()
    }
}

/// Solver unknowns at one time level, with cached derived quantities.
#[derive(Clone, Debug)]
pub struct IntrinsicState {
    pub t: f64,
    pub k: Vec<f64>,
    pub nu: Vec<f64>,
    /// Local length per segment, derived from `x`.
    pub g: Vec<f64>,
    pub x: Vec<Point>,
    /// Geometry of the polygon `x`.
    pub geom: DiscreteGeometry,
    pub beta: Vec<f64>,
    pub partials: Vec<Partials>,
    pub alpha: Vec<f64>,
    pub kbeta_avg: f64,
    pub omega: f64,
    /// Number of times `k` and `nu` were re-derived from `x`.
    pub resyncs: usize,
}

impl IntrinsicState {
    pub fn new(curve: &PlanarCurve, model: &VelocityModel, strategy: &RedistributionStrategy) -> Result<Self> {
        let geom = DiscreteGeometry::from_curve(curve)?;
        let mut state = IntrinsicState {
            t: 0.0,
            k: geom.k.clone(),
            nu: geom.nu.clone(),
            g: geom.g.clone(),
            x: curve.nodes().to_vec(),
            geom,
            beta: Vec::new(),
            partials: Vec::new(),
            alpha: Vec::new(),
            kbeta_avg: 0.0,
            omega: 0.0,
            resyncs: 0,
        };
        state.refresh(model, strategy)?;
        Ok(state)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.geom.length
    }

    pub fn area(&self) -> f64 {
        self.geom.area
    }

    pub fn curve(&self) -> PlanarCurve {
        PlanarCurve::new(self.x.clone()).expect("state positions form a valid curve")
    }

    /// Recomputes `beta`, its partials and the tangential velocity.
    fn refresh(&mut self, model: &VelocityModel, strategy: &RedistributionStrategy) -> Result<()> {
        let n = self.len();
        self.beta = (0..n).map(|i| model.beta(self.x[i], self.k[i], self.nu[i])).collect();
        self.partials = (0..n)
            .map(|i| model.partials(self.x[i], self.k[i], self.nu[i]))
            .collect::<Result<_>>()?;
        if let Some((index, p)) = self
            .partials
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.dk > 0.0 && p.dk.is_finite()))
        {
            return Err(Error::NonParabolic { index, value: p.dk });
        }
        let tv = tangential_velocity(strategy, &self.geom, &self.k, &self.beta)?;
        self.alpha = tv.alpha;
        self.kbeta_avg = tv.kbeta_avg;
        self.omega = tv.omega;
        Ok(())
    }

    /// Stable step size bound `ratio * min(h)^2 / max(beta'_k)`.
    pub fn diffusive_step_limit(&self, ratio: f64) -> f64 {
        let h_min = self.geom.seg.iter().copied().fold(f64::INFINITY, f64::min);
        let dk_max = self.partials.iter().map(|p| p.dk).fold(0.0, f64::max);
        ratio * h_min * h_min / dk_max
    }
}

/// Central differencing of advection is used while the cell Peclet number
/// `|c| h / beta'_k` stays below 2; beyond that it would oscillate.
fn central(c: f64, h: f64, diffusivity: f64) -> bool {
    c.abs() * h <= 2.0 * diffusivity
}

/// Nonuniform second-difference stencil over the dual cells.
struct Metric {
    h: Vec<f64>,
    w: Vec<f64>,
}

impl Metric {
    fn from_local_lengths(g: &[f64]) -> Self {
        let n = g.len();
        let h: Vec<f64> = g.iter().map(|g| g / n as f64).collect();
        let w = (0..n).map(|i| 0.5 * (h[(i + n - 1) % n] + h[i])).collect();
        Metric { h, w }
    }

    #[inline]
    fn prev(&self, i: usize) -> f64 {
        let n = self.h.len();
        self.h[(i + n - 1) % n]
    }

    /// `D[f]_i` for a periodic node field.
    fn second_difference(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|i| {
                let fwd = (f[(i + 1) % n] - f[i]) / self.h[i];
                let bwd = (f[i] - f[(i + n - 1) % n]) / self.prev(i);
                (fwd - bwd) / self.w[i]
            })
            .collect()
    }

    /// `I - tau * diag(coef) * D`
    fn implicit_diffusion(&self, coef: &[f64], tau: f64) -> CyclicTridiagonal {
        let n = self.h.len();
        let mut lower = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..n {
            let c = tau * coef[i] / self.w[i];
            let lo = c / self.prev(i);
            let up = c / self.h[i];
            lower.push(-lo);
            diag.push(1.0 + lo + up);
            upper.push(-up);
        }
        CyclicTridiagonal { lower, diag, upper }
    }
}

fn mesh_collapse_check(geom: &DiscreteGeometry, winding: i32) -> Result<()> {
    let floor = 1e-10 * geom.length / geom.len() as f64;
    if let Some(index) = geom.seg.iter().position(|l| !(*l > floor)) {
        return Err(Error::MeshCollapse { index });
    }
    if let Some(index) = geom.turning.iter().position(|t| t.abs() > FOLD_ANGLE) {
        return Err(Error::MeshCollapse { index });
    }
    if geom.winding != winding {
        return Err(Error::MeshCollapse { index: 0 });
    }
    Ok(())
}

/// Step size the solver will use from `state`.
pub fn step_size(state: &IntrinsicState, config: &SolverConfig) -> f64 {
    let mut tau = config.tau;
    if let Some(ratio) = config.tau_ratio {
        tau = tau.min(state.diffusive_step_limit(ratio));
    }
    let remaining = config.t_end - state.t;
    if remaining > 0.0 {
        tau = tau.min(remaining);
    }
    tau
}

/// Advances `state` by [`step_size`].
pub fn step(state: &IntrinsicState, config: &SolverConfig) -> Result<IntrinsicState> {
    step_with(state, config, step_size(state, config))
}

/// Advances `state` by `tau`.
pub fn step_with(state: &IntrinsicState, config: &SolverConfig, tau: f64) -> Result<IntrinsicState> {
    let n = state.len();
    let nf = n as f64;
    let strategy = &config.strategy;
    let geom = &state.geom;
    let winding = geom.winding;
    let dk: Vec<f64> = state.partials.iter().map(|p| p.dk).collect();
    let kbeta: Vec<f64> = state.k.iter().zip(&state.beta).map(|(k, b)| k * b).collect();

    // (2) local lengths
    let kbeta_seg = to_segments(geom, &kbeta);
    let g_new = advance_local_lengths(
        strategy,
        &state.g,
        &kbeta_seg,
        state.kbeta_avg,
        state.omega,
        geom.length,
        tau,
    );
    if let Some(index) = g_new.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::MeshCollapse { index });
    }
    let metric = Metric::from_local_lengths(&g_new);
    let diffusion = metric.implicit_diffusion(&dk, tau);

    let tangent: Vec<Point> = state.nu.iter().map(|nu| Point::from_angle(*nu)).collect();

    // (3) tangent angle: implicit diffusion and hybrid central/upwind advection
    let nu_new = {
        let mut a = diffusion.clone();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| state.nu[i] + tau * state.partials[i].dx.dot(tangent[i]))
            .collect();
        for i in 0..n {
            let c = state.alpha[i] + state.partials[i].dnu;
            let (hm, hp) = (metric.prev(i), metric.h[i]);
            if central(c, hm.max(hp), dk[i]) {
                let v = tau * c / (hm + hp);
                a.upper[i] -= v;
                a.lower[i] += v;
            } else if c > 0.0 {
                let v = tau * c / hp;
                a.diag[i] += v;
                a.upper[i] -= v;
            } else {
                let v = -tau * c / hm;
                a.diag[i] += v;
                a.lower[i] -= v;
            }
        }
        // nu_{-1} = nu_{n-1} - 2 pi m and nu_n = nu_0 + 2 pi m
        let jump = TAU * winding as f64;
        rhs[0] += a.lower[0] * jump;
        rhs[n - 1] -= a.upper[n - 1] * jump;
        a.solve(&rhs)?
    };

    // (4) curvature: implicit beta'_k D[k], hybrid conservative d_s(alpha k),
    // decaying reaction implicit, growing reaction and the remainder of
    // D[beta] explicit
    let k_new = {
        let mut a = diffusion.clone();
        let d_beta = metric.second_difference(&state.beta);
        let d_k = metric.second_difference(&state.k);
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| state.k[i] + tau * (d_beta[i] - dk[i] * d_k[i]))
            .collect();
        for i in 0..n {
            let j = (i + 1) % n;
            let speed = 0.5 * (state.alpha[i] + state.alpha[j]);
            let (wi, wj) = (tau * speed / metric.w[i], tau * speed / metric.w[j]);
            if central(speed, metric.h[i], 0.5 * (dk[i] + dk[j])) {
                a.diag[i] -= 0.5 * wi;
                a.upper[i] -= 0.5 * wi;
                a.diag[j] += 0.5 * wj;
                a.lower[j] += 0.5 * wj;
            } else if speed > 0.0 {
                a.upper[i] -= wi;
                a.diag[j] += wj;
            } else {
                a.diag[i] -= wi;
                a.lower[j] += wj;
            }
        }
        for i in 0..n {
            let reaction = match strategy {
                RedistributionStrategy::Zero => kbeta[i],
                RedistributionStrategy::RelativeLocalLength => state.kbeta_avg,
                RedistributionStrategy::AsymptoticallyUniform { .. } => {
                    let g_node = nf * geom.weights[i];
                    state.kbeta_avg + (1.0 - geom.length / g_node) * state.omega
                }
            };
            if reaction > 0.0 {
                rhs[i] += tau * reaction * state.k[i];
            } else {
                a.diag[i] -= tau * reaction;
            }
        }
        a.solve(&rhs)?
    };

    // (5) position: beta N = beta'_k D[x] + (beta - beta'_k k) N
    let x_new = {
        let mut rx = Vec::with_capacity(n);
        let mut ry = Vec::with_capacity(n);
        for i in 0..n {
            let t = tangent[i];
            let normal = Point::new(-t.y, t.x);
            // Tangential displacement along the neighbour chord leaves the
            // polygon area unchanged to first order; the d^2 term follows
            // the curve, x(s + d) = x + d T + (d^2 / 2) k N.
            let d = tau * state.alpha[i];
            let chord = state.x[(i + 1) % n] - state.x[(i + n - 1) % n];
            let ct = chord * (1.0 / chord.hypot());
            let cn = Point::new(-ct.y, ct.x);
            let p = state.x[i]
                + normal * (tau * (state.beta[i] - dk[i] * state.k[i]))
                + cn * (0.5 * d * d * state.k[i])
                + ct * d;
            rx.push(p.x);
            ry.push(p.y);
        }
        let xs = diffusion.solve(&rx)?;
        let ys = diffusion.solve(&ry)?;
        xs.into_iter().zip(ys).map(|(x, y)| Point::new(x, y)).collect::<Vec<_>>()
    };

    // (6) derived geometry
    let curve = PlanarCurve::new(x_new).map_err(|e| match e {
        Error::DegenerateSegment { index } => Error::MeshCollapse { index },
        other => other,
    })?;
    let geom_new = DiscreteGeometry::from_curve(&curve).map_err(|e| match e {
        Error::DegenerateSegment { index } => Error::MeshCollapse { index },
        other => other,
    })?;
    mesh_collapse_check(&geom_new, winding)?;

    let max_k = geom_new
        .max_abs_curvature()
        .max(k_new.iter().fold(0.0_f64, |m, k| m.max(k.abs())));
    if !(max_k <= config.stop.k_max) {
        return Err(Error::CurvatureBlowup {
            max_k,
            limit: config.stop.k_max,
        });
    }

    // position-derived angles on the branch of the evolved ones
    let offset = TAU * ((nu_new[0] - geom_new.nu[0]) / TAU).round();
    let nu_pos: Vec<f64> = geom_new.nu.iter().map(|v| v + offset).collect();
    let k_drift = {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let w = geom_new.weights[i];
            num += (k_new[i] - geom_new.k[i]).powi(2) * w;
            den += geom_new.k[i].powi(2) * w;
        }
        (num / den).sqrt()
    };
    let nu_drift = nu_new
        .iter()
        .zip(&nu_pos)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let unwrapped = (0..n - 1).all(|i| (nu_new[i + 1] - nu_new[i]).abs() < PI);

    let mut next = IntrinsicState {
        t: if (state.t + tau - config.t_end).abs() <= 1e-9 * tau {
            // absorb round-off accumulated over many steps
            config.t_end
        } else {
            state.t + tau
        },
        k: k_new,
        nu: nu_new,
        g: geom_new.g.clone(),
        x: curve.into_nodes(),
        geom: geom_new,
        beta: Vec::new(),
        partials: Vec::new(),
        alpha: Vec::new(),
        kbeta_avg: 0.0,
        omega: 0.0,
        resyncs: state.resyncs,
    };
    if !(k_drift <= config.resync_tol && nu_drift <= config.resync_tol && unwrapped) {
        log::debug!(
            "t = {:.6}: re-syncing k, nu from positions (k drift {k_drift:.3e}, nu drift {nu_drift:.3e})",
            next.t
        );
        next.k = next.geom.k.clone();
        next.nu = nu_pos;
        next.resyncs += 1;
    }
    next.refresh(&config.model, strategy)?;
    Ok(next)
}

/// Per-step scalar diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub max_abs_k: f64,
    /// `max g / min g`
    pub ratio: f64,
    /// `max |n g / L - 1|`
    pub dispersion: f64,
}

impl Diagnostics {
    pub fn of(state: &IntrinsicState) -> Self {
        let geom = &state.geom;
        let n = geom.len() as f64;
        let dispersion = geom
            .seg
            .iter()
            .fold(0.0_f64, |m, l| m.max((n * l / geom.length - 1.0).abs()));
        Diagnostics {
            t: state.t,
            length: geom.length,
            area: geom.area,
            max_abs_k: geom.max_abs_curvature(),
            ratio: geom.mesh_ratio(),
            dispersion,
        }
    }
}

/// Recorded state at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub x: Vec<Point>,
    pub k: Vec<f64>,
    pub nu: Vec<f64>,
    pub g: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Snapshot {
    pub fn of(state: &IntrinsicState, step: usize) -> Self {
        Snapshot {
            step,
            t: state.t,
            x: state.x.clone(),
            k: state.k.clone(),
            nu: state.nu.clone(),
            g: state.g.clone(),
            alpha: state.alpha.clone(),
        }
    }

    pub fn curve(&self) -> Result<PlanarCurve> {
        PlanarCurve::new(self.x.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    #[serde(rename = "t_end reached")]
    TEndReached,
    #[serde(rename = "L < L_min")]
    LengthBelowMin,
    #[serde(rename = "CurvatureBlowup")]
    CurvatureBlowup,
    #[serde(rename = "MeshCollapse")]
    MeshCollapse,
    #[serde(rename = "mesh ratio alarm")]
    MeshRatio,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::TEndReached => "t_end reached",
            Termination::LengthBelowMin => "L < L_min",
            Termination::CurvatureBlowup => "CurvatureBlowup",
            Termination::MeshCollapse => "MeshCollapse",
            Termination::MeshRatio => "mesh ratio alarm",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub termination: Termination,
    /// Error message of the step that triggered the termination, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub steps: usize,
    pub resyncs: usize,
    #[serde(rename = "final")]
    pub last: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostics>,
    pub report: RunReport,
    pub final_state: IntrinsicState,
}

/// Evolves `initial` until `t_end` or a stop criterion fires.
///
/// Mesh collapse and curvature blow-up end the run with the corresponding
/// [`Termination`]; any other step failure is returned as [`Error::Step`].
pub fn run(initial: &PlanarCurve, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let mut state = IntrinsicState::new(initial, &config.model, &config.strategy)?;
    let mut snapshots = vec![Snapshot::of(&state, 0)];
    let mut diagnostics = vec![Diagnostics::of(&state)];
    let mut steps = 0;
    let mut detail = None;
    let end_tol = 1e-12 * config.t_end.max(1.0);

    let termination = loop {
        let diag = diagnostics.last().expect("initial diagnostics");
        if state.t >= config.t_end - end_tol {
            break Termination::TEndReached;
        }
        if diag.length < config.stop.l_min {
            break Termination::LengthBelowMin;
        }
        if config.stop.ratio_max.is_some_and(|r| diag.ratio > r) {
            break Termination::MeshRatio;
        }
        match step(&state, config) {
            Ok(next) => state = next,
            Err(e) => match e {
                Error::MeshCollapse { .. } => {
                    detail = Some(e.to_string());
                    break Termination::MeshCollapse;
                }
                Error::CurvatureBlowup { .. } => {
                    detail = Some(e.to_string());
                    break Termination::CurvatureBlowup;
                }
                other => {
                    return Err(Error::Step {
                        step: steps + 1,
                        t: state.t,
                        source: Box::new(other),
                    })
                }
            },
        }
        steps += 1;
        diagnostics.push(Diagnostics::of(&state));
        if steps % config.snapshot_every == 0 {
            snapshots.push(Snapshot::of(&state, steps));
        }
    };
    if snapshots.last().map(|s| s.step) != Some(steps) {
        snapshots.push(Snapshot::of(&state, steps));
    }
    let report = RunReport {
        termination,
        detail,
        steps,
        resyncs: state.resyncs,
        last: *diagnostics.last().expect("initial diagnostics"),
    };
    Ok(Trajectory {
        snapshots,
        diagnostics,
        report,
        final_state: state,
    })
}
