//! Runs, convergence studies and strategy comparisons, with their on-disk
//! outputs.
//!
//! A run directory contains
//!
//! ```text
//! manifest.json      config echo, termination, snapshot index
//! snap_<k>.csv       i,x,y,k,nu,g,alpha
//! metrics.csv        mesh quality per snapshot
//! diagnostics.csv    length, area, curvature and mesh quality per step
//! final.csv          final curve, x,y
//! frames/*.svg       one frame per snapshot, with --svg
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::metrics::{self, axis_ratio, fitted_radius, hausdorff, MeshQualityMetrics};
use crate::model::{AnisotropyField, VelocityModel};
use crate::output;
use crate::point::Point;
use crate::redistribution::RedistributionStrategy;
use crate::scenario::Generator;
use crate::solver::{run, Diagnostics, RunReport, Trajectory};
use crate::svg::{self, SvgStyle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub step: usize,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    #[serde(flatten)]
    pub report: RunReport,
    pub snapshots: Vec<SnapshotEntry>,
    /// Diagnostics at the snapshot times.
    pub diagnostics: Vec<Diagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<String>,
}

/// Builds the initial curve and evolves it.
pub fn simulate(config: &RunConfig) -> Result<Trajectory> {
    config.validate()?;
    let curve = config.initial_curve()?;
    run(&curve, &config.solver_config())
}

/// Runs `config` and writes the run directory `out`.
pub fn run_scenario(config: &RunConfig, out: &Path, svg: bool) -> Result<(Trajectory, Manifest)> {
    let trajectory = simulate(config)?;
    let manifest = write_run(config, &trajectory, out, svg)?;
    Ok((trajectory, manifest))
}

pub fn write_run(config: &RunConfig, tr: &Trajectory, out: &Path, svg: bool) -> Result<Manifest> {
    std::fs::create_dir_all(out)?;
    let mut snapshots = Vec::with_capacity(tr.snapshots.len());
    for (k, snap) in tr.snapshots.iter().enumerate() {
        let file = format!("snap_{k:05}.csv");
        output::write_snapshot_csv(out.join(&file), snap)?;
        snapshots.push(SnapshotEntry {
            file,
            step: snap.step,
            t: snap.t,
        });
    }
    output::write_metrics_csv(out.join("metrics.csv"), &metrics::series(&tr.snapshots))?;
    output::write_diagnostics_csv(out.join("diagnostics.csv"), &tr.diagnostics)?;
    output::write_curve_csv(out.join("final.csv"), &tr.final_state.curve())?;

    let mut frames = Vec::new();
    if svg {
        let curves: Vec<&[Point]> = tr.snapshots.iter().map(|s| s.x.as_slice()).collect();
        for path in svg::write_frames(&out.join("frames"), &curves, &SvgStyle::default())? {
            let name = path.file_name().expect("frame file name").to_string_lossy();
            frames.push(format!("frames/{name}"));
        }
    }

    let manifest = Manifest {
        config: config.clone(),
        report: tr.report.clone(),
        snapshots,
        diagnostics: tr.snapshots.iter().map(|s| tr.diagnostics[s.step]).collect(),
        frames,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses `"n:tau,n:tau,..."`.
pub fn parse_levels(spec: &str) -> Result<Vec<(usize, f64)>> {
    let bad = |item: &str| Error::validation("levels", format!("expected `n:tau`, got `{item}`"));
    let levels = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (n, tau) = item.split_once(':').ok_or_else(|| bad(item))?;
            let n: usize = n.trim().parse().map_err(|_| bad(item))?;
            let tau: f64 = tau.trim().parse().map_err(|_| bad(item))?;
            Ok((n, tau))
        })
        .collect::<Result<Vec<_>>>()?;
    if levels.is_empty() {
        return Err(Error::validation("levels", "at least one level is required"));
    }
    Ok(levels)
}

/// Exactly known observable of a scenario.
#[derive(Clone, Debug, PartialEq)]
enum Oracle {
    /// Circle whose radius obeys `dR/dt = -beta(1/R)`.
    Radius { r0: f64, model: VelocityModel },
    /// Ellipse under affine flow keeps its axis ratio.
    AxisRatio { ratio: f64 },
}

impl Oracle {
    fn for_config(config: &RunConfig) -> Result<Self> {
        let no_oracle = || {
            Error::NoExactSolution(format!(
                "{} under {}",
                config.scenario.label(),
                serde_json::to_string(&config.model).unwrap_or_default()
            ))
        };
        match (&config.scenario, &config.model) {
            (Generator::Circle { r0 }, m) if depends_on_k_only(m) => Ok(Oracle::Radius {
                r0: *r0,
                model: m.clone(),
            }),
            (
                Generator::Ellipse { a, b } | Generator::NonuniformEllipse { a, b, .. },
                VelocityModel::PowerLaw { sigma, .. },
            ) if (sigma - 1.0 / 3.0).abs() < 1e-9 => Ok(Oracle::AxisRatio {
                ratio: a.max(*b) / a.min(*b),
            }),
            _ => Err(no_oracle()),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Oracle::Radius { .. } => "radius",
            Oracle::AxisRatio { .. } => "axis_ratio",
        }
    }

    fn exact(&self, t: f64) -> f64 {
        match self {
            Oracle::Radius { r0, model } => circle_radius(model, *r0, t),
            Oracle::AxisRatio { ratio } => *ratio,
        }
    }

    fn measure(&self, tr: &Trajectory) -> f64 {
        let curve = tr.final_state.curve();
        match self {
            Oracle::Radius { .. } => fitted_radius(&curve),
            Oracle::AxisRatio { .. } => axis_ratio(&curve),
        }
    }
}

fn depends_on_k_only(model: &VelocityModel) -> bool {
    match model {
        VelocityModel::MeanCurvature | VelocityModel::PowerLaw { .. } => true,
        VelocityModel::AnisotropicLinear { a, c } => {
            matches!(a, AnisotropyField::Constant { .. }) && matches!(c, AnisotropyField::Constant { .. })
        }
    }
}

/// Radius at time `t` of a circle moving with normal speed `beta(1/R)`.
pub fn circle_radius(model: &VelocityModel, r0: f64, t: f64) -> f64 {
    if let VelocityModel::MeanCurvature = model {
        return (r0 * r0 - 2.0 * t).max(0.0).sqrt();
    }
    let f = |r: f64| -model.beta(Point::ZERO, 1.0 / r, 0.0);
    let steps = 20_000;
    let h = t / steps as f64;
    let mut r = r0;
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub tau: f64,
    /// Parameter spacing `1 / n`.
    pub h: f64,
    /// Time at which the observable was measured.
    pub t: f64,
    pub measured: f64,
    pub exact: f64,
    pub error: f64,
    /// `None` for the first level and wherever the order is undefined.
    pub eoc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub observable: String,
    pub rows: Vec<ConvergenceRow>,
}

/// `log(e0 / e1) / log(h0 / h1)`, undefined for equal spacings or
/// non-positive errors.
pub fn eoc(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    let v = (e0 / e1).ln() / (h0 / h1).ln();
    (h0 != h1 && e0 > 0.0 && e1 > 0.0 && v.is_finite()).then_some(v)
}

/// Runs `base` at each `(n, tau)` level, concurrently, and tabulates the
/// error of the scenario's exact observable.
pub fn convergence_study(base: &RunConfig, levels: &[(usize, f64)]) -> Result<ConvergenceTable> {
    let oracle = Oracle::for_config(base)?;
    let configs: Vec<RunConfig> = levels
        .iter()
        .map(|&(n, tau)| RunConfig { n, tau, ..base.clone() })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let results: Vec<Result<Trajectory>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || simulate(c))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (c, tr) in configs.iter().zip(results) {
        let tr = tr?;
        let t = tr.report.last.t;
        let measured = oracle.measure(&tr);
        let exact = oracle.exact(t);
        let error = (measured - exact).abs();
        let h = 1.0 / c.n as f64;
        let eoc = rows.last().and_then(|p| eoc(p.error, error, p.h, h));
        log::info!("n = {}, tau = {:e}: error {error:e}, eoc {eoc:?}", c.n, c.tau);
        rows.push(ConvergenceRow {
            n: c.n,
            tau: c.tau,
            h,
            t,
            measured,
            exact,
            error,
            eoc,
        });
    }
    Ok(ConvergenceTable {
        observable: oracle.name().to_string(),
        rows,
    })
}

/// Writes `convergence.csv` and `convergence.json` into `out`.
pub fn write_convergence(out: &Path, table: &ConvergenceTable) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut csv = String::from("n,tau,h,t,measured,exact,error,eoc\n");
    for r in &table.rows {
        let eoc = r.eoc.map_or("undefined".to_string(), |v| v.to_string());
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n, r.tau, r.h, r.t, r.measured, r.exact, r.error, eoc
        ));
    }
    std::fs::write(out.join("convergence.csv"), csv)?;
    write_json(&out.join("convergence.json"), table)
}

/// Parses a comma separated list of `zero`, `rll`, `au`. The AU entry takes
/// its parameters from `base` when that is AU, otherwise the defaults for
/// `t_end`.
pub fn parse_strategies(spec: &str, base: &RedistributionStrategy, t_end: f64) -> Result<Vec<RedistributionStrategy>> {
    let mut out: Vec<RedistributionStrategy> = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s = match item {
            "zero" => RedistributionStrategy::Zero,
            "rll" => RedistributionStrategy::RelativeLocalLength,
            "au" | "asymptotic" => match base {
                RedistributionStrategy::AsymptoticallyUniform { .. } => *base,
                _ => RedistributionStrategy::asymptotic_for(t_end),
            },
            other => {
                return Err(Error::validation(
                    "strategies",
                    format!("unknown strategy `{other}`; expected zero, rll or au"),
                ))
            }
        };
        if out.iter().any(|o| o.label() == s.label()) {
            return Err(Error::validation("strategies", format!("`{item}` listed twice")));
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(Error::validation("strategies", "at least one strategy is required"));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub t: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub strategy: RedistributionStrategy,
    pub label: String,
    #[serde(flatten)]
    pub report: RunReport,
    /// Mesh quality at the snapshot times.
    pub metrics: Vec<MeshQualityMetrics>,
    /// Fitted radius at the snapshot times.
    pub radius: Vec<RadiusSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    /// Hausdorff distance between the final curves.
    pub hausdorff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub runs: Vec<StrategyRun>,
    pub pairs: Vec<PairDistance>,
}

impl Comparison {
    pub fn run(&self, label: &str) -> Option<&StrategyRun> {
        self.runs.iter().find(|r| r.label == label)
    }
}

/// Runs `config` once per strategy, concurrently. With `out`, each run is
/// written to `out/<label>` and the report to `out/comparison.json`.
pub fn compare_strategies(
    config: &RunConfig,
    strategies: &[RedistributionStrategy],
    out: Option<&Path>,
    svg: bool,
) -> Result<Comparison> {
    let configs: Vec<RunConfig> = strategies
        .iter()
        .map(|s| RunConfig {
            strategy: *s,
            ..config.clone()
        })
        .collect();
    let dirs: Vec<Option<PathBuf>> = strategies
        .iter()
        .map(|s| out.map(|o| o.join(s.label())))
        .collect();
    let results: Vec<Result<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&dirs)
            .map(|(c, dir)| {
                scope.spawn(move || match dir {
                    Some(d) => run_scenario(c, d, svg).map(|(tr, _)| tr),
                    None => simulate(c),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let trajectories = results.into_iter().collect::<Result<Vec<_>>>()?;

    let runs: Vec<StrategyRun> = strategies
        .iter()
        .zip(&trajectories)
        .map(|(s, tr)| StrategyRun {
            strategy: *s,
            label: s.label().to_string(),
            report: tr.report.clone(),
            metrics: metrics::series(&tr.snapshots),
            radius: tr
                .snapshots
                .iter()
                .map(|snap| RadiusSample {
                    t: snap.t,
                    radius: fitted_radius(&snap.curve().expect("snapshot curve")),
                })
                .collect(),
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            pairs.push(PairDistance {
                a: runs[i].label.clone(),
                b: runs[j].label.clone(),
                hausdorff: hausdorff(&trajectories[i].final_state.curve(), &trajectories[j].final_state.curve()),
            });
        }
    }
    let comparison = Comparison { runs, pairs };
    if let Some(o) = out {
        write_json(&o.join("comparison.json"), &comparison)?;
    }
    Ok(comparison)
}
