//! Built-in initial curves.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{resample_uniform, PlanarCurve};
use crate::point::Point;

/// Minimum node count accepted for simulations.
pub const MIN_SIM_NODES: usize = 16;

/// Initial curve generator. Generators without an explicit parameterization
/// (dumbbell, star, file) are resampled to equal chord lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Circle {
        #[serde(rename = "R0", default = "one")]
        r0: f64,
    },
    /// `(a cos phi, b sin phi)` with `phi` uniform in the parameter.
    Ellipse {
        #[serde(default = "two")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
    /// Ellipse sampled through the clustering map
    /// `u -> u + gamma sin(2 pi u) / (2 pi)`.
    NonuniformEllipse {
        #[serde(default = "two")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// Cassini oval `r^2 = cos(2 phi) + sqrt(cos^2(2 phi) + q^4 - 1)` whose
    /// waist has width `delta`.
    Dumbbell {
        #[serde(default = "default_delta")]
        delta: f64,
    },
    /// `r = 1 + amplitude cos(petals phi)`
    Star {
        #[serde(default = "default_petals")]
        petals: u32,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Curve read from a CSV file with header `x,y`.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn default_gamma() -> f64 {
    0.6
}

fn default_delta() -> f64 {
    0.3
}

fn default_petals() -> u32 {
    5
}

fn default_amplitude() -> f64 {
    0.3
}

impl Generator {
    pub fn label(&self) -> &'static str {
        match self {
            Generator::Circle { .. } => "circle",
            Generator::Ellipse { .. } => "ellipse",
            Generator::NonuniformEllipse { .. } => "nonuniform_ellipse",
            Generator::Dumbbell { .. } => "dumbbell",
            Generator::Star { .. } => "star",
            Generator::File { .. } => "file",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(field, "must be positive and finite"))
            }
        };
        match *self {
            Generator::Circle { r0 } => positive("scenario.R0", r0),
            Generator::Ellipse { a, b } => {
                positive("scenario.a", a)?;
                positive("scenario.b", b)
            }
            Generator::NonuniformEllipse { a, b, gamma } => {
                positive("scenario.a", a)?;
                positive("scenario.b", b)?;
                if gamma.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::validation("scenario.gamma", "must satisfy |gamma| < 1"))
                }
            }
            Generator::Dumbbell { delta } => {
                positive("scenario.delta", delta)?;
                if delta < 2.0 {
                    Ok(())
                } else {
                    Err(Error::validation("scenario.delta", "must be < 2 for a waisted curve"))
                }
            }
            Generator::Star { petals, amplitude } => {
                if petals < 2 {
                    return Err(Error::validation("scenario.petals", "must be >= 2"));
                }
                if (0.0..1.0).contains(&amplitude) {
                    Ok(())
                } else {
                    Err(Error::validation("scenario.amplitude", "must lie in [0, 1)"))
                }
            }
            Generator::File { .. } => Ok(()),
        }
    }

    /// Builds the initial curve with `n` nodes, counterclockwise.
    pub fn build(&self, n: usize) -> Result<PlanarCurve> {
        self.validate()?;
        if n < MIN_SIM_NODES {
            return Err(Error::validation("n", format!("must be >= {MIN_SIM_NODES}")));
        }
        match *self {
            Generator::Circle { r0 } => parametric(n, |u| Point::from_angle(TAU * u) * r0),
            Generator::Ellipse { a, b } => parametric(n, |u| ellipse_point(a, b, TAU * u)),
            Generator::NonuniformEllipse { a, b, gamma } => {
                parametric(n, |u| ellipse_point(a, b, TAU * u + gamma * (TAU * u).sin()))
            }
            Generator::Dumbbell { delta } => {
                let q4 = (1.0 + 0.25 * delta * delta).powi(2);
                let fine = parametric(fine_count(n), |u| {
                    let phi = TAU * u;
                    let c = (2.0 * phi).cos();
                    let r2 = c + (c * c + q4 - 1.0).sqrt();
                    Point::from_angle(phi) * r2.sqrt()
                })?;
                resample_uniform(&fine, n)
            }
            Generator::Star { petals, amplitude } => {
                let fine = parametric(fine_count(n), |u| {
                    let phi = TAU * u;
                    Point::from_angle(phi) * (1.0 + amplitude * (petals as f64 * phi).cos())
                })?;
                resample_uniform(&fine, n)
            }
            Generator::File { ref path } => {
                let curve = crate::output::read_curve_csv(path)?;
                resample_uniform(&curve, n)
            }
        }
    }
}

fn fine_count(n: usize) -> usize {
    (64 * n).max(20_000)
}

fn ellipse_point(a: f64, b: f64, phi: f64) -> Point {
    Point::new(a * phi.cos(), b * phi.sin())
}

fn parametric(n: usize, f: impl Fn(f64) -> Point) -> Result<PlanarCurve> {
    PlanarCurve::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
}

/// Named initial curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub generator: Generator,
}

impl Scenario {
    pub fn new(generator: Generator) -> Self {
        Scenario {
            name: generator.label().to_string(),
            generator,
        }
    }

    pub fn initial_curve(&self, n: usize) -> Result<PlanarCurve> {
        self.generator.build(n)
    }
}
