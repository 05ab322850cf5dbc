//! Normal velocity laws `beta(x, k, nu)` and their partial derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

pub const DEFAULT_POWER_EPS: f64 = 1e-4;

fn default_eps() -> f64 {
    DEFAULT_POWER_EPS
}

/// Closed-form scalar fields `f(x, nu)` used as anisotropy coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropyField {
    Constant { value: f64 },
    /// `base + delta * cos(m * nu)`
    Harmonic { base: f64, delta: f64, m: u32 },
    /// `base + gx * x + gy * y`
    Ramp { base: f64, gx: f64, gy: f64 },
}

impl AnisotropyField {
    pub fn value(&self, x: Point, nu: f64) -> f64 {
        match *self {
            AnisotropyField::Constant { value } => value,
            AnisotropyField::Harmonic { base, delta, m } => base + delta * (m as f64 * nu).cos(),
            AnisotropyField::Ramp { base, gx, gy } => base + gx * x.x + gy * x.y,
        }
    }

    pub fn d_nu(&self, nu: f64) -> f64 {
        match *self {
            AnisotropyField::Harmonic { delta, m, .. } => {
                let m = m as f64;
                -delta * m * (m * nu).sin()
            }
            _ => 0.0,
        }
    }

    pub fn grad_x(&self) -> Point {
        match *self {
            AnisotropyField::Ramp { gx, gy, .. } => Point::new(gx, gy),
            _ => Point::ZERO,
        }
    }

    /// Lower bound over all `nu`, if the field does not depend on position.
    fn lower_bound(&self) -> Option<f64> {
        match *self {
            AnisotropyField::Constant { value } => Some(value),
            AnisotropyField::Harmonic { base, delta, .. } => Some(base - delta.abs()),
            AnisotropyField::Ramp { .. } => None,
        }
    }
}

/// Normal velocity law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ModelRepr", into = "ModelRepr")]
pub enum VelocityModel {
    /// `beta = k`
    MeanCurvature,
    /// Odd, regularized power law `sign(k) ((|k| + eps)^sigma - eps^sigma)`.
    PowerLaw { sigma: f64, eps: f64 },
    /// `beta = a(x, nu) k + c(x, nu)`
    AnisotropicLinear { a: AnisotropyField, c: AnisotropyField },
}

// Serde ignores unknown keys on unit variants of internally tagged enums,
// so the wire form uses struct variants only.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum ModelRepr {
    #[serde(rename = "mcf")]
    MeanCurvature {},
    #[serde(rename = "power")]
    PowerLaw {
        sigma: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    #[serde(rename = "anisotropic")]
    AnisotropicLinear { a: AnisotropyField, c: AnisotropyField },
}

impl From<ModelRepr> for VelocityModel {
    fn from(r: ModelRepr) -> Self {
        match r {
            ModelRepr::MeanCurvature {} => VelocityModel::MeanCurvature,
            ModelRepr::PowerLaw { sigma, eps } => VelocityModel::PowerLaw { sigma, eps },
            ModelRepr::AnisotropicLinear { a, c } => VelocityModel::AnisotropicLinear { a, c },
        }
    }
}

impl From<VelocityModel> for ModelRepr {
    fn from(m: VelocityModel) -> Self {
        match m {
            VelocityModel::MeanCurvature => ModelRepr::MeanCurvature {},
            VelocityModel::PowerLaw { sigma, eps } => ModelRepr::PowerLaw { sigma, eps },
            VelocityModel::AnisotropicLinear { a, c } => ModelRepr::AnisotropicLinear { a, c },
        }
    }
}

/// `(beta'_k, beta'_nu, grad_x beta)` at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    pub dk: f64,
    pub dnu: f64,
    pub dx: Point,
}

impl VelocityModel {
    pub fn affine() -> Self {
        VelocityModel::PowerLaw {
            sigma: 1.0 / 3.0,
            eps: DEFAULT_POWER_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VelocityModel::MeanCurvature => Ok(()),
            VelocityModel::PowerLaw { sigma, eps } => {
                if !(*sigma > 0.0 && *sigma <= 1.0) {
                    return Err(Error::validation("model.sigma", "must lie in (0, 1]"));
                }
                if !(*eps >= 0.0 && eps.is_finite()) {
                    return Err(Error::validation("model.eps", "must be finite and >= 0"));
                }
                Ok(())
            }
            // position-dependent coefficients are checked where they are evaluated
            VelocityModel::AnisotropicLinear { a, .. } => match a.lower_bound() {
                Some(lo) if !(lo > 0.0) => Err(Error::validation(
                    "model.a",
                    "coefficient must stay strictly positive",
                )),
                _ => Ok(()),
            },
        }
    }

    pub fn beta(&self, x: Point, k: f64, nu: f64) -> f64 {
        match self {
            VelocityModel::MeanCurvature => k,
            VelocityModel::PowerLaw { sigma, eps } => {
                if *sigma == 1.0 {
                    return k;
                }
                let mag = (k.abs() + eps).powf(*sigma) - eps.powf(*sigma);
                mag.copysign(k)
            }
            VelocityModel::AnisotropicLinear { a, c } => a.value(x, nu) * k + c.value(x, nu),
        }
    }

    pub fn partials(&self, x: Point, k: f64, nu: f64) -> Result<Partials> {
        match self {
            VelocityModel::MeanCurvature => Ok(Partials {
                dk: 1.0,
                dnu: 0.0,
                dx: Point::ZERO,
            }),
            VelocityModel::PowerLaw { sigma, eps } => {
                if *sigma == 1.0 {
                    return VelocityModel::MeanCurvature.partials(x, k, nu);
                }
                let base = k.abs() + eps;
                if base == 0.0 {
                    return Err(Error::SingularDerivative);
                }
                Ok(Partials {
                    dk: sigma * base.powf(sigma - 1.0),
                    dnu: 0.0,
                    dx: Point::ZERO,
                })
            }
            VelocityModel::AnisotropicLinear { a, c } => Ok(Partials {
                dk: a.value(x, nu),
                dnu: a.d_nu(nu) * k + c.d_nu(nu),
                dx: a.grad_x() * k + c.grad_x(),
            }),
        }
    }
}

pub fn beta(model: &VelocityModel, x: Point, k: f64, nu: f64) -> f64 {
    model.beta(x, k, nu)
}

pub fn beta_partials(model: &VelocityModel, x: Point, k: f64, nu: f64) -> Result<Partials> {
    model.partials(x, k, nu)
}
