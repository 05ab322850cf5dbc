//! Run configuration files.
//!
//! A configuration is a JSON object. Besides the canonical form produced by
//! [`RunConfig::echo`], a few shorthands are accepted:
//!
//! ```json
//! {"scenario": "circle", "R0": 1, "model": "mcf", "strategy": "rll",
//!  "n": 200, "tau": 1e-4, "t_end": 0.25}
//! ```
//!
//! * `scenario` may be a generator name, with its parameters given at the
//!   top level;
//! * `model` may be `"mcf"` or `"affine"` (power law with `sigma = 1/3`);
//! * `strategy` may be `"zero"`, `"rll"`, `"au"` or `"asymptotic"`. Missing
//!   `kappa1`, `kappa2` default to `10 / t_end` and `10`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::PlanarCurve;
use crate::model::VelocityModel;
use crate::redistribution::RedistributionStrategy;
use crate::scenario::{Generator, Scenario};
use crate::solver::{SolverConfig, StopCriteria, DEFAULT_RESYNC_TOL};

pub const DEFAULT_SNAPSHOT_EVERY: usize = 100;

const GENERATOR_KEYS: [&str; 8] = ["R0", "a", "b", "gamma", "delta", "petals", "amplitude", "path"];

fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

fn default_resync_tol() -> f64 {
    DEFAULT_RESYNC_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Generator,
    pub model: VelocityModel,
    pub strategy: RedistributionStrategy,
    pub n: usize,
    pub tau: f64,
    pub t_end: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub stop: StopCriteria,
    #[serde(default = "default_resync_tol")]
    pub resync_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_ratio: Option<f64>,
}

impl RunConfig {
    pub fn new(scenario: Generator, model: VelocityModel, strategy: RedistributionStrategy, n: usize, tau: f64, t_end: f64) -> Self {
        RunConfig {
            scenario,
            model,
            strategy,
            n,
            tau,
            t_end,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            stop: StopCriteria::default(),
            resync_tol: DEFAULT_RESYNC_TOL,
            tau_ratio: None,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tau: self.tau,
            t_end: self.t_end,
            model: self.model.clone(),
            strategy: self.strategy,
            stop: self.stop,
            resync_tol: self.resync_tol,
            snapshot_every: self.snapshot_every,
            tau_ratio: self.tau_ratio,
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.scenario.clone())
    }

    pub fn initial_curve(&self) -> Result<PlanarCurve> {
        self.scenario.build(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n < crate::scenario::MIN_SIM_NODES {
            return Err(Error::validation(
                "n",
                format!("must be >= {}", crate::scenario::MIN_SIM_NODES),
            ));
        }
        self.solver_config().validate()
    }

    /// Canonical JSON with all defaults filled in; parses back to `self`.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_value(value)
}

/// Normalizes shorthands, deserializes and validates.
pub fn from_value(value: Value) -> Result<RunConfig> {
    let Value::Object(mut obj) = value else {
        return Err(Error::validation("config", "must be a JSON object"));
    };
    normalize(&mut obj)?;
    let config: RunConfig = serde_path_to_error::deserialize(Value::Object(obj)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        Error::Validation {
            field: field_name(&path, &message),
            message,
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Picks the offending key out of serde's messages for unknown and missing
/// fields, which report the path of the enclosing object.
fn field_name(path: &str, message: &str) -> String {
    let quoted = ["unknown field `", "missing field `"]
        .iter()
        .find_map(|p| message.strip_prefix(p))
        .and_then(|rest| rest.split('`').next());
    match (path, quoted) {
        (".", Some(key)) => key.to_string(),
        (p, Some(key)) if p == key || p.ends_with(&format!(".{key}")) => p.to_string(),
        (p, Some(key)) => format!("{p}.{key}"),
        (p, None) => p.to_string(),
    }
}

fn normalize(obj: &mut Map<String, Value>) -> Result<()> {
    if let Some(Value::String(name)) = obj.get("scenario").cloned() {
        let mut gen = Map::new();
        gen.insert("name".into(), Value::String(name));
        for key in GENERATOR_KEYS {
            if let Some(v) = obj.remove(key) {
                gen.insert(key.into(), v);
            }
        }
        obj.insert("scenario".into(), Value::Object(gen));
    }

    if let Some(Value::String(name)) = obj.get("model").cloned() {
        let model = match name.as_str() {
            "mcf" => VelocityModel::MeanCurvature,
            "affine" => VelocityModel::affine(),
            other => {
                return Err(Error::validation(
                    "model",
                    format!("unknown shorthand `{other}`; use \"mcf\", \"affine\" or an object"),
                ))
            }
        };
        obj.insert("model".into(), serde_json::to_value(model).expect("model serializes"));
    }

    let strategy = match obj.get("strategy").cloned() {
        Some(Value::String(kind)) => {
            let mut m = Map::new();
            m.insert("kind".into(), Value::String(kind));
            Some(m)
        }
        Some(Value::Object(m)) => Some(m),
        _ => None,
    };
    if let Some(mut m) = strategy {
        if m.get("kind").and_then(Value::as_str) == Some("au") {
            m.insert("kind".into(), Value::String("asymptotic".into()));
        }
        if m.get("kind").and_then(Value::as_str) == Some("asymptotic") {
            let t_end = obj.get("t_end").and_then(Value::as_f64).unwrap_or(0.0);
            if let RedistributionStrategy::AsymptoticallyUniform { kappa1, kappa2 } =
                RedistributionStrategy::asymptotic_for(t_end)
            {
                m.entry("kappa1").or_insert(Value::from(kappa1));
                m.entry("kappa2").or_insert(Value::from(kappa2));
            }
        }
        obj.insert("strategy".into(), Value::Object(m));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"scenario":"circle","R0":1,"model":"mcf","strategy":"rll","n":200,"tau":1e-4,"t_end":0.25}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.scenario, Generator::Circle { r0: 1.0 });
        assert_eq!(c.model, VelocityModel::MeanCurvature);
        assert_eq!(c.strategy, RedistributionStrategy::RelativeLocalLength);
        assert_eq!(c.snapshot_every, DEFAULT_SNAPSHOT_EVERY);
        assert_eq!(c.stop, StopCriteria::default());
        assert_eq!(c.resync_tol, DEFAULT_RESYNC_TOL);
        let echo: Value = serde_json::from_str(&c.echo()).unwrap();
        assert_eq!(echo["stop"]["L_min"], 1e-2);
        assert_eq!(echo["scenario"]["name"], "circle");
    }

    #[test]
    fn echo_round_trips() {
        let texts = [
            MINIMAL,
            r#"{"scenario":{"name":"nonuniform_ellipse","a":2,"b":1,"gamma":0.6},"model":"affine",
                "strategy":"au","n":64,"tau":1e-4,"t_end":0.3,"stop":{"ratio_max":10},"tau_ratio":0.5}"#,
            r#"{"scenario":"star","petals":4,"model":{"kind":"anisotropic",
                "a":{"type":"harmonic","base":1,"delta":0.2,"m":4},"c":{"type":"constant","value":0.1}},
                "strategy":{"kind":"asymptotic","kappa1":3,"kappa2":0},"n":32,"tau":1e-3,"t_end":1}"#,
        ];
        for text in texts {
            let c = parse_config_str(text).unwrap();
            assert_eq!(parse_config_str(&c.echo()).unwrap(), c);
        }
    }

    #[test]
    fn au_defaults_follow_t_end() {
        let c = parse_config_str(&MINIMAL.replace("\"rll\"", "\"au\"")).unwrap();
        assert_eq!(
            c.strategy,
            RedistributionStrategy::AsymptoticallyUniform { kappa1: 40.0, kappa2: 10.0 }
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_config_str("{\n  \"n\": 12,\n  \"tau\": ]\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    fn invalid_field(text: &str) -> String {
        match parse_config_str(text) {
            Err(Error::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        assert_eq!(invalid_field(&MINIMAL.replace("1e-4", "-1")), "tau");
        assert_eq!(invalid_field(&MINIMAL.replace("200", "8")), "n");
        assert_eq!(invalid_field(&MINIMAL.replace("\"R0\":1", "\"R0\":-1")), "scenario.R0");
        assert_eq!(invalid_field(&MINIMAL.replace("\"n\"", "\"bogus\":1,\"n\"")), "bogus");
        assert_eq!(
            invalid_field(&MINIMAL.replace("\"n\"", "\"stop\":{\"k_maxx\":1},\"n\"")),
            "stop.k_maxx"
        );
        assert_eq!(invalid_field(&MINIMAL.replace("\"n\":200,", "")), "n");
        assert_eq!(invalid_field(&MINIMAL.replace("\"mcf\"", "\"fast\"")), "model");
        assert_eq!(invalid_field(&MINIMAL.replace("\"n\":200", "\"n\":\"many\"")), "n");
        assert_eq!(invalid_field("[1, 2]"), "config");
    }
}
