//! Run configuration: a TOML file with sections `[model]`, `[warp]`,
//! `[weight]` and `[run]`. Unknown keys are rejected and parse errors carry
//! the line and column of the offending key.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    default_matrix, Boundary, RadialWarp, WarpedProductModel, Weight, WeightedModel,
};

/// Suites in dependency order: curvature before anything needing `K`,
/// eigenvalues before the heat kernel.
pub const SUITES: [&str; 12] = [
    "curvature",
    "prop31",
    "comparison",
    "volume",
    "eigs",
    "collapse",
    "heat",
    "bounds",
    "liyau",
    "harnack",
    "weyl",
    "lp-cert",
];

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub radius: f64,
    #[serde(default = "default_bc")]
    pub bc: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "all_suites")]
    pub suites: Vec<String>,
    /// Run on the default matrix (3 warps × 4 weights × n ∈ {1, 2, 3})
    /// instead of the `[model]` section.
    #[serde(default)]
    pub matrix: bool,
    /// Seed for sample-plan shuffling only.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Radial cells of the operator grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Tolerance of the identity checks.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// The `(4+δ)` parameter of the Gaussian bounds.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub svg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            suites: all_suites(),
            matrix: false,
            seed: default_seed(),
            grid: default_grid(),
            tol: default_tol(),
            delta: default_delta(),
            svg: false,
            out: None,
        }
    }
}

fn default_q() -> usize {
    1
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_bc() -> Boundary {
    Boundary::Dirichlet
}
fn all_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}
fn default_seed() -> u64 {
    7
}
fn default_grid() -> usize {
    400
}
fn default_tol() -> f64 {
    1e-8
}
fn default_delta() -> f64 {
    1.0
}

/// Parsed configuration. Serializing it back yields the resolved form with
/// every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<FamilySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<FamilySection>,
    #[serde(default)]
    pub run: RunSection,
}

/// One model a run iterates over, with its fiber data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCase {
    pub model: WeightedModel,
    pub q: usize,
    pub epsilon: f64,
}

impl ModelCase {
    pub fn product(&self) -> Result<WarpedProductModel> {
        WarpedProductModel::new(self.model.clone(), self.q, self.epsilon)
    }

    pub fn label(&self) -> String {
        format!("{} q={} eps={}", self.model.label(), self.q, self.epsilon)
    }
}

impl RunConfig {
    /// Parse and validate. TOML errors keep the crate's line-anchored
    /// message (`TOML parse error at line L, column C`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.normalize()?;
        cfg.cases()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Configuration used when no file is given: the default matrix.
    pub fn default_matrix() -> Self {
        Self {
            model: None,
            warp: None,
            weight: None,
            run: RunSection {
                matrix: true,
                ..RunSection::default()
            },
        }
    }

    /// Sort suites into dependency order and reject unknown names, empty
    /// selections and nonpositive numerics.
    pub fn normalize(&mut self) -> Result<()> {
        for s in &self.run.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "unknown suite `{s}`; expected one of {}",
                    SUITES.join(", ")
                )));
            }
        }
        let mut ordered: Vec<String> = SUITES
            .iter()
            .filter(|s| self.run.suites.iter().any(|x| x == *s))
            .map(|s| s.to_string())
            .collect();
        ordered.dedup();
        if ordered.is_empty() {
            return Err(Error::Config("no suites selected".into()));
        }
        self.run.suites = ordered;
        if self.run.grid < crate::operator::MIN_CELLS {
            return Err(Error::Config(format!(
                "grid must be at least {} cells, got {}",
                crate::operator::MIN_CELLS,
                self.run.grid
            )));
        }
        if !(self.run.tol > 0.0 && self.run.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.run.tol
            )));
        }
        if !(self.run.delta > 0.0 && self.run.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.run.delta
            )));
        }
        if self.model.is_none() && !self.run.matrix {
            return Err(Error::Config(
                "missing [model] section (or set run.matrix = true)".into(),
            ));
        }
        if self.model.is_none() && (self.warp.is_some() || self.weight.is_some()) {
            return Err(Error::Config(
                "[warp] and [weight] need a [model] section".into(),
            ));
        }
        Ok(())
    }

    /// Models selected by the configuration.
    pub fn cases(&self) -> Result<Vec<ModelCase>> {
        if self.run.matrix {
            let (radius, bc, q, epsilon) = match &self.model {
                Some(m) => (m.radius, m.bc, m.q, m.epsilon),
                None => (10.0, Boundary::Dirichlet, default_q(), default_epsilon()),
            };
            let mut cases = Vec::new();
            for n in 1..=3 {
                for model in default_matrix(n, radius, bc).map_err(config_error)? {
                    cases.push(ModelCase { model, q, epsilon });
                }
            }
            return Ok(cases);
        }
        let m = self.model.as_ref().expect("checked in normalize");
        let warp = match &self.warp {
            Some(w) => RadialWarp::from_parts(&w.family, &w.params),
            None => Ok(RadialWarp::Euclidean),
        }
        .map_err(config_error)?;
        let weight = match &self.weight {
            Some(w) => Weight::from_parts(&w.family, &w.params),
            None => Ok(Weight::Zero),
        }
        .map_err(config_error)?;
        let model = WeightedModel::new(m.n, warp, weight, m.radius, m.bc).map_err(config_error)?;
        WarpedProductModel::new(model.clone(), m.q, m.epsilon).map_err(config_error)?;
        Ok(vec![ModelCase {
            model,
            q: m.q,
            epsilon: m.epsilon,
        }])
    }

    /// Resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// JSON schema of the configuration file.
pub fn config_schema() -> serde_json::Value {
    let family = |names: &[&str]| {
        serde_json::json!({
            "type": "object",
            "additionalProperties": false,
            "required": ["family"],
            "properties": {
                "family": {"enum": names},
                "params": {"type": "array", "items": {"type": "number"}}
            }
        })
    };
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "driftlab run configuration (TOML)",
        "schema_version": SCHEMA_VERSION,
        "type": "object",
        "additionalProperties": false,
        "properties": {
            "model": {
                "type": "object",
                "additionalProperties": false,
                "required": ["n", "radius"],
                "properties": {
                    "n": {"type": "integer", "minimum": 1},
                    "q": {"type": "integer", "minimum": 1, "default": default_q()},
                    "epsilon": {"type": "number", "exclusiveMinimum": 0, "default": default_epsilon()},
                    "radius": {"type": "number", "exclusiveMinimum": 0},
                    "bc": {"enum": ["dirichlet", "neumann"], "default": "dirichlet"}
                }
            },
            "warp": family(&["euclidean", "hyperbolic", "tabulated"]),
            "weight": family(&["zero", "quadratic", "log_poly", "linear_asymptotic", "tabulated"]),
            "run": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "suites": {"type": "array", "items": {"enum": SUITES}},
                    "matrix": {"type": "boolean", "default": false},
                    "seed": {"type": "integer", "minimum": 0, "default": default_seed()},
                    "grid": {"type": "integer", "minimum": crate::operator::MIN_CELLS, "default": default_grid()},
                    "tol": {"type": "number", "exclusiveMinimum": 0, "default": default_tol()},
                    "delta": {"type": "number", "exclusiveMinimum": 0, "default": default_delta()},
                    "svg": {"type": "boolean", "default": false},
                    "out": {"type": "string"}
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[model]
n = 2
q = 1
epsilon = 0.5
radius = 10.0
bc = "dirichlet"

[warp]
family = "euclidean"

[weight]
family = "log_poly"
params = [1.0]

[run]
suites = ["heat", "prop31"]
"#;

    #[test]
    fn parses_and_orders_suites() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.run.suites, vec!["prop31", "heat"]);
        assert_eq!(cfg.cases().unwrap().len(), 1);
        assert_eq!(cfg.run.seed, 7);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_toml(), again.to_toml());
    }

    #[test]
    fn missing_n_is_line_anchored() {
        let text = "[model]\nradius = 4.0\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        assert!(err.contains("missing field `n`"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[model]\nn = 2\nradius = 4.0\ncolour = 3\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("colour"), "{err}");
        assert!(
            RunConfig::parse("[model]\nn = 2\nradius = 4.0\n[run]\nsuites = [\"nope\"]\n").is_err()
        );
    }

    #[test]
    fn invalid_model_is_a_config_error() {
        let text =
            "[model]\nn = 2\nradius = 4.0\n[warp]\nfamily = \"hyperbolic\"\nparams = [-1.0]\n";
        assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))));
    }
}
