//! Built-in model catalog with family parameter schemas and evaluated
//! properties.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    asymptotic_nonnegativity_profile, classify_volume_growth, curvature_bound, GrowthClass,
};
use crate::model::{Boundary, RadialWarp, Weight, WeightedModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySchema {
    /// `warp` or `weight`.
    pub section: &'static str,
    pub family: &'static str,
    pub formula: &'static str,
    pub params: Vec<ParamSchema>,
}

const fn p(name: &'static str, constraint: &'static str) -> ParamSchema {
    ParamSchema { name, constraint }
}

pub fn family_schemas() -> Vec<FamilySchema> {
    let fam = |section, family, formula, params| FamilySchema {
        section,
        family,
        formula,
        params,
    };
    vec![
        fam("warp", "euclidean", "phi = r", vec![]),
        fam(
            "warp",
            "hyperbolic",
            "phi = sinh(a r) / a",
            vec![p("a", "> 0")],
        ),
        fam(
            "warp",
            "tabulated",
            "cubic spline through samples, phi(0) = 0, phi'(0) = 1",
            vec![
                p("spacing", "> 0"),
                p(
                    "samples...",
                    "phi(k spacing), k = 0, 1, ...; positive after k = 0",
                ),
            ],
        ),
        fam("weight", "zero", "f = 0", vec![]),
        fam("weight", "quadratic", "f = c r^2", vec![p("c", "finite")]),
        fam(
            "weight",
            "log_poly",
            "f = c log(1 + r^2)",
            vec![p("c", "finite")],
        ),
        fam(
            "weight",
            "linear_asymptotic",
            "f = c sqrt(1 + r^2)",
            vec![p("c", "finite")],
        ),
        fam(
            "weight",
            "tabulated",
            "cubic spline through samples with f'(0) = 0",
            vec![
                p("spacing", "> 0"),
                p("samples...", "f(k spacing), k = 0, 1, ..."),
            ],
        ),
    ]
}

/// A named model of the catalog.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Warp at a given domain radius (tabulated profiles depend on it).
    pub warp: fn(f64) -> Result<RadialWarp>,
    pub weight: Weight,
}

impl CatalogEntry {
    pub fn model(&self, n: usize, radius: f64, bc: Boundary) -> Result<WeightedModel> {
        WeightedModel::new(n, (self.warp)(radius)?, self.weight.clone(), radius, bc)
    }
}

fn euclidean(_: f64) -> Result<RadialWarp> {
    Ok(RadialWarp::Euclidean)
}

fn hyperbolic(_: f64) -> Result<RadialWarp> {
    RadialWarp::hyperbolic(1.0)
}

pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name, description, warp, weight| CatalogEntry {
        name,
        description,
        warp,
        weight,
    };
    vec![
        entry(
            "flat",
            "Euclidean space, unweighted",
            euclidean as fn(f64) -> Result<RadialWarp>,
            Weight::Zero,
        ),
        entry(
            "gaussian",
            "Euclidean space with Gaussian weight f = r^2/2",
            euclidean,
            Weight::Quadratic { c: 0.5 },
        ),
        entry(
            "log-weighted",
            "Euclidean space with f = log(1 + r^2)",
            euclidean,
            Weight::LogPoly { c: 1.0 },
        ),
        entry(
            "linear-drift",
            "Euclidean space with f = sqrt(1 + r^2)",
            euclidean,
            Weight::LinearAsymptotic { c: 1.0 },
        ),
        entry(
            "hyperbolic",
            "hyperbolic space of curvature -1, unweighted",
            hyperbolic,
            Weight::Zero,
        ),
        entry(
            "hyperbolic-drift",
            "hyperbolic space with f = sqrt(1 + r^2)",
            hyperbolic,
            Weight::LinearAsymptotic { c: 1.0 },
        ),
        entry(
            "cone",
            "tabulated warp bending to a cone",
            RadialWarp::cone_profile,
            Weight::Zero,
        ),
        entry(
            "cone-log",
            "tabulated cone warp with f = log(1 + r^2)",
            RadialWarp::cone_profile,
            Weight::LogPoly { c: 1.0 },
        ),
    ]
}

/// Property names accepted by [`has_property`].
pub const PROPERTIES: [&str; 5] = [
    "asymptotically-nonnegative",
    "nonnegative-curvature",
    "subexponential",
    "exponential",
    "finite-volume",
];

/// Properties of a catalog model evaluated at a reference instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogProperties {
    pub n: usize,
    pub q: usize,
    pub radius: f64,
    pub curvature_bound: f64,
    pub deficit_tail: f64,
    pub asymptotically_nonnegative: bool,
    pub growth: GrowthClass,
}

/// Reference instance for property evaluation. The radius is that of the
/// Weyl probe: a deficit decaying like `r^{-2}` only drops below
/// the `1e-3` threshold far out.
pub const REFERENCE_N: usize = 2;
pub const REFERENCE_Q: usize = 1;
pub const REFERENCE_RADIUS: f64 = 170.0;

pub fn evaluate(entry: &CatalogEntry) -> Result<CatalogProperties> {
    let model = entry.model(REFERENCE_N, REFERENCE_RADIUS, Boundary::Dirichlet)?;
    let profile = asymptotic_nonnegativity_profile(&model, REFERENCE_Q)?;
    let grid: Vec<f64> = (0..24)
        .map(|i| 0.5 * (2.0 * REFERENCE_RADIUS).powf(i as f64 / 23.0))
        .collect();
    let growth = classify_volume_growth(&model, &[0.05, 0.1, 0.2, 0.5], &grid)?.class;
    Ok(CatalogProperties {
        n: REFERENCE_N,
        q: REFERENCE_Q,
        radius: REFERENCE_RADIUS,
        curvature_bound: curvature_bound(
            &model,
            REFERENCE_Q,
            crate::geometry::DEFAULT_CURVATURE_GRID,
        )?,
        deficit_tail: profile.tail,
        asymptotically_nonnegative: profile.nonnegative,
        growth,
    })
}

pub fn has_property(props: &CatalogProperties, property: &str) -> Result<bool> {
    Ok(match property {
        "asymptotically-nonnegative" => props.asymptotically_nonnegative,
        "nonnegative-curvature" => props.curvature_bound == 0.0,
        "subexponential" => props.growth == GrowthClass::Subexponential,
        "exponential" => props.growth == GrowthClass::Exponential,
        "finite-volume" => props.growth == GrowthClass::Finite,
        other => {
            return Err(Error::Config(format!(
                "unknown property `{other}`; expected one of {}",
                PROPERTIES.join(", ")
            )))
        }
    })
}

/// Catalog as JSON: family schemas plus every entry with its evaluated
/// properties, optionally filtered by a property.
pub fn catalog_json(filter: Option<&str>) -> Result<serde_json::Value> {
    let mut models = Vec::new();
    for entry in catalog() {
        let props = evaluate(&entry)?;
        if let Some(f) = filter {
            if !has_property(&props, f)? {
                continue;
            }
        }
        let model = entry.model(REFERENCE_N, REFERENCE_RADIUS, Boundary::Dirichlet)?;
        let warp_params = match &model.warp {
            RadialWarp::Tabulated(_) => serde_json::json!("radius-dependent samples"),
            w => serde_json::json!(w.params()),
        };
        models.push(serde_json::json!({
            "name": entry.name,
            "description": entry.description,
            "warp": {"family": model.warp.family(), "params": warp_params},
            "weight": {"family": model.weight.family(), "params": model.weight.params()},
            "properties": props,
        }));
    }
    Ok(serde_json::json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "families": family_schemas(),
        "properties": PROPERTIES,
        "models": models,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_filter_selects_expected_models() {
        let all = catalog_json(None).unwrap();
        assert!(all["models"].as_array().unwrap().len() >= 5);
        let nonneg = catalog_json(Some("asymptotically-nonnegative")).unwrap();
        let names: Vec<&str> = nonneg["models"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| m["name"].as_str().unwrap())
            .collect();
        // f = log(1+r²): Ric_f^q → 0; f = r²/2 and hyperbolic space stay negative
        assert!(names.contains(&"flat") && names.contains(&"log-weighted"));
        assert!(!names.contains(&"gaussian") && !names.contains(&"hyperbolic"));
        assert!(catalog_json(Some("bogus")).is_err());
    }
}
