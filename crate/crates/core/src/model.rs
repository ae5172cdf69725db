//! Rotationally symmetric weighted models `dr² + φ(r)² g_{S^{n-1}}` with
//! measure `e^{-f} dv`, and their warped products with a round `S^q` fiber.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{Parity, UniformSpline};

/// A radial function together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Dirichlet => write!(f, "dirichlet"),
            Boundary::Neumann => write!(f, "neumann"),
        }
    }
}

/// Warp `φ` of the base metric.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialWarp {
    /// `φ = r`
    Euclidean,
    /// `φ = sinh(a r) / a`
    Hyperbolic { a: f64 },
    /// Odd spline through samples on a uniform grid, projected onto
    /// `φ(0) = 0`, `φ'(0) = 1`.
    Tabulated(TabulatedWarp),
}

impl RadialWarp {
    pub fn hyperbolic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "hyperbolic warp needs a > 0, got {a}"
            )));
        }
        Ok(Self::Hyperbolic { a })
    }

    pub fn tabulated(spacing: f64, samples: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedWarp::new(spacing, samples)?))
    }

    /// Samples of `0.8 tanh(r) + 0.2 r` (asymptotically a cone of slope 0.2)
    /// covering `[0, radius]`.
    pub fn cone_profile(radius: f64) -> Result<Self> {
        let spacing = 0.05;
        let m = (radius / spacing).ceil() as usize + 1;
        let samples = (0..m)
            .map(|i| {
                let r = i as f64 * spacing;
                0.8 * r.tanh() + 0.2 * r
            })
            .collect();
        Self::tabulated(spacing, samples)
    }

    pub fn family(&self) -> &'static str {
        match self {
            RadialWarp::Euclidean => "euclidean",
            RadialWarp::Hyperbolic { .. } => "hyperbolic",
            RadialWarp::Tabulated(_) => "tabulated",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            RadialWarp::Euclidean => vec![],
            RadialWarp::Hyperbolic { a } => vec![*a],
            RadialWarp::Tabulated(t) => {
                let mut p = vec![t.spline.spacing()];
                p.extend_from_slice(t.spline.samples());
                p
            }
        }
    }

    pub fn from_parts(family: &str, params: &[f64]) -> Result<Self> {
        match family {
            "euclidean" => {
                expect_params(family, params, 0)?;
                Ok(Self::Euclidean)
            }
            "hyperbolic" => {
                expect_params(family, params, 1)?;
                Self::hyperbolic(params[0])
            }
            "tabulated" => {
                if params.len() < 5 {
                    return Err(Error::InvalidModel(
                        "tabulated warp params are [spacing, v0, v1, v2, v3, ...]".into(),
                    ));
                }
                Self::tabulated(params[0], params[1..].to_vec())
            }
            other => Err(Error::InvalidModel(format!(
                "unknown warp family `{other}`"
            ))),
        }
    }

    pub fn jet(&self, r: f64) -> Result<Jet> {
        match self {
            RadialWarp::Euclidean => Ok(Jet::new(r, 1.0, 0.0)),
            RadialWarp::Hyperbolic { a } => {
                let s = (a * r).sinh();
                Ok(Jet::new(s / a, (a * r).cosh(), a * s))
            }
            RadialWarp::Tabulated(t) => t.jet(r),
        }
    }

    /// Largest radius on which the warp is defined.
    pub fn extent(&self) -> f64 {
        match self {
            RadialWarp::Tabulated(t) => t.spline.end(),
            _ => f64::INFINITY,
        }
    }
}

/// Odd cubic spline plus a localized odd correction `c r e^{-(r/ℓ)²}` that
/// pins the slope at the pole to 1 without touching `φ(0)` or `φ''(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedWarp {
    spline: UniformSpline,
    slope_fix: f64,
    width: f64,
}

impl TabulatedWarp {
    pub fn new(spacing: f64, samples: Vec<f64>) -> Result<Self> {
        let spline = UniformSpline::reflected(spacing, samples, Parity::Odd)?;
        let slope = spline.eval(0.0)?[1];
        Ok(Self {
            spline,
            slope_fix: 1.0 - slope,
            width: 2.0 * spacing,
        })
    }

    /// Correction coefficient applied to reach `φ'(0) = 1`.
    pub fn slope_fix(&self) -> f64 {
        self.slope_fix
    }

    fn jet(&self, r: f64) -> Result<Jet> {
        let [v, d1, d2] = self.spline.eval(r)?;
        let u = (r / self.width).powi(2);
        let e = (-u).exp();
        let c = self.slope_fix;
        Ok(Jet::new(
            v + c * r * e,
            d1 + c * e * (1.0 - 2.0 * u),
            d2 + c * e * r / (self.width * self.width) * (4.0 * u - 6.0),
        ))
    }
}

/// Weight `f` of the measure `e^{-f} dv`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Zero,
    /// `c r²`
    Quadratic {
        c: f64,
    },
    /// `c log(1 + r²)`
    LogPoly {
        c: f64,
    },
    /// `c √(1 + r²)`
    LinearAsymptotic {
        c: f64,
    },
    /// Even spline, so `f'(0) = 0`.
    Tabulated(UniformSpline),
}

impl Weight {
    pub fn family(&self) -> &'static str {
        match self {
            Weight::Zero => "zero",
            Weight::Quadratic { .. } => "quadratic",
            Weight::LogPoly { .. } => "log_poly",
            Weight::LinearAsymptotic { .. } => "linear_asymptotic",
            Weight::Tabulated(_) => "tabulated",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Weight::Zero => vec![],
            Weight::Quadratic { c } | Weight::LogPoly { c } | Weight::LinearAsymptotic { c } => {
                vec![*c]
            }
            Weight::Tabulated(s) => {
                let mut p = vec![s.spacing()];
                p.extend_from_slice(s.samples());
                p
            }
        }
    }

    pub fn from_parts(family: &str, params: &[f64]) -> Result<Self> {
        let coeff = |params: &[f64]| -> Result<f64> {
            expect_params(family, params, 1)?;
            if !params[0].is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{family} coefficient must be finite"
                )));
            }
            Ok(params[0])
        };
        match family {
            "zero" => {
                expect_params(family, params, 0)?;
                Ok(Self::Zero)
            }
            "quadratic" => Ok(Self::Quadratic { c: coeff(params)? }),
            "log_poly" => Ok(Self::LogPoly { c: coeff(params)? }),
            "linear_asymptotic" => Ok(Self::LinearAsymptotic { c: coeff(params)? }),
            "tabulated" => {
                if params.len() < 5 {
                    return Err(Error::InvalidModel(
                        "tabulated weight params are [spacing, v0, v1, v2, v3, ...]".into(),
                    ));
                }
                Ok(Self::Tabulated(UniformSpline::reflected(
                    params[0],
                    params[1..].to_vec(),
                    Parity::Even,
                )?))
            }
            other => Err(Error::InvalidModel(format!(
                "unknown weight family `{other}`"
            ))),
        }
    }

    pub fn jet(&self, r: f64) -> Result<Jet> {
        Ok(match self {
            Weight::Zero => Jet::new(0.0, 0.0, 0.0),
            Weight::Quadratic { c } => Jet::new(c * r * r, 2.0 * c * r, 2.0 * c),
            Weight::LogPoly { c } => {
                let s = 1.0 + r * r;
                Jet::new(
                    c * s.ln(),
                    2.0 * c * r / s,
                    c * (2.0 - 2.0 * r * r) / (s * s),
                )
            }
            Weight::LinearAsymptotic { c } => {
                let s = 1.0 + r * r;
                let root = s.sqrt();
                Jet::new(c * root, c * r / root, c / (s * root))
            }
            Weight::Tabulated(spline) => {
                let [v, d1, d2] = spline.eval(r)?;
                Jet::new(v, d1, d2)
            }
        })
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r)?.value)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Zero)
    }

    pub fn extent(&self) -> f64 {
        match self {
            Weight::Tabulated(s) => s.end(),
            _ => f64::INFINITY,
        }
    }
}

fn expect_params(family: &str, params: &[f64], count: usize) -> Result<()> {
    if params.len() != count {
        return Err(Error::InvalidModel(format!(
            "{family} expects {count} parameter(s), got {}",
            params.len()
        )));
    }
    Ok(())
}

/// Area of the unit `k`-sphere `S^k ⊂ R^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Rotationally symmetric weighted manifold. For `n = 1` the model is the
/// half-line with even reflection at the pole and the warp is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedModel {
    pub n: usize,
    pub warp: RadialWarp,
    pub weight: Weight,
    pub radius: f64,
    pub bc: Boundary,
}

impl WeightedModel {
    pub fn new(
        n: usize,
        warp: RadialWarp,
        weight: Weight,
        radius: f64,
        bc: Boundary,
    ) -> Result<Self> {
        let model = Self {
            n,
            warp,
            weight,
            radius,
            bc,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn euclidean(n: usize, weight: Weight, radius: f64, bc: Boundary) -> Result<Self> {
        Self::new(n, RadialWarp::Euclidean, weight, radius, bc)
    }

    pub fn hyperbolic(n: usize, a: f64, weight: Weight, radius: f64, bc: Boundary) -> Result<Self> {
        Self::new(n, RadialWarp::hyperbolic(a)?, weight, radius, bc)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidModel("dimension n must be at least 1".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "domain radius must be positive, got {}",
                self.radius
            )));
        }
        if self.weight.extent() < self.radius * (1.0 - 1e-12) {
            return Err(Error::InvalidModel(format!(
                "tabulated weight covers [0, {}] but the domain radius is {}",
                self.weight.extent(),
                self.radius
            )));
        }
        let f0 = self.weight.jet(0.0)?;
        if f0.d1.abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "weight must satisfy f'(0) = 0, got {}",
                f0.d1
            )));
        }
        if self.n >= 2 {
            if self.warp.extent() < self.radius * (1.0 - 1e-12) {
                return Err(Error::InvalidModel(format!(
                    "tabulated warp covers [0, {}] but the domain radius is {}",
                    self.warp.extent(),
                    self.radius
                )));
            }
            let p0 = self.warp.jet(0.0)?;
            if p0.value.abs() > 1e-12 || (p0.d1 - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel(format!(
                    "warp must satisfy φ(0) = 0, φ'(0) = 1, got φ(0) = {}, φ'(0) = {}",
                    p0.value, p0.d1
                )));
            }
            let checks = 512;
            for i in 1..=checks {
                let r = self.radius * i as f64 / checks as f64;
                let v = self.warp.jet(r)?.value;
                if !(v > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "warp is nonpositive at r = {r}: φ = {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same model on a different domain radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.warp.clone(),
            self.weight.clone(),
            radius,
            self.bc,
        )
    }

    pub fn with_bc(&self, bc: Boundary) -> Self {
        Self { bc, ..self.clone() }
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || r > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain {
                r,
                radius: self.radius,
            });
        }
        Ok(())
    }

    pub fn warp_jet(&self, r: f64) -> Result<Jet> {
        if self.n == 1 {
            return Ok(Jet::new(1.0, 0.0, 0.0));
        }
        self.warp.jet(r)
    }

    pub fn weight_jet(&self, r: f64) -> Result<Jet> {
        self.weight.jet(r)
    }

    /// Weighted area of the sphere of radius `r`: `ω_{n-1} φ(r)^{n-1} e^{-f(r)}`.
    /// For `n = 1` this is `2 e^{-f(r)}` (two endpoints of the reflected line).
    pub fn area_density(&self, r: f64) -> Result<f64> {
        let f = self.weight.value(r)?;
        if self.n == 1 {
            return Ok(2.0 * (-f).exp());
        }
        let phi = self.warp.jet(r)?.value;
        Ok(sphere_area(self.n - 1) * phi.powi(self.n as i32 - 1) * (-f).exp())
    }

    /// `Δ_f r = (n-1) φ'/φ - f'`.
    pub fn drift_laplacian_radius(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::SingularAtPole);
        }
        self.check_radius(r)?;
        self.drift_laplacian_radius_unchecked(r)
    }

    /// `Δ_f r` without the domain check; used by the curvature comparisons
    /// that sample exactly up to the boundary and by the Weyl probe.
    pub(crate) fn drift_laplacian_radius_unchecked(&self, r: f64) -> Result<f64> {
        let fp = self.weight.jet(r)?.d1;
        if self.n == 1 {
            return Ok(-fp);
        }
        let w = self.warp.jet(r)?;
        Ok((self.n as f64 - 1.0) * w.d1 / w.value - fp)
    }

    /// Short label used in report tables.
    pub fn label(&self) -> String {
        let warp = match &self.warp {
            RadialWarp::Euclidean => "euclidean".to_string(),
            RadialWarp::Hyperbolic { a } => format!("hyperbolic(a={a})"),
            RadialWarp::Tabulated(_) => "tabulated".to_string(),
        };
        let weight = match &self.weight {
            Weight::Zero => "f=0".to_string(),
            Weight::Quadratic { c } => format!("f={c}r^2"),
            Weight::LogPoly { c } => format!("f={c}log(1+r^2)"),
            Weight::LinearAsymptotic { c } => format!("f={c}sqrt(1+r^2)"),
            Weight::Tabulated(_) => "f=tabulated".to_string(),
        };
        format!("n={} {warp} {weight} R={} {}", self.n, self.radius, self.bc)
    }
}

/// `M × S^q` with metric `g + ε² e^{-2f/q} g_{S^q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProductModel {
    pub base: WeightedModel,
    pub q: usize,
    pub epsilon: f64,
}

impl WarpedProductModel {
    pub fn new(base: WeightedModel, q: usize, epsilon: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidModel(
                "fiber dimension q must be at least 1".into(),
            ));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "collapse parameter must be positive, got {epsilon}"
            )));
        }
        Ok(Self { base, q, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.base.clone(), self.q, epsilon)
    }

    /// Fiber warp `ρ = ε e^{-f/q}` with derivatives by the chain rule.
    pub fn fiber_warp(&self, r: f64) -> Result<Jet> {
        let f = self.base.weight.jet(r)?;
        let q = self.q as f64;
        let rho = self.epsilon * (-f.value / q).exp();
        let g = f.d1 / q;
        Ok(Jet::new(rho, -g * rho, (g * g - f.d2 / q) * rho))
    }

    /// Fiber eigenvalue `μ_j = j (j + q - 1)` of `-Δ_{S^q}`.
    pub fn fiber_eigenvalue(&self, j: usize) -> f64 {
        (j * (j + self.q - 1)) as f64
    }

    /// Dimension of degree-`j` spherical harmonics on `S^q`.
    pub fn fiber_multiplicity(&self, j: usize) -> usize {
        harmonic_multiplicity(self.q, j)
    }

    /// Sector potential `μ_j ε^{-2} e^{2f/q}` at `r`.
    pub fn sector_potential(&self, j: usize, r: f64) -> Result<f64> {
        if j == 0 {
            return Ok(0.0);
        }
        let f = self.base.weight.value(r)?;
        Ok(self.fiber_eigenvalue(j) / (self.epsilon * self.epsilon)
            * (2.0 * f / self.q as f64).exp())
    }
}

/// `m_j = (2j + q - 1)(j + q - 2)! / (j! (q - 1)!)`, with `m_0 = 1`.
pub fn harmonic_multiplicity(q: usize, j: usize) -> usize {
    if j == 0 {
        return 1;
    }
    if q == 1 {
        return 2;
    }
    // (j+q-2)! / (j! (q-1)!) = C(j+q-2, j) / (q-1)... computed as a product
    // to stay in integers: (2j+q-1)/(j+q-1) * C(j+q-1, j)
    let binom = binomial(j + q - 1, j);
    (2 * j + q - 1) * binom / (j + q - 1)
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The default model matrix: three warps × four weights at dimension `n`.
pub fn default_matrix(n: usize, radius: f64, bc: Boundary) -> Result<Vec<WeightedModel>> {
    let warps = [
        RadialWarp::Euclidean,
        RadialWarp::hyperbolic(1.0)?,
        RadialWarp::cone_profile(radius)?,
    ];
    let weights = [
        Weight::Zero,
        Weight::Quadratic { c: 0.5 },
        Weight::LogPoly { c: 1.0 },
        Weight::LinearAsymptotic { c: 1.0 },
    ];
    let mut models = Vec::with_capacity(12);
    for warp in &warps {
        for weight in &weights {
            models.push(WeightedModel::new(
                n,
                warp.clone(),
                weight.clone(),
                radius,
                bc,
            )?);
        }
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn multiplicities_match_harmonic_dimension_counts() {
        // dim of degree-j harmonics on S^q = C(j+q, q) - C(j+q-2, q)
        for q in 1..6 {
            for j in 0..12 {
                let full = binomial(j + q, q);
                let lower = if j >= 2 { binomial(j + q - 2, q) } else { 0 };
                assert_eq!(harmonic_multiplicity(q, j), full - lower, "q={q} j={j}");
            }
        }
        assert_eq!(harmonic_multiplicity(2, 3), 7);
    }

    #[test]
    fn rejects_irregular_pole() {
        let bad = RadialWarp::tabulated(0.1, vec![0.0, -0.2, -0.4, -0.6, -0.8]).unwrap();
        assert!(WeightedModel::new(2, bad, Weight::Zero, 0.4, Boundary::Dirichlet).is_err());
        assert!(WeightedModel::euclidean(0, Weight::Zero, 1.0, Boundary::Dirichlet).is_err());
        assert!(WeightedModel::euclidean(2, Weight::Zero, -1.0, Boundary::Dirichlet).is_err());
    }

    #[test]
    fn tabulated_projection_forces_pole_values() {
        let w = RadialWarp::tabulated(0.1, vec![0.3, 0.1, 0.2, 0.3, 0.4]).unwrap();
        let j = w.jet(0.0).unwrap();
        assert_eq!(j.value, 0.0);
        assert!((j.d1 - 1.0).abs() < 1e-12);
        assert!(j.d2.abs() < 1e-12);
    }

    #[test]
    fn fiber_warp_derivatives_match_finite_differences() {
        let base =
            WeightedModel::euclidean(2, Weight::LogPoly { c: 1.0 }, 3.0, Boundary::Dirichlet)
                .unwrap();
        let wp = WarpedProductModel::new(base, 2, 0.3).unwrap();
        let h = 1e-4;
        let r = 1.3;
        let (a, b, c) = (
            wp.fiber_warp(r - h).unwrap().value,
            wp.fiber_warp(r).unwrap(),
            wp.fiber_warp(r + h).unwrap().value,
        );
        assert!(((c - a) / (2.0 * h) - b.d1).abs() < 1e-7);
        assert!(((c - 2.0 * b.value + a) / (h * h) - b.d2).abs() < 1e-5);
    }

    #[test]
    fn drift_laplacian_radius_examples() {
        let e3 = WeightedModel::euclidean(3, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        assert!((e3.drift_laplacian_radius(2.0).unwrap() - 1.0).abs() < 1e-15);
        let h3 = WeightedModel::hyperbolic(3, 1.0, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        let expected = 2.0 / 1f64.tanh();
        assert!((h3.drift_laplacian_radius(1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 2.626_070_570_998_663).abs() < 1e-12);
        let g2 =
            WeightedModel::euclidean(2, Weight::Quadratic { c: 0.5 }, 5.0, Boundary::Dirichlet)
                .unwrap();
        assert!(g2.drift_laplacian_radius(1.0).unwrap().abs() < 1e-15);
        assert!(matches!(
            g2.drift_laplacian_radius(0.0),
            Err(Error::SingularAtPole)
        ));
    }
}
