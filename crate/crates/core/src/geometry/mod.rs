//! Closed-form curvature of radial models, comparison geometry and weighted
//! volumes.

pub mod oracle;
mod volume;

pub use volume::{
    asymptotic_nonnegativity_profile, calibrate_displayed_volume_offset, classify_volume_growth,
    verify_volume_comparison, weighted_volume, weighted_volume_to_infinity, AsymptoticProfile,
    GrowthClass, GrowthReport, DISPLAYED_VOLUME_OFFSET,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{WarpedProductModel, WeightedModel};
use crate::report::{BoundReport, Severity, Split};

/// Radial and tangential components of `Ric`, `Ric_f` and `Ric_f^q` at a set
/// of radii. Tangential sequences are empty for `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    pub q: usize,
    pub radii: Vec<f64>,
    pub ric_radial: Vec<f64>,
    pub ric_tangential: Vec<f64>,
    pub ricf_radial: Vec<f64>,
    pub ricf_tangential: Vec<f64>,
    pub ricfq_radial: Vec<f64>,
    pub ricfq_tangential: Vec<f64>,
    /// `max(0, -min eigenvalue of Ric_f^q)` over the sampled radii.
    pub k: f64,
}

/// Curvature components at a single radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCurvature {
    pub ric_radial: f64,
    pub ric_tangential: f64,
    pub hess_radial: f64,
    pub hess_tangential: f64,
    pub ricfq_radial: f64,
    pub ricfq_tangential: f64,
}

pub fn point_curvature(model: &WeightedModel, q: usize, r: f64) -> Result<PointCurvature> {
    let f = model.weight_jet(r)?;
    let qf = q as f64;
    if model.n == 1 {
        return Ok(PointCurvature {
            ric_radial: 0.0,
            ric_tangential: f64::NAN,
            hess_radial: f.d2,
            hess_tangential: f64::NAN,
            ricfq_radial: f.d2 - f.d1 * f.d1 / qf,
            ricfq_tangential: f64::NAN,
        });
    }
    let w = model.warp_jet(r)?;
    if !(w.value > 0.0) {
        return Err(Error::InvalidModel(format!(
            "warp is nonpositive at r = {r}"
        )));
    }
    let m = model.n as f64 - 1.0;
    let ric_radial = -m * w.d2 / w.value;
    let ric_tangential = -w.d2 / w.value + (m - 1.0) * (1.0 - w.d1 * w.d1) / (w.value * w.value);
    let hess_tangential = f.d1 * w.d1 / w.value;
    Ok(PointCurvature {
        ric_radial,
        ric_tangential,
        hess_radial: f.d2,
        hess_tangential,
        ricfq_radial: ric_radial + f.d2 - f.d1 * f.d1 / qf,
        ricfq_tangential: ric_tangential + hess_tangential,
    })
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    Ok(())
}

pub fn eval_curvature(model: &WeightedModel, q: usize, radii: &[f64]) -> Result<CurvatureProfile> {
    check_q(q)?;
    let mut p = CurvatureProfile {
        q,
        radii: radii.to_vec(),
        ric_radial: Vec::with_capacity(radii.len()),
        ric_tangential: Vec::new(),
        ricf_radial: Vec::with_capacity(radii.len()),
        ricf_tangential: Vec::new(),
        ricfq_radial: Vec::with_capacity(radii.len()),
        ricfq_tangential: Vec::new(),
        k: 0.0,
    };
    let mut lowest = f64::INFINITY;
    for &r in radii {
        model.check_radius(r)?;
        let c = point_curvature(model, q, r)?;
        p.ric_radial.push(c.ric_radial);
        p.ricf_radial.push(c.ric_radial + c.hess_radial);
        p.ricfq_radial.push(c.ricfq_radial);
        lowest = lowest.min(c.ricfq_radial);
        if model.n >= 2 {
            p.ric_tangential.push(c.ric_tangential);
            p.ricf_tangential.push(c.ric_tangential + c.hess_tangential);
            p.ricfq_tangential.push(c.ricfq_tangential);
            lowest = lowest.min(c.ricfq_tangential);
        }
    }
    p.k = if lowest.is_finite() {
        (-lowest).max(0.0)
    } else {
        0.0
    };
    Ok(p)
}

/// Sample radii `R̄ i / (10 grid)` for `i = 1..=10 grid`: ten curvature
/// samples per operator cell.
pub fn curvature_radii(model: &WeightedModel, grid: usize) -> Vec<f64> {
    let m = 10 * grid.max(1);
    (1..=m)
        .map(|i| model.radius * i as f64 / m as f64)
        .collect()
}

/// Lower curvature bound `K` with `Ric_f^q ≥ -K` on `(0, R̄]`, estimated on
/// ten samples per cell of an operator grid with `grid` cells.
pub fn curvature_bound(model: &WeightedModel, q: usize, grid: usize) -> Result<f64> {
    Ok(eval_curvature(model, q, &curvature_radii(model, grid))?.k)
}

/// Default operator resolution used when estimating `K` for comparison checks.
pub const DEFAULT_CURVATURE_GRID: usize = 400;

/// Closed-form blocks of the warped-product Ricci tensor in an orthonormal
/// frame: base block equals `Ric_f^q`, fiber block
/// `(q-1) ε^{-2} e^{2f/q} - (f'² - Δf)/q`, mixed block zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedRicci {
    pub base_radial: f64,
    pub base_tangential: f64,
    pub fiber: f64,
}

pub fn warped_ricci_formula(wp: &WarpedProductModel, r: f64) -> Result<WarpedRicci> {
    let model = &wp.base;
    let c = point_curvature(model, wp.q, r)?;
    let f = model.weight_jet(r)?;
    let q = wp.q as f64;
    let laplace_f = if model.n == 1 {
        f.d2
    } else {
        let w = model.warp_jet(r)?;
        f.d2 + (model.n as f64 - 1.0) * w.d1 / w.value * f.d1
    };
    let fiber = (q - 1.0) / (wp.epsilon * wp.epsilon) * (2.0 * f.value / q).exp()
        - (f.d1 * f.d1 - laplace_f) / q;
    Ok(WarpedRicci {
        base_radial: c.ricfq_radial,
        base_tangential: c.ricfq_tangential,
        fiber,
    })
}

/// Compare the closed-form warped-product Ricci blocks against the metric
/// oracle at every radius. Coordinates of each sample: `(r, component)` with
/// component 0 = base radial, 1 = base tangential, 2 = fiber, 3 = mixed.
pub fn verify_warped_ricci(
    wp: &WarpedProductModel,
    radii: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    if wp.base.n < 2 {
        return Err(Error::InvalidArgument(
            "warped-product Ricci check needs n >= 2".into(),
        ));
    }
    // absolute below magnitude one, relative above: fiber blocks grow like
    // e^{2f/q} and exceed the ulp of an absolute tolerance
    let scaled = |v: f64| tol * v.abs().max(1.0);
    let mut report = BoundReport::new("warped_product_ricci", Severity::Hard, &["r", "component"]);
    for &r in radii {
        if !(r > 0.0 && r < wp.base.radius) {
            return Err(Error::OutsideDomain {
                r,
                radius: wp.base.radius,
            });
        }
        let formula = warped_ricci_formula(wp, r)?;
        let o = oracle::warped_ricci(wp, r)?;
        report.push_eq(
            vec![r, 0.0],
            o.base_radial,
            formula.base_radial,
            scaled(formula.base_radial),
        );
        for &t in &o.base_tangential {
            report.push_eq(
                vec![r, 1.0],
                t,
                formula.base_tangential,
                scaled(formula.base_tangential),
            );
        }
        for &v in &o.fiber {
            report.push_eq(vec![r, 2.0], v, formula.fiber, scaled(formula.fiber));
        }
        let diag = formula
            .base_radial
            .abs()
            .max(formula.base_tangential.abs())
            .max(formula.fiber.abs());
        report.push_eq(vec![r, 3.0], o.max_off_diagonal, 0.0, scaled(diag));
    }
    report.constant("tolerance", tol);
    let mut report = report.finish();
    let d = report.max_discrepancy();
    // the tolerance of each sample is tol · scale, so this recovers max |Δ| / scale
    let scaled_max = report
        .margins
        .iter()
        .map(|m| tol * (m.lhs - m.rhs).abs() / (m.margin + (m.lhs - m.rhs).abs()))
        .fold(0.0, f64::max);
    report.constant("max_discrepancy", d);
    report.constant("max_scaled_discrepancy", scaled_max);
    Ok(report)
}

/// Riccati comparison bound for `Δ_f r` in effective dimension `m`:
/// `√(mK) coth(√(K/m) r)`, or `m / r` when `K = 0`.
pub fn riccati_bound(m: f64, k: f64, r: f64) -> f64 {
    if k <= 0.0 {
        return m / r;
    }
    let a = (k / m).sqrt();
    (m * k).sqrt() / (a * r).tanh()
}

/// Check `Δ_f r ≤ √((n+q)K) coth(√(K/(n+q)) r)` and the absolute form
/// `Δ_f r ≤ (n+q)/r + √((n+q)K)`. Coordinates: `(r, form)`, form 0 is the
/// coth bound, form 1 the absolute one.
pub fn verify_laplacian_comparison(
    model: &WeightedModel,
    q: usize,
    radii: &[f64],
) -> Result<BoundReport> {
    check_q(q)?;
    let k = curvature_bound(model, q, DEFAULT_CURVATURE_GRID)?;
    verify_laplacian_comparison_with(model, q, k, radii)
}

pub fn verify_laplacian_comparison_with(
    model: &WeightedModel,
    q: usize,
    k: f64,
    radii: &[f64],
) -> Result<BoundReport> {
    let m = (model.n + q) as f64;
    let mut report = BoundReport::new("laplacian_comparison", Severity::Hard, &["r", "form"]);
    for &r in radii {
        let lhs = model.drift_laplacian_radius(r)?;
        report.push_le(vec![r, 0.0], lhs, riccati_bound(m, k, r), Split::Check);
        report.push_le(vec![r, 1.0], lhs, m / r + (m * k).sqrt(), Split::Check);
    }
    report.constant("K", k);
    report.constant("effective_dimension", m);
    Ok(report.finish())
}

/// Equality case of the comparison: with `f = 0` and `Ric = -K` constant,
/// `Δr` equals the Riccati bound in dimension `n - 1`. Needs `n ≥ 2` and a
/// zero weight; `K` is estimated on the operator grid.
pub fn verify_comparison_sharpness(
    model: &WeightedModel,
    radii: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    if model.n < 2 || !model.weight.is_zero() {
        return Err(Error::InvalidArgument(
            "sharpness witness needs n >= 2 and f = 0".into(),
        ));
    }
    let k = curvature_bound(model, 1, DEFAULT_CURVATURE_GRID)?;
    let m = model.n as f64 - 1.0;
    let mut report = BoundReport::new("comparison_sharpness", Severity::Hard, &["r"]);
    for &r in radii {
        let lhs = model.drift_laplacian_radius(r)?;
        report.push_eq(vec![r], lhs, riccati_bound(m, k, r), tol);
    }
    report.constant("K", k);
    report.constant("dimension", m);
    report.note("bound in dimension n-1; the (n+q) form carries slack from the fiber");
    Ok(report.finish())
}

/// Residual of the radial Bochner identity
/// `Δ_f|∇u|² = 2|∇²u|² + 2⟨∇u, ∇Δ_f u⟩ + 2 Ric_f(∇u, ∇u)` at `r`, where
/// `u` supplies `[u, u', u'', u''']`.
pub fn bochner_residual(model: &WeightedModel, u: &dyn Fn(f64) -> [f64; 4], r: f64) -> Result<f64> {
    let [_, u1, u2, u3] = u(r);
    let f = model.weight_jet(r)?;
    let (dr, ddr, hess_sq, ricf) = if model.n == 1 {
        (-f.d1, -f.d2, u2 * u2, f.d2)
    } else {
        let w = model.warp_jet(r)?;
        let m = model.n as f64 - 1.0;
        let ratio = w.d1 / w.value;
        (
            m * ratio - f.d1,
            m * (w.d2 / w.value - ratio * ratio) - f.d2,
            u2 * u2 + m * (u1 * ratio).powi(2),
            -m * w.d2 / w.value + f.d2,
        )
    };
    // |∇u|² = u'², a radial function with derivatives below
    let v1 = 2.0 * u1 * u2;
    let v2 = 2.0 * u2 * u2 + 2.0 * u1 * u3;
    let lhs = v2 + dr * v1;
    let drift_u_d1 = u3 + ddr * u1 + dr * u2;
    let rhs = 2.0 * hess_sq + 2.0 * u1 * drift_u_d1 + 2.0 * ricf * u1 * u1;
    Ok(lhs - rhs)
}

pub fn verify_bochner_radial(
    model: &WeightedModel,
    u: &dyn Fn(f64) -> [f64; 4],
    radii: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    let mut report = BoundReport::new("bochner_radial", Severity::Hard, &["r"]);
    for &r in radii {
        model.check_radius(r)?;
        let res = bochner_residual(model, u, r)?;
        report.push_eq(vec![r], res, 0.0, tol);
    }
    Ok(report.finish())
}

/// `x²/n + y²/q ≥ (x+y)²/(n+q)` on every sample `(x, y, n, q)`, up to a few
/// ulps of rounding.
pub fn check_mean_inequality(samples: &[(f64, f64, f64, f64)]) -> Result<BoundReport> {
    let mut report = BoundReport::new("mean_inequality", Severity::Hard, &["x", "y", "n", "q"]);
    for &(x, y, n, q) in samples {
        if !(n > 0.0 && q > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "n and q must be positive, got {n}, {q}"
            )));
        }
        let big = x * x / n + y * y / q;
        let small = (x + y).powi(2) / (n + q);
        let slack = 8.0 * f64::EPSILON * big.abs().max(small.abs());
        report.push_le(vec![x, y, n, q], small, big + slack, Split::Check);
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Weight};

    #[test]
    fn flat_space_is_flat() {
        let m = WeightedModel::euclidean(3, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        let p = eval_curvature(&m, 1, &[0.5, 1.0, 4.0]).unwrap();
        assert!(p
            .ric_radial
            .iter()
            .chain(&p.ric_tangential)
            .all(|v| v.abs() < 1e-15));
        assert_eq!(p.k, 0.0);
    }

    #[test]
    fn hyperbolic_space_has_constant_ricci() {
        let m = WeightedModel::hyperbolic(3, 1.0, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        let p = eval_curvature(&m, 1, &[1.0]).unwrap();
        assert!((p.ric_radial[0] + 2.0).abs() < 1e-14);
        assert!((p.ric_tangential[0] + 2.0).abs() < 1e-14);
        assert!((p.k - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_weight_q_component() {
        let m = WeightedModel::euclidean(2, Weight::Quadratic { c: 0.5 }, 5.0, Boundary::Dirichlet)
            .unwrap();
        let p = eval_curvature(&m, 2, &[1.0]).unwrap();
        assert!((p.ricfq_radial[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_reduces_bitwise() {
        let m = WeightedModel::hyperbolic(3, 0.7, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        let radii = [0.3, 1.7, 4.2];
        let p = eval_curvature(&m, 2, &radii).unwrap();
        assert_eq!(p.ric_radial, p.ricf_radial);
        assert_eq!(p.ric_radial, p.ricfq_radial);
        assert_eq!(p.ric_tangential, p.ricfq_tangential);
    }

    #[test]
    fn comparison_examples() {
        let m = WeightedModel::hyperbolic(3, 1.0, Weight::Zero, 5.0, Boundary::Dirichlet).unwrap();
        let rhs = riccati_bound(4.0, 2.0, 1.0);
        assert!((rhs - 8f64.sqrt() / 0.5f64.sqrt().tanh()).abs() < 1e-14);
        assert!((rhs - 4.645_452_278_920_855).abs() < 1e-12);
        let rep = verify_laplacian_comparison(&m, 1, &[0.5, 1.0, 2.0, 4.9]).unwrap();
        assert!(rep.passed());
        assert!((rep.constants["K"] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn mean_inequality_examples() {
        let r = check_mean_inequality(&[
            (1.0, 1.0, 1.0, 1.0),
            (3.0, -1.0, 2.0, 5.0),
            (0.0, 0.0, 1.0, 1.0),
        ])
        .unwrap();
        assert!(r.passed());
        assert!((r.margins[1].rhs - 4.7).abs() < 1e-12);
        assert!((r.margins[1].lhs - 4.0 / 7.0).abs() < 1e-15);
    }
}
