use serde::Serialize;

use super::kernel::SpectralKernel;
use crate::error::{Error, Result};
use crate::geometry::{curvature_bound, DEFAULT_CURVATURE_GRID};
use crate::model::WeightedModel;
use crate::operator::PoleCondition;
use crate::report::{BoundReport, Margin, Severity, Split};

/// Sample window of the Li–Yau and Harnack checks: nodes with
/// `r ≤ r_fraction R̄` and `u ≥ floor u(pole)` at each listed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiYauWindow {
    pub r_fraction: f64,
    pub times: Vec<f64>,
    pub floor: f64,
}

impl Default for LiYauWindow {
    fn default() -> Self {
        Self {
            r_fraction: 0.5,
            times: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            floor: 1e-6,
        }
    }
}

/// `(n+q) α² / (2t) + (n+q) K α² / (2(α-1))`.
pub fn li_yau_rhs(dim: f64, k: f64, alpha: f64, t: f64) -> f64 {
    dim * alpha * alpha / (2.0 * t) + dim * k * alpha * alpha / (2.0 * (alpha - 1.0))
}

/// Fourth-order central difference of nodal values `g` at node `i` with
/// stride `s`, reflected evenly through the pole.
fn central(g: &[f64], i: usize, s: usize, h: f64) -> f64 {
    let at = |j: isize| g[j.unsigned_abs()];
    let i = i as isize;
    let s = s as isize;
    (-at(i + 2 * s) + 8.0 * at(i + s) - 8.0 * at(i - s) + at(i - 2 * s)) / (12.0 * h * s as f64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Li-Yau needs alpha > 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Pointwise `|∇u|²/u² - α u_t/u ≤ RHS` for `u = H(pole, ·, t)`. Space
/// derivatives use fourth-order stencils on `ln u` with steps `h` and `2h`;
/// their difference is the noise floor, and a negative margin within
/// `margin_tol` plus the floor is inconclusive rather than a failure.
pub fn verify_li_yau(
    model: &WeightedModel,
    q: usize,
    kernel: &SpectralKernel,
    alpha: f64,
    window: &LiYauWindow,
    margin_tol: f64,
) -> Result<BoundReport> {
    check_alpha(alpha)?;
    if kernel.pole != PoleCondition::Natural {
        return Err(Error::InvalidArgument(
            "Li-Yau check needs a kernel at a regular pole".into(),
        ));
    }
    let k = curvature_bound(model, q, DEFAULT_CURVATURE_GRID)?;
    let dim = (model.n + q) as f64;
    let nodes = kernel.nodes();
    let h = nodes[1];
    let last = nodes.len() - 1;
    let mut rep = BoundReport::new("li_yau", Severity::Hard, &["r", "t"]);
    let mut worst_noise = 0.0f64;
    for &t in &window.times {
        let u = kernel.eval_nodes(t)?;
        let ut = kernel.time_derivative_nodes(t)?;
        let g: Vec<f64> = u.iter().map(|v| v.ln()).collect();
        let rhs = li_yau_rhs(dim, k, alpha, t);
        for i in 0..=last {
            let r = nodes[i];
            if r > window.r_fraction * kernel.radius()
                || i + 4 > last
                || !(u[i] >= window.floor * u[0])
            {
                continue;
            }
            let d1 = central(&g, i, 1, h);
            let d2 = central(&g, i, 2, h);
            let noise = (d1 - d2).abs();
            let spread = 2.0 * d1.abs() * noise + noise * noise;
            worst_noise = worst_noise.max(spread);
            let lhs = d1 * d1 - alpha * ut[i] / u[i];
            let margin = rhs - lhs;
            rep.push(Margin {
                coords: vec![r, t],
                lhs,
                rhs,
                margin: margin + margin_tol,
                split: Split::Check,
                inconclusive: margin + margin_tol < 0.0 && -(margin + margin_tol) <= spread,
            });
        }
    }
    rep.constant("K", k);
    rep.constant("alpha", alpha);
    rep.constant("dimension", dim);
    rep.constant("noise_floor", worst_noise);
    rep.constant("margin_tol", margin_tol);
    rep.note("R→∞ form; margins below the finite-difference noise floor are inconclusive");
    Ok(rep.finish())
}

/// Harnack pairs `(r₁, t₁, r₂, t₂)` built from radii `{0, R̄/8, R̄/4}` and
/// every ordered pair of window times.
pub fn harnack_pairs(kernel: &SpectralKernel, window: &LiYauWindow) -> Vec<(f64, f64, f64, f64)> {
    let radius = kernel.radius();
    let radii = [0.0, radius / 8.0, radius / 4.0];
    let mut pairs = Vec::new();
    for (a, &t1) in window.times.iter().enumerate() {
        for &t2 in &window.times[a + 1..] {
            for &r1 in &radii {
                for &r2 in &radii {
                    pairs.push((r1, t1, r2, t2));
                }
            }
        }
    }
    pairs
}

/// `u(r₁,t₁) ≤ u(r₂,t₂) (t₂/t₁)^{(n+q)α/2} exp[α(r₁-r₂)²/(4(t₂-t₁)) + A(t₂-t₁)]`
/// with `A = (n+q)Kα/(2(α-1))`, in log scale.
pub fn verify_harnack(
    model: &WeightedModel,
    q: usize,
    kernel: &SpectralKernel,
    alpha: f64,
    pairs: &[(f64, f64, f64, f64)],
) -> Result<BoundReport> {
    check_alpha(alpha)?;
    let k = curvature_bound(model, q, DEFAULT_CURVATURE_GRID)?;
    let dim = (model.n + q) as f64;
    let a = dim * k * alpha / (2.0 * (alpha - 1.0));
    let mut rep = BoundReport::new("harnack", Severity::Hard, &["r1", "t1", "r2", "t2"]);
    let mut skipped = 0usize;
    for &(r1, t1, r2, t2) in pairs {
        if !(t1 < t2) {
            return Err(Error::InvalidArgument(format!(
                "Harnack pairs need t1 < t2, got {t1}, {t2}"
            )));
        }
        let (u1, u2) = (kernel.eval(r1, t1)?, kernel.eval(r2, t2)?);
        if !(u1 >= kernel.reliable_floor(t1)? && u2 >= kernel.reliable_floor(t2)?) {
            skipped += 1;
            continue;
        }
        let lhs = u1.ln();
        let rhs = u2.ln()
            + 0.5 * dim * alpha * (t2 / t1).ln()
            + alpha * (r1 - r2).powi(2) / (4.0 * (t2 - t1))
            + a * (t2 - t1);
        rep.push_le(vec![r1, t1, r2, t2], lhs, rhs, Split::Check);
    }
    rep.constant("K", k);
    rep.constant("alpha", alpha);
    rep.constant("A", a);
    rep.constant("skipped_unresolved", skipped as f64);
    rep.note("R→∞ form; margins in log scale");
    Ok(rep.finish())
}
