use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{RadialWarp, WeightedModel};
use crate::quadrature::{gauss_legendre5, integrate_with_breaks, QuadOptions};

/// `∫_0^θ sin^k`; closed forms for `k ≤ 1`, composite Gauss–Legendre
/// otherwise (the reduction formula cancels badly for small `θ`).
fn sine_power_integral(k: usize, theta: f64) -> f64 {
    match k {
        0 => theta,
        1 => 2.0 * (0.5 * theta).sin().powi(2),
        _ => {
            let panels = 16;
            let w = theta / panels as f64;
            (0..panels)
                .map(|i| {
                    gauss_legendre5(|x| x.sin().powi(k as i32), i as f64 * w, (i + 1) as f64 * w)
                })
                .sum()
        }
    }
}

/// Fraction of the unit sphere `S^{n-1}` within angle `θ` of a point.
fn cap_fraction(n: usize, theta: f64) -> f64 {
    sine_power_integral(n - 2, theta) / sine_power_integral(n - 2, PI)
}

/// Largest angle at the pole, seen between a point at distance `r` and
/// points at distance `s`, that stays within `rho`. Uses the half-angle
/// form `sin²(θ/2) = (ρ² - d²) / 4rs` (hyperbolic: `sinh` products), `d = r - s`,
/// which keeps small angles accurate far from the pole.
fn pole_angle(model: &WeightedModel, r: f64, s: f64, rho: f64) -> f64 {
    let d = r - s;
    let x = match model.warp {
        RadialWarp::Hyperbolic { a } => {
            (0.5 * a * (rho + d)).sinh() * (0.5 * a * (rho - d)).sinh()
                / ((a * r).sinh() * (a * s).sinh())
        }
        // Euclidean law of cosines; approximate for tabulated warps
        _ => (rho + d) * (rho - d) / (4.0 * r * s),
    };
    2.0 * x.clamp(0.0, 1.0).sqrt().asin()
}

/// Weighted volume of the geodesic ball of radius `rho` whose center lies
/// at distance `r` from the pole. For a tabulated warp the angular extent
/// uses the Euclidean law of cosines.
pub fn ball_volume(model: &WeightedModel, r: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball needs r >= 0 and rho > 0, got ({r}, {rho})"
        )));
    }
    let density = |s: f64| model.area_density(s).unwrap_or(f64::NAN);
    let opts = QuadOptions::with_tolerances(0.0, 1e-11);
    if r == 0.0 {
        return Ok(integrate_with_breaks(density, 0.0, rho, &[], &opts)?.value);
    }
    let inner = (rho - r).max(0.0);
    let lo = (r - rho).abs();
    let full = if inner > 0.0 {
        integrate_with_breaks(density, 0.0, inner, &[], &opts)?.value
    } else {
        0.0
    };
    let fraction = |s: f64| -> f64 {
        if model.n == 1 {
            let near = f64::from(u8::from((s - r).abs() <= rho));
            let far = f64::from(u8::from(s + r <= rho));
            0.5 * (near + far)
        } else {
            cap_fraction(model.n, pole_angle(model, r, s, rho))
        }
    };
    let partial = integrate_with_breaks(
        |s| density(s) * fraction(s),
        lo.max(inner),
        r + rho,
        &[],
        &opts,
    )?
    .value;
    Ok(full + partial)
}

/// `φ(x) = V_f(x, 1)^{-1/2}` as a function of the distance of `x` from the
/// pole; exact at the pole.
#[derive(Debug, Clone)]
pub struct VolumeNormalizer<'a> {
    model: &'a WeightedModel,
}

impl<'a> VolumeNormalizer<'a> {
    pub fn new(model: &'a WeightedModel) -> Self {
        Self { model }
    }

    pub fn volume(&self, r: f64) -> Result<f64> {
        ball_volume(self.model, r, 1.0)
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        Ok(self.volume(r)?.powf(-0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Weight};

    #[test]
    fn euclidean_balls_are_translation_invariant() {
        for n in 1..=4 {
            let m = WeightedModel::euclidean(n, Weight::Zero, 10.0, Boundary::Dirichlet).unwrap();
            let at_pole = ball_volume(&m, 0.0, 0.7).unwrap();
            for &r in &[0.3, 0.7, 1.0, 2.5] {
                let v = ball_volume(&m, r, 0.7).unwrap();
                assert!(
                    (v - at_pole).abs() < 1e-9 * at_pole,
                    "n={n} r={r}: {v} vs {at_pole}"
                );
            }
        }
    }

    #[test]
    fn hyperbolic_balls_are_homogeneous() {
        let m = WeightedModel::hyperbolic(2, 1.0, Weight::Zero, 10.0, Boundary::Dirichlet).unwrap();
        let exact = 2.0 * PI * (1.0f64.cosh() - 1.0);
        for &r in &[0.0, 0.5, 3.0, 6.0] {
            let v = ball_volume(&m, r, 1.0).unwrap();
            assert!((v - exact).abs() < 1e-8 * exact, "r={r}: {v}");
        }
    }

    #[test]
    fn cap_fractions() {
        assert!((cap_fraction(3, PI / 2.0) - 0.5).abs() < 1e-15);
        assert!((cap_fraction(2, 1.0) - 1.0 / PI).abs() < 1e-15);
        assert!((cap_fraction(5, PI) - 1.0).abs() < 1e-14);
    }
}
