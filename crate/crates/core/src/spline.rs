use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry used to extend samples on `[0, L]` to `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// `s(-x) = s(x)`, so `s'(0) = 0`.
    Even,
    /// `s(-x) = -s(x)`, so `s(0) = 0` and `s''(0) = 0`.
    Odd,
}

/// Natural cubic spline through samples on uniform knots `0, h, 2h, ...`,
/// built on the reflected grid so that the requested parity holds exactly
/// at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSpline {
    spacing: f64,
    samples: Vec<f64>,
    parity: Parity,
    // second derivatives at the knots of the reflected grid, index m-1 is x=0
    moments: Vec<f64>,
}

impl UniformSpline {
    pub fn reflected(spacing: f64, mut samples: Vec<f64>, parity: Parity) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "spline spacing must be positive, got {spacing}"
            )));
        }
        if samples.len() < 4 {
            return Err(Error::InvalidModel(format!(
                "a tabulated profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(
                "tabulated samples must be finite".into(),
            ));
        }
        if parity == Parity::Odd {
            samples[0] = 0.0;
        }
        let m = samples.len();
        let full: Vec<f64> = (0..2 * m - 1)
            .map(|k| {
                if k + 1 >= m {
                    samples[k + 1 - m]
                } else {
                    let v = samples[m - 1 - k];
                    match parity {
                        Parity::Even => v,
                        Parity::Odd => -v,
                    }
                }
            })
            .collect();
        let moments = natural_moments(&full, spacing);
        Ok(Self {
            spacing,
            samples,
            parity,
            moments,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn end(&self) -> f64 {
        self.spacing * (self.samples.len() - 1) as f64
    }

    fn knot_value(&self, k: usize) -> f64 {
        let m = self.samples.len();
        if k + 1 >= m {
            self.samples[k + 1 - m]
        } else {
            let v = self.samples[m - 1 - k];
            match self.parity {
                Parity::Even => v,
                Parity::Odd => -v,
            }
        }
    }

    /// Value, first and second derivative at `x ∈ [0, end]`.
    pub fn eval(&self, x: f64) -> Result<[f64; 3]> {
        let end = self.end();
        if !(0.0..=end * (1.0 + 1e-12)).contains(&x) {
            return Err(Error::OutsideDomain { r: x, radius: end });
        }
        let m = self.samples.len();
        let h = self.spacing;
        let local = ((x / h).floor() as usize).min(m - 2);
        let i = local + m - 1;
        let t = x - local as f64 * h;
        let s = h - t;
        let (y0, y1) = (self.knot_value(i), self.knot_value(i + 1));
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let a = y0 / h - m0 * h / 6.0;
        let b = y1 / h - m1 * h / 6.0;
        let v = m0 * s.powi(3) / (6.0 * h) + m1 * t.powi(3) / (6.0 * h) + a * s + b * t;
        let d1 = -m0 * s * s / (2.0 * h) + m1 * t * t / (2.0 * h) - a + b;
        let d2 = (m0 * s + m1 * t) / h;
        Ok([v, d1, d2])
    }
}

/// Second derivatives of the natural cubic spline through `y` on a uniform grid.
fn natural_moments(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    let mut diag = vec![4.0; m];
    let mut rhs = vec![0.0; m];
    for i in 1..m - 1 {
        rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
    }
    // interior equations M[i-1] + 4 M[i] + M[i+1] = rhs[i], ends M = 0
    diag[0] = 1.0;
    diag[m - 1] = 1.0;
    let sub = |i: usize| if i == m - 1 { 0.0 } else { 1.0 };
    let sup = |i: usize| if i == 0 { 0.0 } else { 1.0 };
    for i in 1..m {
        let w = sub(i) / diag[i - 1];
        diag[i] -= w * sup(i - 1);
        rhs[i] -= w * rhs[i - 1];
    }
    let mut moments = vec![0.0; m];
    moments[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        moments[i] = (rhs[i] - sup(i) * moments[i + 1]) / diag[i];
    }
    moments
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_spline_reproduces_sine() {
        let h = 0.05;
        let values: Vec<f64> = (0..81).map(|i| (i as f64 * h).sin()).collect();
        let s = UniformSpline::reflected(h, values, Parity::Odd).unwrap();
        let [v, d1, d2] = s.eval(0.77).unwrap();
        assert!((v - 0.77f64.sin()).abs() < 1e-6);
        assert!((d1 - 0.77f64.cos()).abs() < 1e-4);
        assert!((d2 + 0.77f64.sin()).abs() < 1e-2);
        let [v0, d10, d20] = s.eval(0.0).unwrap();
        assert_eq!(v0, 0.0);
        assert!(d20.abs() < 1e-12);
        assert!((d10 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn even_spline_has_flat_origin() {
        let values = vec![0.3, 0.1, 0.25, 0.3, 0.2];
        let s = UniformSpline::reflected(0.1, values.clone(), Parity::Even).unwrap();
        for (i, v) in values.iter().enumerate() {
            assert!((s.eval(i as f64 * 0.1).unwrap()[0] - v).abs() < 1e-14);
        }
        assert!(s.eval(0.0).unwrap()[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_points_outside() {
        let s = UniformSpline::reflected(0.1, vec![0.0, 0.1, 0.2, 0.3], Parity::Odd).unwrap();
        assert!(s.eval(0.31).is_err());
        assert!(s.eval(-0.01).is_err());
    }
}
