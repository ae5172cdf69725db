//! Ricci tensor of a diagonal metric from second-order jets of its
//! components, used as an independent check of the warped-product formulas.
//!
//! The doubly warped metric `dr² + φ(r)² g_{S^{n-1}} + ρ(r)² g_{S^q}` is
//! written in hyperspherical coordinates `(r, θ_1..θ_{n-1}, ψ_1..ψ_q)`, where
//! each diagonal entry is a product of one-variable factors. Christoffel
//! symbols and their derivatives follow from the standard diagonal-metric
//! expressions and the Ricci tensor is contracted directly, so nothing here
//! knows about warped products beyond the metric itself.

use crate::error::{Error, Result};
use crate::model::WarpedProductModel;

/// One-variable factor `(value, d/dx, d²/dx²)` attached to coordinate `coord`.
#[derive(Debug, Clone, Copy)]
struct Factor {
    coord: usize,
    jet: [f64; 3],
}

/// Diagonal metric entry as a product of one-variable factors.
#[derive(Debug, Clone, Default)]
struct Entry {
    factors: Vec<Factor>,
}

impl Entry {
    /// Value of the entry with factor `i` differentiated `orders[i]` times.
    fn eval_with(&self, orders: impl Fn(usize) -> usize) -> f64 {
        self.factors
            .iter()
            .map(|f| f.jet[orders(f.coord)])
            .product()
    }

    fn value(&self) -> f64 {
        self.eval_with(|_| 0)
    }

    fn d(&self, c: usize) -> f64 {
        if !self.factors.iter().any(|f| f.coord == c) {
            return 0.0;
        }
        self.eval_with(|k| usize::from(k == c))
    }

    fn dd(&self, c: usize, e: usize) -> f64 {
        let touches = |k| self.factors.iter().any(|f| f.coord == k);
        if !touches(c) || !touches(e) {
            return 0.0;
        }
        if c == e {
            self.eval_with(|k| if k == c { 2 } else { 0 })
        } else {
            self.eval_with(|k| usize::from(k == c || k == e))
        }
    }
}

/// Value and derivatives of every metric entry at a point.
struct MetricJet {
    g: Vec<f64>,
    dg: Vec<Vec<f64>>,       // dg[a][c] = ∂_c g_aa
    ddg: Vec<Vec<Vec<f64>>>, // ddg[a][c][e] = ∂_c ∂_e g_aa
}

impl MetricJet {
    fn new(entries: &[Entry]) -> Self {
        let dim = entries.len();
        let g = entries.iter().map(Entry::value).collect();
        let dg = entries
            .iter()
            .map(|en| (0..dim).map(|c| en.d(c)).collect())
            .collect();
        let ddg = entries
            .iter()
            .map(|en| {
                (0..dim)
                    .map(|c| (0..dim).map(|e| en.dd(c, e)).collect())
                    .collect()
            })
            .collect();
        Self { g, dg, ddg }
    }

    fn dim(&self) -> usize {
        self.g.len()
    }

    fn delta(a: usize, b: usize) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }

    /// Γ^a_{bc}
    fn christoffel(&self, a: usize, b: usize, c: usize) -> f64 {
        let num = Self::delta(a, b) * self.dg[a][c] + Self::delta(a, c) * self.dg[a][b]
            - Self::delta(b, c) * self.dg[b][a];
        num / (2.0 * self.g[a])
    }

    /// ∂_e Γ^a_{bc}
    fn christoffel_d(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        let num = Self::delta(a, b) * self.dg[a][c] + Self::delta(a, c) * self.dg[a][b]
            - Self::delta(b, c) * self.dg[b][a];
        let dnum = Self::delta(a, b) * self.ddg[a][c][e] + Self::delta(a, c) * self.ddg[a][b][e]
            - Self::delta(b, c) * self.ddg[b][a][e];
        let ga = self.g[a];
        dnum / (2.0 * ga) - num * self.dg[a][e] / (2.0 * ga * ga)
    }

    /// Coordinate Ricci tensor
    /// `R_bd = ∂_a Γ^a_bd − ∂_d Γ^a_ba + Γ^a_ae Γ^e_bd − Γ^a_de Γ^e_ba`.
    fn ricci(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut out = vec![vec![0.0; dim]; dim];
        for b in 0..dim {
            for d in 0..dim {
                let mut s = 0.0;
                for a in 0..dim {
                    s += self.christoffel_d(a, b, d, a) - self.christoffel_d(a, b, a, d);
                    for e in 0..dim {
                        s += self.christoffel(a, a, e) * self.christoffel(e, b, d)
                            - self.christoffel(a, d, e) * self.christoffel(e, b, a);
                    }
                }
                out[b][d] = s;
            }
        }
        out
    }

    /// Ricci tensor in the orthonormal frame `e_a = ∂_a / √g_aa`.
    fn ricci_orthonormal(&self) -> Vec<Vec<f64>> {
        let mut ric = self.ricci();
        for (b, row) in ric.iter_mut().enumerate() {
            for (d, v) in row.iter_mut().enumerate() {
                *v /= (self.g[b] * self.g[d]).sqrt();
            }
        }
        ric
    }
}

fn square_jet(j: [f64; 3]) -> [f64; 3] {
    let [v, d1, d2] = j;
    [v * v, 2.0 * v * d1, 2.0 * d1 * d1 + 2.0 * v * d2]
}

fn sin_squared_jet(x: f64) -> [f64; 3] {
    let (s, c) = x.sin_cos();
    [s * s, 2.0 * s * c, 2.0 * (c * c - s * s)]
}

/// Hyperspherical entries of `w(r)² g_{S^k}` where the angles occupy
/// coordinates `first..first + k`.
fn sphere_entries(radial: [f64; 3], first: usize, angles: &[f64]) -> Vec<Entry> {
    let w2 = square_jet(radial);
    (0..angles.len())
        .map(|i| {
            let mut factors = vec![Factor { coord: 0, jet: w2 }];
            for (j, &angle) in angles.iter().enumerate().take(i) {
                factors.push(Factor {
                    coord: first + j,
                    jet: sin_squared_jet(angle),
                });
            }
            Entry { factors }
        })
        .collect()
}

/// Orthonormal-frame Ricci blocks of the doubly warped metric at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRicci {
    pub base_radial: f64,
    /// Diagonal entries along the `S^{n-1}` directions (all equal in theory).
    pub base_tangential: Vec<f64>,
    /// Diagonal entries along the fiber directions (all equal in theory).
    pub fiber: Vec<f64>,
    /// Largest absolute off-diagonal entry.
    pub max_off_diagonal: f64,
}

/// Generic angles away from the coordinate singularities of the charts.
const BASE_ANGLE: f64 = 1.1;
const FIBER_ANGLE: f64 = 0.9;

/// Ricci curvature of `dr² + φ² g_{S^{n-1}} + ρ² g_{S^q}` at radius `r`
/// computed from the metric jets alone.
pub fn warped_ricci(wp: &WarpedProductModel, r: f64) -> Result<OracleRicci> {
    if r <= 0.0 {
        return Err(Error::SingularAtPole);
    }
    let n = wp.base.n;
    let q = wp.q;
    let phi = wp.base.warp_jet(r)?;
    let rho = wp.fiber_warp(r)?;

    let mut entries = vec![Entry {
        factors: vec![Factor {
            coord: 0,
            jet: [1.0, 0.0, 0.0],
        }],
    }];
    if n >= 2 {
        let angles: Vec<f64> = (0..n - 1).map(|i| BASE_ANGLE - 0.07 * i as f64).collect();
        entries.extend(sphere_entries([phi.value, phi.d1, phi.d2], 1, &angles));
    }
    let fiber_first = n;
    let angles: Vec<f64> = (0..q).map(|i| FIBER_ANGLE + 0.05 * i as f64).collect();
    entries.extend(sphere_entries(
        [rho.value, rho.d1, rho.d2],
        fiber_first,
        &angles,
    ));

    let ric = MetricJet::new(&entries).ricci_orthonormal();
    let dim = ric.len();
    let mut max_off = 0.0f64;
    for (b, row) in ric.iter().enumerate() {
        for (d, v) in row.iter().enumerate() {
            if b != d {
                max_off = max_off.max(v.abs());
            }
        }
    }
    Ok(OracleRicci {
        base_radial: ric[0][0],
        base_tangential: (1..n).map(|i| ric[i][i]).collect(),
        fiber: (fiber_first..dim).map(|i| ric[i][i]).collect(),
        max_off_diagonal: max_off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_two_sphere_is_einstein() {
        // g = dθ² + sin²θ dψ² written with θ as coordinate 0
        let entries = vec![
            Entry {
                factors: vec![Factor {
                    coord: 0,
                    jet: [1.0, 0.0, 0.0],
                }],
            },
            Entry {
                factors: vec![Factor {
                    coord: 0,
                    jet: sin_squared_jet(0.8),
                }],
            },
        ];
        let ric = MetricJet::new(&entries).ricci_orthonormal();
        assert!((ric[0][0] - 1.0).abs() < 1e-13);
        assert!((ric[1][1] - 1.0).abs() < 1e-13);
        assert!(ric[0][1].abs() < 1e-13);
    }

    #[test]
    fn round_three_sphere_has_ricci_two() {
        // S^3 = dr² + sin²r g_{S^2}
        let angles = [1.1, 0.7];
        let mut entries = vec![Entry {
            factors: vec![Factor {
                coord: 0,
                jet: [1.0, 0.0, 0.0],
            }],
        }];
        let r: f64 = 0.6;
        entries.extend(sphere_entries([r.sin(), r.cos(), -r.sin()], 1, &angles));
        let ric = MetricJet::new(&entries).ricci_orthonormal();
        for (i, row) in ric.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "({i},{j}) = {v}");
            }
        }
    }
}
