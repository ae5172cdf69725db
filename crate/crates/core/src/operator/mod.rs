//! Finite-volume discretization of `-Δ_f + W` on radial models and its
//! eigenpairs.
//!
//! Nodes sit at `r_i = i h`. Each node owns the dual cell
//! `[r_i - h/2, r_i + h/2] ∩ [0, R̄]` whose mass is the integral of the area
//! density `p(r) = ω_{n-1} φ^{n-1} e^{-f}`; neighbouring nodes exchange flux
//! `p(r_{i+1/2}) (u_{i+1} - u_i) / h`. The stiffness matrix `S` is therefore
//! symmetric and the operator `M^{-1} S` is self-adjoint in the weighted
//! inner product `⟨u, v⟩ = Σ m_i u_i v_i`.

mod sectors;
pub mod tridiag;

pub use sectors::{
    cheng_bound_check, collapse_crossover, euclidean_ball_constant, product_spectrum,
    sector_spectrum, sector_values, verify_collapse_identities, CollapseReport, ProductEigenvalue,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Boundary, WeightedModel};
use crate::quadrature::gauss_legendre5;
use tridiag::{smallest_pairs, smallest_values, SymTridiagonal};

/// Uniform radial grid `0 = r_0 < ... < r_N = R̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub radius: f64,
    pub cells: usize,
}

pub const MIN_CELLS: usize = 64;

impl Grid1D {
    pub fn uniform(radius: f64, cells: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_CELLS} cells, got {cells}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius, cells })
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.radius
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| self.node(i)).collect()
    }
}

/// Condition imposed at the pole. `Natural` is the regularity condition of
/// a smooth radial function; `Dirichlet` selects the odd sector of an
/// `n = 1` model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleCondition {
    Natural,
    Dirichlet,
}

/// Weighted Sturm–Liouville operator `-Δ_f + W` on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmLiouvilleOp {
    pub grid: Grid1D,
    pub bc: Boundary,
    pub pole: PoleCondition,
    /// Dual-cell masses `m_i`.
    pub masses: Vec<f64>,
    /// Flux coefficients `p(r_{i+1/2}) / h` between nodes `i` and `i+1`.
    pub flux: Vec<f64>,
    /// Potential samples at the nodes, absent for `W ≡ 0`.
    pub potential: Option<Vec<f64>>,
}

impl SturmLiouvilleOp {
    /// Discretize `-Δ_f` on `model` with `cells` uniform cells.
    pub fn assemble(model: &WeightedModel, cells: usize) -> Result<Self> {
        Self::assemble_with_pole(model, cells, PoleCondition::Natural)
    }

    pub fn assemble_with_pole(
        model: &WeightedModel,
        cells: usize,
        pole: PoleCondition,
    ) -> Result<Self> {
        if pole == PoleCondition::Dirichlet && model.n != 1 {
            return Err(Error::InvalidArgument(
                "a Dirichlet pole is only meaningful for n = 1 (odd sector)".into(),
            ));
        }
        let grid = Grid1D::uniform(model.radius, cells)?;
        let h = grid.spacing();
        let density = |r: f64| model.area_density(r.min(model.radius));
        let eval = |r: f64| density(r).unwrap_or(f64::NAN);

        let mut masses = Vec::with_capacity(cells + 1);
        for i in 0..=cells {
            let r = grid.node(i);
            let left = if i > 0 {
                gauss_legendre5(eval, r - 0.5 * h, r)
            } else {
                0.0
            };
            let right = if i < cells {
                gauss_legendre5(eval, r, r + 0.5 * h)
            } else {
                0.0
            };
            let m = left + right;
            if !(m.is_finite() && m > f64::MIN_POSITIVE * 1e6) {
                return Err(Error::DegenerateCell {
                    node: i,
                    r,
                    reason: format!("cell mass {m:e} is not a positive normal number"),
                });
            }
            masses.push(m);
        }
        let mut flux = Vec::with_capacity(cells);
        for i in 0..cells {
            let mid = (i as f64 + 0.5) * h;
            let p = density(mid)?;
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::DegenerateCell {
                    node: i,
                    r: mid,
                    reason: format!("area density {p:e} at the cell face is not positive"),
                });
            }
            flux.push(p / h);
        }
        Ok(Self {
            grid,
            bc: model.bc,
            pole,
            masses,
            flux,
            potential: None,
        })
    }

    /// Same operator with potential `W` (nonnegative samples at every node).
    pub fn with_potential(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.masses.len() {
            return Err(Error::InvalidArgument(format!(
                "potential has {} samples for {} nodes",
                w.len(),
                self.masses.len()
            )));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "potential samples must be finite and nonnegative".into(),
            ));
        }
        self.potential = Some(w);
        Ok(self)
    }

    /// Index range of the unknowns (Dirichlet nodes removed).
    pub fn active(&self) -> std::ops::Range<usize> {
        let first = usize::from(self.pole == PoleCondition::Dirichlet);
        let last = match self.bc {
            Boundary::Dirichlet => self.grid.cells,
            Boundary::Neumann => self.grid.cells + 1,
        };
        first..last
    }

    pub fn unknowns(&self) -> usize {
        self.active().len()
    }

    fn stiffness_diag(&self, i: usize) -> f64 {
        let left = if i > 0 { self.flux[i - 1] } else { 0.0 };
        let right = if i < self.grid.cells {
            self.flux[i]
        } else {
            0.0
        };
        left + right
    }

    /// Symmetrized matrix `M^{-1/2} S M^{-1/2} + W` on the active nodes.
    pub fn symmetric_form(&self) -> Result<SymTridiagonal> {
        let range = self.active();
        let d = range
            .clone()
            .map(|i| {
                let base = self.stiffness_diag(i) / self.masses[i];
                match &self.potential {
                    Some(w) => base + w[i],
                    None => base,
                }
            })
            .collect();
        let e = range
            .clone()
            .take(range.len().saturating_sub(1))
            .map(|i| -self.flux[i] / (self.masses[i] * self.masses[i + 1]).sqrt())
            .collect();
        SymTridiagonal::new(d, e)
    }

    /// `(-Δ_f + W) u` at the active nodes for a full nodal vector `u`
    /// (values at Dirichlet nodes are ignored and treated as zero).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let range = self.active();
        let value = |i: usize| if range.contains(&i) { u[i] } else { 0.0 };
        let mut out = vec![0.0; u.len()];
        for i in range.clone() {
            let mut s = 0.0;
            if i > 0 {
                s += self.flux[i - 1] * (value(i) - value(i - 1));
            }
            if i < self.grid.cells {
                s += self.flux[i] * (value(i) - value(i + 1));
            }
            out[i] = s / self.masses[i] + self.potential.as_ref().map_or(0.0, |w| w[i] * value(i));
        }
        out
    }

    /// Weighted inner product `Σ m_i u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.masses
            .iter()
            .zip(u)
            .zip(v)
            .map(|((m, a), b)| m * a * b)
            .sum()
    }

    /// Largest number of eigenpairs the accuracy guard admits.
    pub fn mode_limit(&self) -> usize {
        self.unknowns() / 4
    }
}

/// Eigenpairs of a [`SturmLiouvilleOp`]. Eigenvectors hold nodal values on
/// the full grid (zero at Dirichlet nodes) and are orthonormal in the
/// weighted inner product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenDecomposition {
    pub nodes: Vec<f64>,
    pub masses: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖(B - λ) v‖` for the symmetrized matrix `B`.
    pub residuals: Vec<f64>,
    /// Infinity norm of `B`.
    pub operator_norm: f64,
}

impl EigenDecomposition {
    /// Weighted Gram matrix of the eigenvectors.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let k = self.eigenvectors.len();
        let mut g = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in 0..=a {
                let v: f64 = self
                    .masses
                    .iter()
                    .zip(&self.eigenvectors[a])
                    .zip(&self.eigenvectors[b])
                    .map(|((m, x), y)| m * x * y)
                    .sum();
                g[a][b] = v;
                g[b][a] = v;
            }
        }
        g
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst = 0.0f64;
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

fn guard(op: &SturmLiouvilleOp, k: usize) -> Result<()> {
    let allowed = op.mode_limit();
    if k > allowed {
        return Err(Error::TooManyModes {
            requested: k,
            allowed,
        });
    }
    Ok(())
}

/// The `k` smallest eigenpairs of `op`.
pub fn eigen_solve(op: &SturmLiouvilleOp, k: usize) -> Result<EigenDecomposition> {
    guard(op, k)?;
    let t = op.symmetric_form()?;
    let eig = smallest_pairs(&t, k)?;
    let range = op.active();
    let total = op.masses.len();
    let eigenvectors = eig
        .vectors
        .iter()
        .map(|v| {
            let mut psi = vec![0.0; total];
            for (j, i) in range.clone().enumerate() {
                psi[i] = v[j] / op.masses[i].sqrt();
            }
            psi
        })
        .collect();
    Ok(EigenDecomposition {
        nodes: op.grid.nodes(),
        masses: op.masses.clone(),
        eigenvalues: eig.values,
        eigenvectors,
        residuals: eig.residuals,
        operator_norm: eig.norm,
    })
}

/// The `k` smallest eigenvalues of `op` without eigenvectors.
pub fn eigenvalues(op: &SturmLiouvilleOp, k: usize) -> Result<Vec<f64>> {
    guard(op, k)?;
    Ok(smallest_values(&op.symmetric_form()?, k))
}

/// Eigenvalues on grids with `cells` and `2 cells` combined by Richardson
/// extrapolation for a second-order scheme, plus the observed order from a
/// third grid with `4 cells`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolated {
    pub coarse: Vec<f64>,
    pub medium: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub orders: Vec<f64>,
}

pub fn extrapolated_eigenvalues(
    model: &WeightedModel,
    pole: PoleCondition,
    cells: usize,
    k: usize,
) -> Result<Extrapolated> {
    let solve = |c: usize| -> Result<Vec<f64>> {
        let op = SturmLiouvilleOp::assemble_with_pole(model, c, pole)?;
        eigenvalues(&op, k)
    };
    let coarse = solve(cells)?;
    let medium = solve(2 * cells)?;
    let fine = solve(4 * cells)?;
    let extrapolated = medium
        .iter()
        .zip(&fine)
        .map(|(m, f)| (4.0 * f - m) / 3.0)
        .collect();
    let orders = coarse
        .iter()
        .zip(&medium)
        .zip(&fine)
        .map(|((c, m), f)| ((c - m) / (m - f)).abs().log2())
        .collect();
    Ok(Extrapolated {
        coarse,
        medium,
        fine,
        extrapolated,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Weight;

    #[test]
    fn neumann_constant_is_conserved() {
        let m =
            WeightedModel::hyperbolic(3, 1.0, Weight::LogPoly { c: 1.0 }, 4.0, Boundary::Neumann)
                .unwrap();
        let op = SturmLiouvilleOp::assemble(&m, 100).unwrap();
        let out = op.apply(&vec![1.0; 101]);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn weighted_self_adjointness() {
        let m = WeightedModel::euclidean(2, Weight::Quadratic { c: 0.5 }, 3.0, Boundary::Dirichlet)
            .unwrap();
        let op = SturmLiouvilleOp::assemble(&m, 80).unwrap();
        let mut u: Vec<f64> = (0..=80).map(|i| (0.1 * i as f64).sin() + 0.3).collect();
        let mut v: Vec<f64> = (0..=80).map(|i| (0.07 * i as f64).cos()).collect();
        u[80] = 0.0;
        v[80] = 0.0;
        let a = op.inner(&op.apply(&u), &v);
        let b = op.inner(&u, &op.apply(&v));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn guard_rejects_too_many_modes() {
        let m = WeightedModel::euclidean(1, Weight::Zero, 1.0, Boundary::Dirichlet).unwrap();
        let op = SturmLiouvilleOp::assemble(&m, 64).unwrap();
        assert!(matches!(
            eigen_solve(&op, 17),
            Err(Error::TooManyModes { .. })
        ));
    }
}
