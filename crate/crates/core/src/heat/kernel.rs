use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Boundary, WeightedModel};
use crate::operator::tridiag::RESIDUAL_TOL;
use crate::operator::{eigen_solve, EigenDecomposition, PoleCondition, SturmLiouvilleOp};

/// Relative size of the truncation tail, measured against the on-diagonal
/// value `H(pole, pole, t)`, that a kernel evaluation tolerates.
pub const TAIL_REL: f64 = 1e-12;

/// Values below `RELIABLE_REL · H(pole, pole, t)` are dominated by the
/// truncation and rounding of the spectral sum; verifiers skip them.
pub const RELIABLE_REL: f64 = 1e-8;

/// Pole-anchored heat kernel `H(pole, r, t) = Σ e^{-λ_k t} ψ_k(0) ψ_k(r)` of
/// the discrete radial operator.
///
/// Discrete completeness gives `Σ_{all k} ψ_k(0)² = 1 / m_0`, so the omitted
/// modes contribute at most `e^{-λ_K t} / m_0` at the pole and, by
/// Cauchy–Schwarz, `e^{-λ_K t} / √(m_0 m_i)` at node `i`, where `λ_K` is the
/// largest computed eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralKernel {
    pub decomposition: EigenDecomposition,
    pub bc: Boundary,
    pub pole: PoleCondition,
    /// Smallest time at which the pole tail bound is below [`TAIL_REL`].
    pub t_min: f64,
    /// `-ln(TAIL_REL m_0 ψ_1(0)²)`: the exponent the spectral gap must beat.
    tail_exponent: f64,
}

impl SpectralKernel {
    /// Kernel with enough modes to be reliable down to `t_min`. Fails with
    /// [`Error::TimeTooSmall`] when the grid's mode limit cannot reach it.
    pub fn new(model: &WeightedModel, cells: usize, t_min: f64) -> Result<Self> {
        Self::with_pole(model, cells, t_min, PoleCondition::Natural)
    }

    pub fn with_pole(
        model: &WeightedModel,
        cells: usize,
        t_min: f64,
        pole: PoleCondition,
    ) -> Result<Self> {
        if !(t_min > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel time must be positive, got {t_min}"
            )));
        }
        let op = SturmLiouvilleOp::assemble_with_pole(model, cells, pole)?;
        let first = eigen_solve(&op, 1)?;
        let exponent = tail_exponent(&first)?;
        let lambda1 = first.eigenvalues[0];
        let limit = op.mode_limit();
        let sym = op.symmetric_form()?;
        let needed = sym.count_below(lambda1 + exponent / t_min) + 1;
        if needed > limit {
            let top = sym.bisect(limit - 1);
            return Err(Error::TimeTooSmall {
                t: t_min,
                t_min: exponent / (top - lambda1),
            });
        }
        Self::from_decomposition(eigen_solve(&op, needed.max(2))?, model.bc, pole)
    }

    /// Kernel from a fixed number of modes.
    pub fn with_modes(model: &WeightedModel, cells: usize, k: usize) -> Result<Self> {
        let op = SturmLiouvilleOp::assemble(model, cells)?;
        Self::from_decomposition(eigen_solve(&op, k)?, model.bc, PoleCondition::Natural)
    }

    pub fn from_decomposition(
        decomposition: EigenDecomposition,
        bc: Boundary,
        pole: PoleCondition,
    ) -> Result<Self> {
        let exponent = tail_exponent(&decomposition)?;
        let values = &decomposition.eigenvalues;
        let gap = values[values.len() - 1] - values[0];
        let t_min = if gap > 0.0 {
            exponent / gap
        } else {
            f64::INFINITY
        };
        Ok(Self {
            decomposition,
            bc,
            pole,
            t_min,
            tail_exponent: exponent,
        })
    }

    pub fn modes(&self) -> usize {
        self.decomposition.eigenvalues.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.decomposition.eigenvalues[0]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.decomposition.nodes
    }

    pub fn radius(&self) -> f64 {
        *self.decomposition.nodes.last().expect("grid has nodes")
    }

    fn spacing(&self) -> f64 {
        self.decomposition.nodes[1]
    }

    /// Index of the node the kernel is anchored at (1 for a Dirichlet pole).
    fn anchor(&self) -> usize {
        usize::from(self.pole == PoleCondition::Dirichlet)
    }

    /// Upper bound on the omitted modes' contribution at node `i`.
    pub fn tail_bound(&self, i: usize, t: f64) -> f64 {
        let m = &self.decomposition.masses;
        let top = *self
            .decomposition
            .eigenvalues
            .last()
            .expect("at least one mode");
        (-top * t).exp() / (m[self.anchor()] * m[i]).sqrt()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kernel time must be positive, got {t}"
            )));
        }
        if t < self.t_min {
            return Err(Error::TimeTooSmall {
                t,
                t_min: self.t_min,
            });
        }
        Ok(())
    }

    fn weights(&self, t: f64, derivative: bool) -> Vec<f64> {
        let a = self.anchor();
        self.decomposition
            .eigenvalues
            .iter()
            .zip(&self.decomposition.eigenvectors)
            .map(|(l, v)| {
                let w = (-l * t).exp() * v[a];
                if derivative {
                    -l * w
                } else {
                    w
                }
            })
            .collect()
    }

    fn nodal_sum(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.decomposition.nodes.len();
        let mut out = vec![0.0; n];
        for (w, v) in weights.iter().zip(&self.decomposition.eigenvectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
        out
    }

    /// `H(pole, r_i, t)` at every grid node.
    pub fn eval_nodes(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok(self.nodal_sum(&self.weights(t, false)))
    }

    /// `∂_t H(pole, r_i, t)` at every grid node, differentiated term by term.
    pub fn time_derivative_nodes(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok(self.nodal_sum(&self.weights(t, true)))
    }

    /// `H(pole, r, t)` with cubic interpolation between nodes; the stencil
    /// is reflected through the pole with the parity of the radial sector.
    pub fn eval(&self, r: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let radius = self.radius();
        if !(r >= 0.0) || r > radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain { r, radius });
        }
        let weights = self.weights(t, false);
        let value_at = |i: usize| -> f64 {
            weights
                .iter()
                .zip(&self.decomposition.eigenvectors)
                .map(|(w, v)| w * v[i])
                .sum()
        };
        let h = self.spacing();
        let last = self.decomposition.nodes.len() - 1;
        let x = r / h;
        let base = (x.floor() as isize - 1).clamp(-1, last as isize - 3);
        let odd = self.pole == PoleCondition::Dirichlet;
        let mut total = 0.0;
        for s in 0..4 {
            let j = base + s;
            let mut lagrange = 1.0;
            for o in 0..4 {
                if o != s {
                    let jo = (base + o) as f64;
                    lagrange *= (x - jo) / (j as f64 - jo);
                }
            }
            let v = if j >= 0 {
                value_at(j as usize)
            } else if odd {
                -value_at((-j) as usize)
            } else {
                value_at((-j) as usize)
            };
            total += lagrange * v;
        }
        Ok(total)
    }

    /// Size of the numerical noise in [`Self::eval_nodes`] at each node:
    /// the tail bound plus the eigenvector accuracy of the solver applied to
    /// every term of the spectral sum.
    pub fn noise_nodes(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let w: Vec<f64> = self.weights(t, false).iter().map(|x| x.abs()).collect();
        let mut out = vec![0.0; self.decomposition.nodes.len()];
        for (wk, v) in w.iter().zip(&self.decomposition.eigenvectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += wk * x.abs();
            }
        }
        Ok(out
            .iter()
            .enumerate()
            .map(|(i, a)| self.tail_bound(i, t) + RESIDUAL_TOL * a)
            .collect())
    }

    /// Smallest kernel value at time `t` that verifiers treat as resolved.
    pub fn reliable_floor(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let a = self.anchor();
        let diag: f64 = self
            .weights(t, false)
            .iter()
            .zip(&self.decomposition.eigenvectors)
            .map(|(w, v)| w * v[a])
            .sum();
        Ok(RELIABLE_REL * diag)
    }

    /// `∫ H(pole, ·, t) e^{-f} dv` by the discrete masses.
    pub fn mass(&self, t: f64) -> Result<f64> {
        let u = self.eval_nodes(t)?;
        Ok(u.iter()
            .zip(&self.decomposition.masses)
            .map(|(a, m)| a * m)
            .sum())
    }
}

fn tail_exponent(dec: &EigenDecomposition) -> Result<f64> {
    let anchor = dec
        .eigenvectors
        .first()
        .map(|v| if v[0] == 0.0 { 1 } else { 0 })
        .ok_or_else(|| Error::InvalidArgument("empty eigen decomposition".into()))?;
    let psi = dec.eigenvectors[0][anchor];
    let m0 = dec.masses[anchor];
    Ok(-(TAIL_REL * m0 * psi * psi).ln())
}

/// `(4πt)^{-n/2} e^{-r²/4t}`, the Euclidean heat kernel.
pub fn euclidean_kernel(n: usize, r: f64, t: f64) -> f64 {
    (4.0 * std::f64::consts::PI * t).powf(-(n as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}
