//! Symmetric tridiagonal eigensolver: Sturm-count bisection for the
//! eigenvalues, inverse iteration with partial pivoting for the vectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                d.len(),
                e.len()
            )));
        }
        if d.iter().chain(&e).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "tridiagonal entries must be finite".into(),
            ));
        }
        Ok(Self { d, e })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.e[i].abs() } else { 0.0 };
                self.d[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.d[i] * x[i];
                if i > 0 {
                    s += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.e[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - left - right);
            hi = hi.max(self.d[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.e.iter().map(|v| v * v).fold(1.0, f64::max);
        let mut count = 0;
        let mut q = self.d[0] - x;
        for i in 0.. {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.len() {
                break;
            }
            q = self.d[i + 1] - x - self.e[i] * self.e[i] / q;
        }
        count
    }

    /// Eigenvalue with 0-based `index` in ascending order, by bisection to
    /// a few ulps of the matrix norm.
    pub fn bisect(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = self.norm().max(f64::MIN_POSITIVE);
        let spread = hi - lo;
        lo -= 2.0 * f64::EPSILON * scale + 1e-300;
        hi += 2.0 * f64::EPSILON * spread.max(scale) + 1e-300;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * (lo.abs() + hi.abs()) {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `(T - shift I) x = b` by Gaussian elimination with partial
    /// pivoting; exactly zero pivots are replaced by `tiny`.
    fn shifted_solve(&self, shift: f64, b: &mut [f64], tiny: f64) {
        let n = self.len();
        let mut d: Vec<f64> = self.d.iter().map(|v| v - shift).collect();
        let mut du = self.e.clone();
        let mut dl = self.e.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let guard = |v: f64| if v == 0.0 { tiny } else { v };
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                d[i] = guard(d[i]);
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                let tb = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tb - fact * b[i + 1];
            }
            dl[i] = 0.0;
        }
        d[n - 1] = guard(d[n - 1]);
        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }
}

/// Eigenpairs of a symmetric tridiagonal matrix in the Euclidean inner product.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Relative residual bound `‖Tv - λv‖ ≤ RESIDUAL_TOL ‖T‖`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// The `k` smallest eigenvalues only.
pub fn smallest_values(t: &SymTridiagonal, k: usize) -> Vec<f64> {
    (0..k.min(t.len())).map(|i| t.bisect(i)).collect()
}

/// The `k` smallest eigenpairs with unit Euclidean eigenvectors.
pub fn smallest_pairs(t: &SymTridiagonal, k: usize) -> Result<TridiagonalEigen> {
    let n = t.len();
    let k = k.min(n);
    let norm = t.norm().max(f64::MIN_POSITIVE);
    let bound = RESIDUAL_TOL * norm;
    let tiny = f64::EPSILON * norm;
    let cluster_gap = 1e-5 * norm;
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);

    for index in 0..k {
        let lambda = t.bisect(index);
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895 * (index as f64 + 1.0)).sin()
            })
            .collect();
        normalize(&mut x);
        let cluster_start = values
            .iter()
            .rposition(|&v: &f64| lambda - v >= cluster_gap)
            .map_or(0, |p| p + 1);
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < 8 {
            iterations += 1;
            t.shifted_solve(lambda, &mut x, tiny);
            for prev in &vectors[cluster_start..] {
                let c = dot(&x, prev);
                x.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
            }
            if normalize(&mut x) == 0.0 || x.iter().any(|v| !v.is_finite()) {
                break;
            }
            let tx = t.apply(&x);
            let rq = dot(&x, &tx);
            residual = tx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - rq * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= bound && iterations >= 2 {
                break;
            }
        }
        if !(residual <= bound) {
            return Err(Error::EigenConvergence {
                index,
                residual,
                bound,
                iterations,
            });
        }
        // sign convention: first nonnegligible entry positive
        if let Some(&first) = x.iter().find(|v| v.abs() > 1e-8) {
            if first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let tx = t.apply(&x);
        let rq = dot(&x, &tx);
        values.push(rq);
        vectors.push(x);
        residuals.push(residual);
    }
    Ok(TridiagonalEigen {
        values,
        vectors,
        residuals,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 200;
        let t = laplacian(n);
        let eig = smallest_pairs(&t, 10).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
        for a in 0..10 {
            for b in 0..10 {
                let g = dot(&eig.vectors[a], &eig.vectors[b]);
                assert!((g - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sturm_count_matches_bisection() {
        let t =
            SymTridiagonal::new(vec![4.0, 1.0, 3.0, -2.0, 0.5], vec![0.3, -1.2, 0.7, 2.0]).unwrap();
        let vals = smallest_values(&t, 5);
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(t.count_below(v - 1e-9), i);
            assert_eq!(t.count_below(v + 1e-9), i + 1);
        }
        // trace is preserved
        let sum: f64 = vals.iter().sum();
        assert!((sum - 6.5).abs() < 1e-12);
    }
}
