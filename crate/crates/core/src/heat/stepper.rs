use crate::error::{Error, Result};
use crate::operator::SturmLiouvilleOp;

/// Crank–Nicolson for `u_t = -(−Δ_f + W) u` on the nodes of an assembled
/// operator: `(M + dt/2 A) u⁺ = (M - dt/2 A) u` with `A = S + M W`.
#[derive(Debug, Clone)]
pub struct CrankNicolson<'a> {
    op: &'a SturmLiouvilleOp,
    dt: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(op: &'a SturmLiouvilleOp, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let range = op.active();
        let cells = op.grid.cells;
        let w = |i: usize| op.potential.as_ref().map_or(0.0, |w| w[i]);
        let diag = range
            .clone()
            .map(|i| {
                let left = if i > 0 { op.flux[i - 1] } else { 0.0 };
                let right = if i < cells { op.flux[i] } else { 0.0 };
                op.masses[i] + 0.5 * dt * (left + right + op.masses[i] * w(i))
            })
            .collect();
        let off = range
            .clone()
            .take(range.len().saturating_sub(1))
            .map(|i| -0.5 * dt * op.flux[i])
            .collect();
        Ok(Self { op, dt, diag, off })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance a full nodal vector by one step; Dirichlet nodes stay zero.
    pub fn step(&self, u: &mut [f64]) {
        let range = self.op.active();
        let au = self.op.apply(u);
        let mut rhs: Vec<f64> = range
            .clone()
            .map(|i| self.op.masses[i] * (u[i] - 0.5 * self.dt * au[i]))
            .collect();
        solve_spd_tridiagonal(&self.diag, &self.off, &mut rhs);
        u.iter_mut().for_each(|v| *v = 0.0);
        for (j, i) in range.enumerate() {
            u[i] = rhs[j];
        }
    }

    pub fn advance(&self, u: &mut [f64], steps: usize) {
        for _ in 0..steps {
            self.step(u);
        }
    }
}

/// Thomas algorithm for a symmetric, diagonally dominant tridiagonal system.
pub(crate) fn solve_spd_tridiagonal(diag: &[f64], off: &[f64], b: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    b[0] /= d;
    for i in 1..n {
        c[i - 1] = off[i - 1] / d;
        d = diag[i] - off[i - 1] * c[i - 1];
        b[i] = (b[i] - off[i - 1] * b[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        b[i] -= c[i] * b[i + 1];
    }
}

/// Solve `(a I + b L) x = y` for the periodic second-difference matrix `L`
/// (`L x_j = x_{j-1} - 2 x_j + x_{j+1}`) by Sherman–Morrison on the cyclic
/// tridiagonal system.
pub(crate) fn solve_cyclic(a: f64, b: f64, y: &mut [f64]) {
    let n = y.len();
    let diag = a - 2.0 * b;
    let off = b;
    // cyclic system with corners `off`; write it as T + u vᵀ with
    // u = (γ, 0, …, 0, off), v = (1, 0, …, 0, off/γ)
    let gamma = -diag;
    let mut d = vec![diag; n];
    d[0] -= gamma;
    d[n - 1] -= off * off / gamma;
    let thomas = |rhs: &mut [f64]| {
        let mut c = vec![0.0; n];
        let mut piv = d[0];
        rhs[0] /= piv;
        for i in 1..n {
            c[i - 1] = off / piv;
            piv = d[i] - off * c[i - 1];
            rhs[i] = (rhs[i] - off * rhs[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i] * rhs[i + 1];
        }
    };
    thomas(y);
    let mut z = vec![0.0; n];
    z[0] = gamma;
    z[n - 1] = off;
    thomas(&mut z);
    let factor = (y[0] + off / gamma * y[n - 1]) / (1.0 + z[0] + off / gamma * z[n - 1]);
    y.iter_mut().zip(&z).for_each(|(a, b)| *a -= factor * b);
}

/// Strang-split Crank–Nicolson on the `(r, θ)` grid of a `q = 1` warped
/// product: `u_t = Δ_f u + c(r) ∂²_θ u` with `c(r) = ε^{-2} e^{2f(r)}`.
/// Values are stored row-major, one row of `theta` values per radial node.
#[derive(Debug, Clone)]
pub struct FiberStepper<'a> {
    radial: CrankNicolson<'a>,
    coefficients: Vec<f64>,
    theta: usize,
    dt: f64,
}

impl<'a> FiberStepper<'a> {
    pub fn new(
        op: &'a SturmLiouvilleOp,
        coefficients: Vec<f64>,
        theta: usize,
        dt: f64,
    ) -> Result<Self> {
        if theta < 4 {
            return Err(Error::InvalidArgument(format!(
                "fiber grid needs at least 4 points, got {theta}"
            )));
        }
        if coefficients.len() != op.masses.len() {
            return Err(Error::InvalidArgument(
                "one angular coefficient per radial node".into(),
            ));
        }
        Ok(Self {
            radial: CrankNicolson::new(op, 0.5 * dt)?,
            coefficients,
            theta,
            dt,
        })
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.theta as f64
    }

    fn radial_half(&self, u: &mut [f64], column: &mut [f64]) {
        let rows = column.len();
        for j in 0..self.theta {
            for i in 0..rows {
                column[i] = u[i * self.theta + j];
            }
            self.radial.step(column);
            for i in 0..rows {
                u[i * self.theta + j] = column[i];
            }
        }
    }

    fn angular(&self, u: &mut [f64]) {
        let scale = self.dt / (self.dtheta() * self.dtheta());
        for (i, row) in u.chunks_mut(self.theta).enumerate() {
            let x = 0.5 * scale * self.coefficients[i];
            // (I - x L) u⁺ = (I + x L) u
            let n = row.len();
            let explicit: Vec<f64> = (0..n)
                .map(|j| row[j] + x * (row[(j + n - 1) % n] - 2.0 * row[j] + row[(j + 1) % n]))
                .collect();
            row.copy_from_slice(&explicit);
            solve_cyclic(1.0, -x, row);
        }
    }

    pub fn step(&self, u: &mut [f64]) {
        let mut column = vec![0.0; u.len() / self.theta];
        self.radial_half(u, &mut column);
        self.angular(u);
        self.radial_half(u, &mut column);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_solver_inverts() {
        let y0: Vec<f64> = (0..9).map(|j| (j as f64 * 0.7).sin() + 0.2).collect();
        let (a, b) = (1.0, -0.8);
        let mut x = y0.clone();
        solve_cyclic(a, b, &mut x);
        let n = x.len();
        for j in 0..n {
            let lx = x[(j + n - 1) % n] - 2.0 * x[j] + x[(j + 1) % n];
            assert!((a * x[j] + b * lx - y0[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn thomas_inverts() {
        let diag = vec![4.0, 5.0, 3.0, 6.0];
        let off = vec![-1.0, -2.0, 0.5];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = vec![
            4.0 * 1.0 - 1.0 * -2.0,
            -1.0 * 1.0 + 5.0 * -2.0 - 2.0 * 0.5,
            -2.0 * -2.0 + 3.0 * 0.5 + 0.5 * 3.0,
            0.5 * 0.5 + 6.0 * 3.0,
        ];
        solve_spd_tridiagonal(&diag, &off, &mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
