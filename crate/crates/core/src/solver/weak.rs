//! Discrete weak form on hat functions and the damped Newton step.
//!
//! With piecewise linear `n`, the flux of cell `k` is evaluated at the cell
//! midpoint, `F_k = A((n_k + n_{k+1})/2, (n_{k+1} - n_k)/h_k)`, and the mass
//! term is lumped, so the equation for interior node `i` reads
//!
//! ```text
//! R_i = F_{i-1} - F_i + (n_i - b_i) (h_{i-1} + h_i) / 2 = 0.
//! ```
//!
//! The boundary cells use the midpoint density, which stays above 1 even
//! when `j = 1`, so the degenerate coefficient is never inverted.
//!
//! The Newton unknowns are the deviations `w = n - 1` from the sonic value.
//! Cells next to `x = 1` are as small as `1/N^2`, and differencing `n`
//! itself there would put a rounding floor of order `eps N^2` on the flux.

use serde::Serialize;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::model::{flux_with_partials_dev, ModelState};
use crate::numerics::{max_abs, solve_tridiagonal};

/// Iterates must keep `n > j + ADMISSIBILITY_MARGIN` at interior nodes.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-12;

/// One regularization stage of the discrete problem.
#[derive(Debug, Clone, Copy)]
pub struct WeakProblem<'a> {
    pub grid: &'a Grid,
    /// Doping values at the grid nodes.
    pub b: &'a [f64],
    pub alpha: f64,
    pub j: f64,
}

/// `w = n - 1`
pub fn deviation(n: &[f64]) -> Vec<f64> {
    n.iter().map(|v| v - 1.0).collect()
}

/// `n = 1 + w`
pub fn density(w: &[f64]) -> Vec<f64> {
    w.iter().map(|v| 1.0 + v).collect()
}

impl WeakProblem<'_> {
    fn cell_flux(&self, w: &[f64], k: usize) -> (f64, f64, f64) {
        let h = self.grid.width(k);
        let dev = 0.5 * (w[k] + w[k + 1]);
        let p = (w[k + 1] - w[k]) / h;
        let (f, fz, fp) = flux_with_partials_dev(dev, p, self.j, self.alpha);
        // derivatives with respect to w_k and w_{k+1}
        (f, 0.5 * fz - fp / h, 0.5 * fz + fp / h)
    }

    fn check_nodes(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.grid.nodes().len() || self.b.len() != w.len() {
            return Err(Error::Domain("field length does not match the grid".into()));
        }
        let last = w.len() - 1;
        if w[0] != 0.0 || w[last] != 0.0 {
            return Err(Error::Domain("boundary densities must equal 1".into()));
        }
        // the coefficient vanishes at n = j, which is still a valid state;
        // only n < j leaves the admissible set
        let floor = self.j - 1.0;
        match w[1..last].iter().position(|&v| !(v >= floor)) {
            Some(i) => Err(Error::FluxDegeneracy { node: i + 1, value: 1.0 + w[i + 1], j: self.j }),
            None => Ok(()),
        }
    }

    /// Residual vector for the deviation `w = n - 1`, one entry per
    /// interior node.
    pub fn residual(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_nodes(w)?;
        Ok(self.residual_unchecked(w))
    }

    fn residual_unchecked(&self, w: &[f64]) -> Vec<f64> {
        let cells = self.grid.cells();
        let flux: Vec<f64> = (0..cells).map(|k| self.cell_flux(w, k).0).collect();
        (1..cells)
            .map(|i| {
                let mass = 0.5 * (self.grid.width(i - 1) + self.grid.width(i));
                flux[i - 1] - flux[i] + ((1.0 - self.b[i]) + w[i]) * mass
            })
            .collect()
    }

    /// Tridiagonal Jacobian `(lower, diag, upper)` of [`Self::residual`].
    pub fn jacobian(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let cells = self.grid.cells();
        let partials: Vec<(f64, f64)> = (0..cells)
            .map(|k| {
                let (_, d_left, d_right) = self.cell_flux(w, k);
                (d_left, d_right)
            })
            .collect();
        let m = cells - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 1..cells {
            let row = i - 1;
            let mass = 0.5 * (self.grid.width(i - 1) + self.grid.width(i));
            lower[row] = partials[i - 1].0;
            diag[row] = partials[i - 1].1 - partials[i].0 + mass;
            upper[row] = -partials[i].1;
        }
        (lower, diag, upper)
    }

    fn admissible(&self, w: &[f64]) -> bool {
        let last = w.len() - 1;
        let floor = (self.j - 1.0) + ADMISSIBILITY_MARGIN;
        w[1..last].iter().all(|&v| v > floor)
    }
}

/// Weak residual of `state` for doping node values `b`.
pub fn assemble_weak_residual(
    state: &ModelState,
    b: &[f64],
    alpha: f64,
    grid: &Grid,
) -> Result<Vec<f64>> {
    WeakProblem { grid, b, alpha, j: state.j }.residual(&deviation(&state.n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub damping: f64,
    pub halvings: usize,
    pub residual_before: f64,
    pub residual_after: f64,
}

/// One damped Newton update of the interior deviations `w = n - 1`.
///
/// The step is halved while the trial iterate leaves `n > j + margin` or
/// raises the max-norm residual; below `damping_min` the step fails with
/// [`Error::Convergence`] carrying the current iterate.
pub fn newton_step(
    problem: &WeakProblem<'_>,
    w: &[f64],
    residual: &[f64],
    damping_min: f64,
) -> Result<(Vec<f64>, Vec<f64>, StepReport)> {
    let before = max_abs(residual);
    let (lower, diag, upper) = problem.jacobian(w);
    let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
    let fail = || Error::Convergence {
        j: problem.j,
        residual: before,
        iterations: 0,
        last_iterate: density(w),
    };
    let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or_else(fail)?;

    let mut damping = 1.0;
    let mut halvings = 0;
    let mut trial = w.to_vec();
    while damping >= damping_min {
        for (i, d) in delta.iter().enumerate() {
            trial[i + 1] = w[i + 1] + damping * d;
        }
        if problem.admissible(&trial) {
            let r = problem.residual_unchecked(&trial);
            let after = max_abs(&r);
            if after <= before {
                let report = StepReport { damping, halvings, residual_before: before, residual_after: after };
                return Ok((trial, r, report));
            }
        }
        damping *= 0.5;
        halvings += 1;
    }
    Err(fail())
}
