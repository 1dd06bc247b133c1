//! Interior subsonic solutions by Newton continuation in the regularization
//! level `j -> 1`.
//!
//! Each stage solves the discrete weak problem with the `j`-regularized
//! flux, warm-started from the previous stage. The last stage (`j = 1`) is
//! the degenerate problem itself; its field is rebuilt from the density by
//! [`reconstruct_e`] and the result is checked against the sonic pinning,
//! interior subsonicity and the bound `n <= sup b`.

mod export;
mod grid;
mod weak;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use export::{solution_rows, write_solution_csv, SolutionRow};
pub use grid::{Grid, MAX_MESH_RATIO, MIN_NODES};
pub use weak::{
    assemble_weak_residual, density, deviation, newton_step, StepReport, WeakProblem, ADMISSIBILITY_MARGIN,
};

use crate::error::{Error, Result};
use crate::model::{reconstruct_e, ModelState};
use crate::numerics::max_abs;
use crate::profiles::{DopingProfile, PhysicalParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Number of grid cells `N`.
    pub cells: usize,
    pub grading_exponent: f64,
    pub j_schedule: Vec<f64>,
    /// Max-norm tolerance on the weak residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub damping_min: f64,
    /// Multiplier on the initial-guess amplitude `(inf b - 1)/2`.
    pub initial_amplitude_scale: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cells: 400,
            grading_exponent: 2.0,
            j_schedule: vec![0.5, 0.9, 0.99, 0.999, 1.0],
            newton_tol: 1e-10,
            max_newton_iters: 100,
            damping_min: 1e-8,
            initial_amplitude_scale: 1.0,
        }
    }
}

impl SolveOptions {
    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.j_schedule;
        if s.is_empty() || s[s.len() - 1] != 1.0 {
            return Err(Error::Config("j schedule must end at 1".into()));
        }
        if s.iter().any(|&j| !(j > 0.0 && j <= 1.0)) {
            return Err(Error::Config("j schedule entries must lie in (0, 1]".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("j schedule must be strictly increasing".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Config("newton_tol must be positive".into()));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::Config("max_newton_iters must be at least 1".into()));
        }
        if !(self.damping_min > 0.0 && self.damping_min <= 1.0) {
            return Err(Error::Config("damping_min must lie in (0, 1]".into()));
        }
        if !(self.initial_amplitude_scale > 0.0 && self.initial_amplitude_scale < 2.0) {
            return Err(Error::Config("initial amplitude scale must lie in (0, 2)".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::build(self.cells, self.grading_exponent)
    }
}

/// Convergence record of one regularization stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub j: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm change of `n` from the previous stage (from the initial
    /// guess for the first stage).
    pub sup_change: f64,
    /// Max-norm residual after every accepted step.
    pub residual_history: Vec<f64>,
}

/// Converged interior subsonic solution `(n, E)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPair {
    pub grid: Grid,
    pub n: Vec<f64>,
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    pub alpha: f64,
    pub profile_id: String,
    pub residual_norm: f64,
    pub j_final: f64,
    pub newton_tol: f64,
    pub stages: Vec<StageReport>,
}

impl SolutionPair {
    pub fn x(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn state(&self) -> ModelState {
        ModelState { n: self.n.clone(), e: self.e.clone(), j: self.j_final }
    }
}

/// Deviation `n - 1` of the initial guess `1 + scale * (inf b - 1)/2 * sin(pi x)`.
pub fn initial_guess(grid: &Grid, inf_b: f64, scale: f64) -> Vec<f64> {
    let amp = scale * 0.5 * (inf_b - 1.0);
    let last = grid.cells();
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(k, &x)| if k == 0 || k == last { 0.0 } else { amp * (PI * x).sin() })
        .collect()
}

/// Newton iteration on the deviation `w = n - 1` for one stage until the
/// max-norm residual is below `tol`, followed by one polishing step when it
/// still reduces the residual.
pub fn solve_stage(problem: &WeakProblem<'_>, start: Vec<f64>, opts: &SolveOptions) -> Result<(Vec<f64>, StageReport)> {
    let mut w = start;
    let mut residual = problem.residual(&w)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let with_iterations = |e: Error, iterations: usize| match e {
        Error::Convergence { j, residual, last_iterate, .. } => Error::Convergence { j, residual, iterations, last_iterate },
        other => other,
    };
    while max_abs(&residual) > opts.newton_tol {
        if iterations == opts.max_newton_iters {
            return Err(Error::Convergence {
                j: problem.j,
                residual: max_abs(&residual),
                iterations,
                last_iterate: density(&w),
            });
        }
        let (next, r, report) =
            newton_step(problem, &w, &residual, opts.damping_min).map_err(|e| with_iterations(e, iterations))?;
        iterations += 1;
        history.push(report.residual_after);
        w = next;
        residual = r;
    }
    if let Ok((next, r, report)) = newton_step(problem, &w, &residual, 1.0) {
        if report.residual_after < report.residual_before {
            iterations += 1;
            history.push(report.residual_after);
            w = next;
            residual = r;
        }
    }
    let report = StageReport {
        j: problem.j,
        iterations,
        residual: max_abs(&residual),
        sup_change: 0.0,
        residual_history: history,
    };
    Ok((w, report))
}

/// Solves for the interior subsonic solution of `(b, alpha)`.
pub fn continuation_solve(b: &DopingProfile, alpha: f64, opts: &SolveOptions) -> Result<SolutionPair> {
    let params = PhysicalParams::new(alpha)?;
    opts.validate()?;
    let grid = opts.grid()?;
    let b_nodes = b.sample(grid.nodes());
    let mut w = initial_guess(&grid, b.inf_b(), opts.initial_amplitude_scale);
    let mut stages = Vec::with_capacity(opts.j_schedule.len());
    for &j in &opts.j_schedule {
        let problem = WeakProblem { grid: &grid, b: &b_nodes, alpha: params.alpha(), j };
        let previous = w.clone();
        let (next, mut report) = solve_stage(&problem, w, opts)?;
        report.sup_change = next.iter().zip(&previous).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        stages.push(report);
        w = next;
    }
    let n = density(&w);
    let e = reconstruct_e(grid.nodes(), &n, b, params.alpha());
    let residual_norm = stages.last().map(|s| s.residual).unwrap_or(f64::INFINITY);
    let sol = SolutionPair {
        grid,
        n,
        e,
        alpha: params.alpha(),
        profile_id: b.id(),
        residual_norm,
        j_final: 1.0,
        newton_tol: opts.newton_tol,
        stages,
    };
    post_check(&sol, b)?;
    Ok(sol)
}

fn post_check(sol: &SolutionPair, b: &DopingProfile) -> Result<()> {
    let last = sol.n.len() - 1;
    if sol.n[0] != 1.0 || sol.n[last] != 1.0 {
        return Err(Error::PostCheck("boundary densities are not pinned to 1".into()));
    }
    if let Some(k) = sol.n[1..last].iter().position(|&v| !(v > 1.0)) {
        return Err(Error::PostCheck(format!("n = {} is not subsonic at node {}", sol.n[k + 1], k + 1)));
    }
    let cap = b.sup_b() + 10.0 * sol.newton_tol;
    if let Some((k, v)) = sol.n.iter().enumerate().find(|(_, &v)| v > cap) {
        return Err(Error::PostCheck(format!("n = {v} exceeds sup b = {} at node {k}", b.sup_b())));
    }
    if !(sol.residual_norm <= sol.newton_tol) {
        return Err(Error::PostCheck(format!("residual {} above tolerance", sol.residual_norm)));
    }
    Ok(())
}

/// Two independent solves on the same grid.
pub fn solve_pair(
    b1: &DopingProfile,
    b2: &DopingProfile,
    alpha: f64,
    opts: &SolveOptions,
) -> Result<(SolutionPair, SolutionPair)> {
    Ok((continuation_solve(b1, alpha, opts)?, continuation_solve(b2, alpha, opts)?))
}
