use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit_line;
use crate::solver::SolutionPair;

/// Minimum number of grid nodes a fit window must contain.
pub const MIN_FIT_NODES: usize = 8;
/// Nodes next to each boundary that fit windows leave out.
pub const BOUNDARY_SKIP: usize = 2;
/// Default left window in `x`.
pub const LEFT_WINDOW: (f64, f64) = (1e-2, 1e-1);
/// Default right window in `x`, i.e. `1 - x` in `(1e-3, 1e-1)`.
pub const RIGHT_WINDOW: (f64, f64) = (1.0 - 1e-1, 1.0 - 1e-3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

impl Endpoint {
    /// Distance of `x` to this endpoint.
    pub fn distance(self, x: f64) -> f64 {
        match self {
            Endpoint::Left => x,
            Endpoint::Right => 1.0 - x,
        }
    }
}

/// `y ~ coefficient * d^exponent`, fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r2: f64,
}

/// Least-squares fit of `ln y` against `ln d`.
pub fn fit_power_law(d: &[f64], y: &[f64]) -> Result<PowerFit> {
    if d.len() != y.len() {
        return Err(Error::Domain("fit samples have different lengths".into()));
    }
    if d.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientData { have: d.len(), need: MIN_FIT_NODES });
    }
    if let Some(i) = d.iter().zip(y).position(|(&d, &y)| !(d > 0.0 && y > 0.0)) {
        return Err(Error::Domain(format!("power-law fit needs positive data, sample {i} is ({}, {})", d[i], y[i])));
    }
    let ld: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let line = fit_line(&ld, &ly);
    Ok(PowerFit { coefficient: line.intercept.exp(), exponent: line.slope, r2: line.r2 })
}

/// Interior node indices with `x` strictly inside `window`, leaving out the
/// [`BOUNDARY_SKIP`] nodes nearest each boundary.
pub fn window_nodes(x: &[f64], window: (f64, f64)) -> Result<Vec<usize>> {
    let (lo, hi) = window;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::Domain(format!("fit window ({lo}, {hi}) must lie inside (0, 1)")));
    }
    let last = x.len().saturating_sub(1);
    let first = BOUNDARY_SKIP + 1;
    let end = last.saturating_sub(BOUNDARY_SKIP);
    Ok((first..end).filter(|&k| x[k] > lo && x[k] < hi).collect())
}

/// Power-law fit of `n - 1` in the distance to `endpoint` over the nodes
/// of `x` inside `window`.
pub fn fit_exponent_on_nodes(x: &[f64], n: &[f64], endpoint: Endpoint, window: (f64, f64)) -> Result<PowerFit> {
    let nodes = window_nodes(x, window)?;
    if nodes.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientData { have: nodes.len(), need: MIN_FIT_NODES });
    }
    let d: Vec<f64> = nodes.iter().map(|&k| endpoint.distance(x[k])).collect();
    let y: Vec<f64> = nodes.iter().map(|&k| n[k] - 1.0).collect();
    fit_power_law(&d, &y)
}

/// Fitted boundary exponent of `n - 1` for a computed solution.
pub fn fit_boundary_exponent(sol: &SolutionPair, endpoint: Endpoint, window: (f64, f64)) -> Result<PowerFit> {
    fit_exponent_on_nodes(sol.x(), &sol.n, endpoint, window)
}
