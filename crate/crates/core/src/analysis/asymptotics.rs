use serde::Serialize;

use super::fit::{fit_boundary_exponent, window_nodes, Endpoint, PowerFit, LEFT_WINDOW, MIN_FIT_NODES, RIGHT_WINDOW};
use crate::error::{Error, Result};
use crate::model::{regularized_flux, weighted_ratio_fields};
use crate::numerics::{centered_derivative, poly_extrapolate_to_zero, richardson_doubling, trapezoid};
use crate::profiles::DopingProfile;
use crate::solver::SolutionPair;

/// Relative distance above the applicability threshold inside which the
/// left-slope agreement is reported but not asserted.
pub const NEAR_THRESHOLD_FRACTION: f64 = 0.1;
/// Degree of the polynomial in `(1-x)^(1/2)` used to extrapolate the
/// weighted slope to `x = 1`.
pub const WEIGHTED_SLOPE_DEGREE: usize = 3;
/// Degree of the polynomial in `x` used to extrapolate `rho0` to `x = 0`.
pub const RHO0_DEGREE: usize = 2;
/// Forward-difference nodes `1, 2, 4, 8` feed the left-slope Richardson table.
const LEFT_SLOPE_NODES: [usize; 4] = [1, 2, 4, 8];

/// Smallest `alpha` for which the left slope has a real closed form.
pub fn left_slope_threshold(b0: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (b0 - 1.0).max(0.0).sqrt()
}

/// Closed-form left slope `n_x(0+)`, the smaller root of
/// `2A^2 - alpha A + (b0 - 1) = 0`; `None` below the threshold.
pub fn left_slope_limit(b0: f64, alpha: f64) -> Result<Option<f64>> {
    if !(b0 > 1.0) {
        return Err(Error::Domain(format!("left slope needs b(0) > 1, got {b0}")));
    }
    if !(alpha >= left_slope_threshold(b0)) {
        return Ok(None);
    }
    let mut disc = alpha * alpha - 8.0 * (b0 - 1.0);
    // at the threshold the discriminant is zero up to rounding of alpha^2
    if disc <= 16.0 * f64::EPSILON * alpha * alpha {
        disc = 0.0;
    }
    // (alpha - sqrt(disc)) / 4 without the cancellation for small b0 - 1
    Ok(Some(2.0 * (b0 - 1.0) / (alpha + disc.sqrt())))
}

/// `-1/2 sqrt(I)` for `I = int_0^1 (b - n)`.
pub fn weighted_slope_from_integral(integral: f64) -> Result<f64> {
    if integral < 0.0 {
        return Err(Error::Inconsistent(format!("int (b - n) = {integral} is negative, so E(1) > alpha")));
    }
    Ok(-0.5 * integral.sqrt())
}

/// Predicted `lim (1-x)^(1/2) n_x` at `x = 1` from node values.
pub fn right_weighted_slope_from_values(x: &[f64], n: &[f64], b: &[f64]) -> Result<f64> {
    let integrand: Vec<f64> = b.iter().zip(n).map(|(b, n)| b - n).collect();
    weighted_slope_from_integral(trapezoid(x, &integrand))
}

/// Predicted right weighted slope `B = -1/2 sqrt(int (b - n))` of a solution.
pub fn right_weighted_slope_limit(sol: &SolutionPair, b: &DopingProfile) -> Result<f64> {
    right_weighted_slope_from_values(sol.x(), &sol.n, &b.sample(sol.x()))
}

/// `n_x(0+)` by Richardson extrapolation of the forward differences
/// `(n_m - n_0)/x_m`, `m = 1, 2, 4, 8`, on the uniform left part of the grid.
pub fn fitted_left_slope(x: &[f64], n: &[f64]) -> Result<f64> {
    let need = LEFT_SLOPE_NODES[LEFT_SLOPE_NODES.len() - 1];
    if x.len() < 2 * need + 1 {
        return Err(Error::InsufficientData { have: x.len(), need: 2 * need + 1 });
    }
    let h = x[1] - x[0];
    if (x[need] - need as f64 * h).abs() > 1e-12 * x[need] {
        return Err(Error::Precondition("left slope extrapolation needs a uniform left grid".into()));
    }
    let samples: Vec<f64> = LEFT_SLOPE_NODES.iter().map(|&m| (n[m] - n[0]) / (x[m] - x[0])).collect();
    Ok(richardson_doubling(&samples))
}

/// `lim (1-x)^(1/2) n_x` at `x = 1`, extrapolated from the right window by
/// a least-squares polynomial in `(1-x)^(1/2)`.
pub fn fitted_right_weighted_slope(x: &[f64], n: &[f64]) -> Result<f64> {
    let nodes = window_nodes(x, RIGHT_WINDOW)?;
    if nodes.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientData { have: nodes.len(), need: MIN_FIT_NODES });
    }
    let t: Vec<f64> = nodes.iter().map(|&k| (1.0 - x[k]).sqrt()).collect();
    let y: Vec<f64> = nodes.iter().zip(&t).map(|(&k, t)| t * centered_derivative(x, n, k)).collect();
    Ok(poly_extrapolate_to_zero(&t, &y, WEIGHTED_SLOPE_DEGREE))
}

/// `rho0(0+)` by polynomial extrapolation of `(E - alpha/n)/(n - 1)` over the
/// first eight reported nodes after the boundary skip.
pub fn fitted_rho0_limit(sol: &SolutionPair) -> Result<f64> {
    let fields = weighted_ratio_fields(sol.x(), &sol.state(), sol.alpha)?;
    // rho0 starts at node 1; skip nodes 1 and 2
    let samples: Vec<(f64, f64)> = fields.rho0.into_iter().skip(2).take(MIN_FIT_NODES).collect();
    if samples.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientData { have: samples.len(), need: MIN_FIT_NODES });
    }
    let (t, y): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    Ok(poly_extrapolate_to_zero(&t, &y, RHO0_DEGREE))
}

/// Predicted `rho0(0+) = alpha + (1 - b(0))/A`.
pub fn rho0_limit(alpha: f64, b0: f64, a: f64) -> f64 {
    alpha + (1.0 - b0) / a
}

/// Flux of the first cell minus `alpha`. It tends to zero when `n_x(0+)`
/// is finite and to `lim (n-1)^2/x` when `n - 1` grows like `x^(1/2)`.
pub fn left_flux_offset(x: &[f64], n: &[f64], alpha: f64) -> Result<f64> {
    let flux = regularized_flux(0.5 * (n[0] + n[1]), (n[1] - n[0]) / (x[1] - x[0]), 1.0, alpha)?;
    Ok(flux - alpha)
}

/// A posteriori amplitude `min (n - 1)/sin(pi x)` over interior nodes.
pub fn lower_bound_amplitude(x: &[f64], n: &[f64]) -> f64 {
    let last = x.len() - 1;
    (1..last)
        .map(|k| (n[k] - 1.0) / (std::f64::consts::PI * x[k]).sin())
        .fold(f64::INFINITY, f64::min)
}

/// Predicted and fitted boundary behavior of one solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    #[serde(rename = "A_predicted")]
    pub a_predicted: Option<f64>,
    #[serde(rename = "A_fitted")]
    pub a_fitted: f64,
    #[serde(rename = "A_applicable")]
    pub a_applicable: bool,
    /// `alpha` lies within 10% above the applicability threshold.
    #[serde(rename = "A_near_threshold")]
    pub a_near_threshold: bool,
    #[serde(rename = "A_threshold")]
    pub a_threshold: f64,
    #[serde(rename = "B_predicted")]
    pub b_predicted: f64,
    #[serde(rename = "B_fitted")]
    pub b_fitted: f64,
    /// `|B_predicted^2 - (alpha - E(1))/4|`
    pub identity_gap: f64,
    pub left_exponent: f64,
    pub left_coefficient: f64,
    pub left_r2: f64,
    pub right_exponent: f64,
    pub right_coefficient: f64,
    pub right_r2: f64,
    pub rho0_limit_predicted: Option<f64>,
    pub rho0_limit_fitted: f64,
    /// Estimate of `m` in `n >= 1 + m sin(pi x)`.
    pub lower_bound_amplitude: f64,
    /// See [`left_flux_offset`].
    pub left_flux_offset: f64,
}

/// Builds the asymptotics report of a converged solution of `(b, alpha)`.
pub fn asymptotics_report(sol: &SolutionPair, b: &DopingProfile) -> Result<AsymptoticsReport> {
    let x = sol.x();
    let last = x.len() - 1;
    let b0 = b.eval(0.0)?;
    let a_threshold = left_slope_threshold(b0);
    let a_predicted = left_slope_limit(b0, sol.alpha)?;
    let b_predicted = right_weighted_slope_limit(sol, b)?;
    let left = fit_boundary_exponent(sol, Endpoint::Left, LEFT_WINDOW)?;
    let right: PowerFit = fit_boundary_exponent(sol, Endpoint::Right, RIGHT_WINDOW)?;
    Ok(AsymptoticsReport {
        a_predicted,
        a_fitted: fitted_left_slope(x, &sol.n)?,
        a_applicable: a_predicted.is_some(),
        a_near_threshold: a_predicted.is_some() && sol.alpha < (1.0 + NEAR_THRESHOLD_FRACTION) * a_threshold,
        a_threshold,
        b_predicted,
        b_fitted: fitted_right_weighted_slope(x, &sol.n)?,
        identity_gap: (b_predicted * b_predicted - 0.25 * (sol.alpha - sol.e[last])).abs(),
        left_exponent: left.exponent,
        left_coefficient: left.coefficient,
        left_r2: left.r2,
        right_exponent: right.exponent,
        right_coefficient: right.coefficient,
        right_r2: right.r2,
        rho0_limit_predicted: a_predicted.map(|a| rho0_limit(sol.alpha, b0, a)),
        rho0_limit_fitted: fitted_rho0_limit(sol)?,
        lower_bound_amplitude: lower_bound_amplitude(x, &sol.n),
        left_flux_offset: left_flux_offset(x, &sol.n, sol.alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Grid;

    #[test]
    fn left_slope_examples() {
        let a = left_slope_limit(2.0, 4.0).unwrap().unwrap();
        assert!((a - (1.0 - std::f64::consts::SQRT_2 / 2.0)).abs() < 1e-15);
        assert!((a - 0.2928932).abs() < 1e-7);
        for b0 in [1.5, 2.0, 4.0] {
            let alpha = left_slope_threshold(b0);
            let a = left_slope_limit(b0, alpha).unwrap().unwrap();
            assert!((a - alpha / 4.0).abs() < 1e-12 * alpha);
        }
        assert_eq!(left_slope_limit(2.0, 2.0).unwrap(), None);
        assert!(matches!(left_slope_limit(1.0, 5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn left_slope_vanishes_as_b0_approaches_one() {
        let mut prev = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-8, 1e-12] {
            let a = left_slope_limit(1.0 + e, 3.0).unwrap().unwrap();
            assert!(a > 0.0 && a < prev);
            prev = a;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn smaller_root_solves_the_quadratic() {
        for (b0, alpha) in [(2.0, 5.0), (1.3, 2.0), (3.0, 12.0)] {
            let a = left_slope_limit(b0, alpha).unwrap().unwrap();
            assert!((2.0 * a * a - alpha * a + (b0 - 1.0)).abs() < 1e-12);
            assert!(a <= alpha / 4.0);
        }
    }

    #[test]
    fn weighted_slope_from_unit_and_zero_integrals() {
        assert_eq!(weighted_slope_from_integral(1.0).unwrap(), -0.5);
        assert_eq!(weighted_slope_from_integral(0.0).unwrap(), 0.0);
        assert!(matches!(weighted_slope_from_integral(-0.1), Err(Error::Inconsistent(_))));
        let x: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let n = vec![1.0; 11];
        let b = vec![2.0; 11];
        assert!((right_weighted_slope_from_values(&x, &n, &b).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn left_slope_extrapolation_recovers_smooth_slope() {
        let grid = Grid::build(400, 2.0).unwrap();
        let x = grid.nodes();
        let n: Vec<f64> = x.iter().map(|&t| 1.0 + 0.25 * t - 0.7 * t * t + 2.0 * t * t * t).collect();
        assert!((fitted_left_slope(x, &n).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn weighted_slope_extrapolation_on_exact_expansion() {
        let grid = Grid::build(400, 2.0).unwrap();
        let x = grid.nodes();
        // n - 1 = c1 s^(1/2) + c2 s  gives (1-x)^(1/2) n_x -> -c1/2
        let n: Vec<f64> = x.iter().map(|&t| 1.0 + 0.9 * (1.0 - t).sqrt() - 5.0 / 3.0 * (1.0 - t)).collect();
        let fitted = fitted_right_weighted_slope(x, &n).unwrap();
        assert!((fitted + 0.45).abs() < 0.005 * 0.45, "{fitted}");
    }

    #[test]
    fn amplitude_of_a_sine_profile() {
        let grid = Grid::build(64, 1.0).unwrap();
        let x = grid.nodes();
        let n: Vec<f64> = x.iter().map(|&t| 1.0 + 0.3 * (std::f64::consts::PI * t).sin()).collect();
        assert!((lower_bound_amplitude(x, &n) - 0.3).abs() < 1e-12);
    }
}
