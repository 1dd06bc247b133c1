use serde::Serialize;

use super::fit::{window_nodes, MIN_FIT_NODES, RIGHT_WINDOW};
use super::asymptotics::WEIGHTED_SLOPE_DEGREE;
use crate::error::{Error, Result};
use crate::numerics::{centered_derivative, max_abs, poly_extrapolate_to_zero, trapezoid};
use crate::profiles::{profile_order_with_samples, profile_sup_distance_with_samples, DopingProfile, ProfileOrder};
use crate::solver::SolutionPair;

/// Radii are capped at this value.
pub const MAX_RADIUS: f64 = 0.5;
/// Multiple of `ratio * b_dist` that bounds the local differences.
pub const RADIUS_FACTOR: f64 = 10.0;
/// Identical profiles must give solutions within this multiple of the
/// Newton tolerance.
pub const UNIQUENESS_FACTOR: f64 = 100.0;

fn same_grid(sol1: &SolutionPair, sol2: &SolutionPair) -> Result<()> {
    if sol1.grid != sol2.grid {
        return Err(Error::IncomparableGrids);
    }
    Ok(())
}

/// Dense sampling used for profile distances and order: ten per grid cell.
fn check_samples(sol: &SolutionPair) -> usize {
    10 * sol.grid.cells()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ok: bool,
    /// Node where `n1 - n2` is smallest, and that value.
    pub worst_node: usize,
    pub worst_value: f64,
    pub tol: f64,
}

/// Checks `n1 >= n2 - tol` at every node for `b1` dominating `b2`.
pub fn check_comparison(
    sol1: &SolutionPair,
    sol2: &SolutionPair,
    order: ProfileOrder,
    tol: f64,
) -> Result<ComparisonReport> {
    same_grid(sol1, sol2)?;
    if order != ProfileOrder::Dominates {
        return Err(Error::Precondition(format!(
            "comparison needs b1 >= b2 on [0, 1], got order {order:?}"
        )));
    }
    let (worst_node, worst_value) = sol1
        .n
        .iter()
        .zip(&sol2.n)
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc });
    Ok(ComparisonReport { ok: worst_value >= -tol, worst_node, worst_value, tol })
}

/// Discrete norms of the difference of two solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub sup_n_diff: f64,
    pub weighted_deriv_diff: f64,
    #[serde(rename = "E_c1_diff")]
    pub e_c1_diff: f64,
    pub b_dist: f64,
    /// Sum of the three norms over `b_dist`; absent when `b_dist = 0`.
    pub ratio: Option<f64>,
    pub order: ProfileOrder,
    /// `n1 >= n2 - tol` at every node when `b1` dominates `b2` (and the
    /// mirrored check when it is dominated); false for incomparable profiles.
    pub comparison_ok: bool,
    pub e1_minus_e2_at_1: f64,
}

impl StabilityReport {
    pub fn numerator(&self) -> f64 {
        self.sup_n_diff + self.weighted_deriv_diff + self.e_c1_diff
    }
}

/// Norms of `(n1 - n2, E1 - E2)` against `|b1 - b2|`.
///
/// The weighted derivative norm skips the two nodes next to each boundary.
/// `(E1 - E2)_x` is taken from the field equation, `E_x = n - b`.
pub fn stability_norms(
    sol1: &SolutionPair,
    sol2: &SolutionPair,
    b1: &DopingProfile,
    b2: &DopingProfile,
    tol: f64,
) -> Result<StabilityReport> {
    same_grid(sol1, sol2)?;
    let x = sol1.x();
    let last = x.len() - 1;
    let dn: Vec<f64> = sol1.n.iter().zip(&sol2.n).map(|(a, b)| a - b).collect();
    let de: Vec<f64> = sol1.e.iter().zip(&sol2.e).map(|(a, b)| a - b).collect();
    let (bv1, bv2) = (b1.sample(x), b2.sample(x));
    let dex: Vec<f64> = (0..=last).map(|k| (sol1.n[k] - bv1[k]) - (sol2.n[k] - bv2[k])).collect();
    let weighted_deriv_diff = (3..=last.saturating_sub(3))
        .map(|k| ((1.0 - x[k]).sqrt() * centered_derivative(x, &dn, k)).abs())
        .fold(0.0, f64::max);
    let samples = check_samples(sol1);
    let b_dist = profile_sup_distance_with_samples(b1, b2, samples);
    let order = profile_order_with_samples(b1, b2, 0.0, samples);
    let min_diff = dn.iter().copied().fold(f64::INFINITY, f64::min);
    let max_diff = dn.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let comparison_ok = match order {
        ProfileOrder::Dominates => min_diff >= -tol,
        ProfileOrder::Dominated => max_diff <= tol,
        ProfileOrder::Incomparable => false,
    };
    let mut report = StabilityReport {
        sup_n_diff: max_abs(&dn),
        weighted_deriv_diff,
        e_c1_diff: max_abs(&de) + max_abs(&dex),
        b_dist,
        ratio: None,
        order,
        comparison_ok,
        e1_minus_e2_at_1: de[last].abs(),
    };
    if b_dist > 0.0 {
        report.ratio = Some(report.numerator() / b_dist);
    } else {
        let limit = UNIQUENESS_FACTOR * sol1.newton_tol.max(sol2.newton_tol);
        if report.numerator() > limit {
            return Err(Error::Inconsistent(format!(
                "identical profiles gave solutions differing by {:e} (limit {limit:e})",
                report.numerator()
            )));
        }
    }
    Ok(report)
}

/// Empirical neighborhood radii of the local stability estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntrinsicRadii {
    pub delta0_hat: f64,
    pub delta1_hat: f64,
    /// `RADIUS_FACTOR * ratio * b_dist`
    pub threshold: f64,
    /// `|sqrt(int (b1 - n1)) - sqrt(int (b2 - n2))|`, the limit of
    /// `|n1 - n2|/(1-x)^(1/2)` at `x = 1`.
    pub weighted_ratio_limit_predicted: f64,
    /// Extrapolation of `|n1 - n2|/(1-x)^(1/2)` from the right window.
    pub weighted_ratio_limit_fitted: f64,
    pub weighted_ratio_finite: bool,
    /// Fitted limit does not exceed `threshold`.
    pub weighted_ratio_bounded: bool,
}

pub fn estimate_intrinsic_radii(
    sol1: &SolutionPair,
    sol2: &SolutionPair,
    b1: &DopingProfile,
    b2: &DopingProfile,
) -> Result<IntrinsicRadii> {
    let report = stability_norms(sol1, sol2, b1, b2, 0.0)?;
    if report.order != ProfileOrder::Dominates {
        return Err(Error::Precondition(format!("radii need b1 >= b2, got order {:?}", report.order)));
    }
    let x = sol1.x();
    let last = x.len() - 1;
    let dn: Vec<f64> = sol1.n.iter().zip(&sol2.n).map(|(a, b)| a - b).collect();

    let deficit = |sol: &SolutionPair, b: &DopingProfile| {
        let v: Vec<f64> = b.sample(x).iter().zip(&sol.n).map(|(b, n)| b - n).collect();
        trapezoid(x, &v).max(0.0).sqrt()
    };
    let predicted = (deficit(sol1, b1) - deficit(sol2, b2)).abs();
    let nodes = window_nodes(x, RIGHT_WINDOW)?;
    if nodes.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientData { have: nodes.len(), need: MIN_FIT_NODES });
    }
    let t: Vec<f64> = nodes.iter().map(|&k| (1.0 - x[k]).sqrt()).collect();
    let y: Vec<f64> = nodes.iter().zip(&t).map(|(&k, t)| dn[k].abs() / t).collect();
    let fitted = poly_extrapolate_to_zero(&t, &y, WEIGHTED_SLOPE_DEGREE).abs();

    let Some(ratio) = report.ratio else {
        return Ok(IntrinsicRadii {
            delta0_hat: MAX_RADIUS,
            delta1_hat: MAX_RADIUS,
            threshold: 0.0,
            weighted_ratio_limit_predicted: predicted,
            weighted_ratio_limit_fitted: fitted,
            weighted_ratio_finite: fitted.is_finite(),
            weighted_ratio_bounded: true,
        });
    };
    let threshold = RADIUS_FACTOR * ratio * report.b_dist;

    // left: |d| + |d_x| on [0, delta)
    let left_value = |k: usize| {
        let dx = if k == 0 {
            (dn[1] - dn[0]) / (x[1] - x[0])
        } else {
            centered_derivative(x, &dn, k)
        };
        dn[k].abs() + dx.abs()
    };
    let delta0_hat = (0..last)
        .find(|&k| left_value(k) > threshold)
        .map_or(MAX_RADIUS, |k| x[k].min(MAX_RADIUS));
    // right: |d|/(1-x)^(1/2) on (1 - delta, 1)
    let delta1_hat = (1..last)
        .rev()
        .find(|&k| dn[k].abs() / (1.0 - x[k]).sqrt() > threshold)
        .map_or(MAX_RADIUS, |k| (1.0 - x[k]).min(MAX_RADIUS));

    Ok(IntrinsicRadii {
        delta0_hat,
        delta1_hat,
        threshold,
        weighted_ratio_limit_predicted: predicted,
        weighted_ratio_limit_fitted: fitted,
        weighted_ratio_finite: fitted.is_finite(),
        weighted_ratio_bounded: fitted <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{continuation_solve, solve_pair, SolveOptions};

    fn opts() -> SolveOptions {
        SolveOptions::default().with_cells(200)
    }

    #[test]
    fn identical_solutions_give_zero_norms() {
        let b = DopingProfile::constant(2.0).unwrap();
        let sol = continuation_solve(&b, 6.0, &opts()).unwrap();
        let report = stability_norms(&sol, &sol, &b, &b, 1e-8).unwrap();
        assert_eq!(report.numerator(), 0.0);
        assert_eq!(report.b_dist, 0.0);
        assert_eq!(report.ratio, None);
        assert!(report.comparison_ok);
        let cmp = check_comparison(&sol, &sol, ProfileOrder::Dominates, 0.0).unwrap();
        assert!(cmp.ok);
        assert_eq!(cmp.worst_value, 0.0);
        let radii = estimate_intrinsic_radii(&sol, &sol, &b, &b).unwrap();
        assert_eq!((radii.delta0_hat, radii.delta1_hat), (0.5, 0.5));
    }

    #[test]
    fn ordered_constants() {
        let (b1, b2) = (DopingProfile::constant(3.0).unwrap(), DopingProfile::constant(2.0).unwrap());
        let (s1, s2) = solve_pair(&b1, &b2, 6.0, &opts()).unwrap();
        let cmp = check_comparison(&s1, &s2, ProfileOrder::Dominates, 1e-8).unwrap();
        assert!(cmp.ok);
        let last = s1.n.len() - 1;
        assert_eq!(s1.n[0] - s2.n[0], 0.0);
        assert_eq!(s1.n[last] - s2.n[last], 0.0);
        let report = stability_norms(&s1, &s2, &b1, &b2, 1e-8).unwrap();
        assert_eq!(report.b_dist, 1.0);
        assert!(report.ratio.unwrap().is_finite());
        assert!(report.e1_minus_e2_at_1 <= report.ratio.unwrap() * report.b_dist);
    }

    #[test]
    fn radii_for_close_constants() {
        let (b1, b2) = (DopingProfile::constant(2.1).unwrap(), DopingProfile::constant(2.0).unwrap());
        let (s1, s2) = solve_pair(&b1, &b2, 6.0, &opts()).unwrap();
        let r = estimate_intrinsic_radii(&s1, &s2, &b1, &b2).unwrap();
        assert!(r.delta0_hat > 0.0 && r.delta0_hat <= 0.5);
        assert!(r.delta1_hat > 0.0 && r.delta1_hat <= 0.5);
        assert!(r.weighted_ratio_finite && r.weighted_ratio_bounded);
        assert!((r.weighted_ratio_limit_fitted - r.weighted_ratio_limit_predicted).abs() < 0.05 * r.weighted_ratio_limit_predicted);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let b = DopingProfile::constant(2.0).unwrap();
        let coarse = continuation_solve(&b, 6.0, &SolveOptions::default().with_cells(32)).unwrap();
        let fine = continuation_solve(&b, 6.0, &SolveOptions::default().with_cells(64)).unwrap();
        assert!(matches!(check_comparison(&coarse, &fine, ProfileOrder::Dominates, 0.0), Err(Error::IncomparableGrids)));
        assert!(matches!(stability_norms(&coarse, &fine, &b, &b, 0.0), Err(Error::IncomparableGrids)));
        assert!(matches!(
            check_comparison(&coarse, &coarse, ProfileOrder::Incomparable, 0.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn identical_profiles_with_different_solutions_are_inconsistent() {
        let b = DopingProfile::constant(2.0).unwrap();
        let sol = continuation_solve(&b, 6.0, &SolveOptions::default().with_cells(32)).unwrap();
        let mut other = sol.clone();
        other.n[10] += 1e-6;
        assert!(matches!(stability_norms(&sol, &other, &b, &b, 0.0), Err(Error::Inconsistent(_))));
    }
}
