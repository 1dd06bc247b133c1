use serde::Serialize;

use crate::profiles::DopingProfile;
use crate::solver::SolutionPair;

/// Field bounds `max |E| <= alpha + 2 sup b`, `E(0) = alpha`, `E(1) < alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldBoundsReport {
    pub max_abs_e: f64,
    pub e_bound: f64,
    /// `e_bound - max_abs_e`
    pub e_bound_margin: f64,
    pub e_at_0: f64,
    pub e_at_1: f64,
    /// `alpha - E(1)`
    pub e1_margin: f64,
    pub bound_ok: bool,
    pub e0_ok: bool,
    pub e1_ok: bool,
    pub passed: bool,
}

pub fn check_field_bounds(sol: &SolutionPair, b: &DopingProfile) -> FieldBoundsReport {
    let last = sol.e.len() - 1;
    let max_abs_e = sol.e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let e_bound = sol.alpha + 2.0 * b.sup_b();
    let bound_ok = max_abs_e <= e_bound;
    let e0_ok = sol.e[0] == sol.alpha;
    let e1_ok = sol.e[last] < sol.alpha;
    FieldBoundsReport {
        max_abs_e,
        e_bound,
        e_bound_margin: e_bound - max_abs_e,
        e_at_0: sol.e[0],
        e_at_1: sol.e[last],
        e1_margin: sol.alpha - sol.e[last],
        bound_ok,
        e0_ok,
        e1_ok,
        passed: bound_ok && e0_ok && e1_ok,
    }
}
