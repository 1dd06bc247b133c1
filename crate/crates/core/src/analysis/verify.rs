use serde::{Deserialize, Serialize};

use super::asymptotics::{asymptotics_report, AsymptoticsReport};
use super::bounds::{check_field_bounds, FieldBoundsReport};
use crate::error::Result;
use crate::profiles::DopingProfile;
use crate::solver::SolutionPair;

/// Tolerances of the single-solution checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    /// Allowed excess of `n` over `sup b`.
    pub upper_bound_slack: f64,
    pub exponent_target: f64,
    pub exponent_tol: f64,
    pub min_r2: f64,
    /// Relative tolerance on the fitted left and right slopes.
    pub slope_rel_tol: f64,
    pub identity_tol: f64,
    pub rho0_rel_tol: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            upper_bound_slack: 1e-6,
            exponent_target: 0.5,
            exponent_tol: 0.05,
            min_r2: 0.99,
            slope_rel_tol: 0.02,
            identity_tol: 1e-8,
            rho0_rel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, value: f64, limit: f64, detail: String) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name, status, value, limit, detail }
    }

    fn skipped(name: &'static str, detail: String) -> Self {
        Self { name, status: CheckStatus::Skipped, value: f64::NAN, limit: f64::NAN, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationSummary {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
        Self { checks, passed }
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Everything the single-solution verification computes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub asymptotics: AsymptoticsReport,
    pub field_bounds: FieldBoundsReport,
    pub summary: VerificationSummary,
}

fn relative_error(fitted: f64, predicted: f64) -> f64 {
    (fitted - predicted).abs() / predicted.abs()
}

/// Runs the asymptotic, bound and consistency checks on one solution.
pub fn verify_solution(sol: &SolutionPair, b: &DopingProfile, tol: &VerifyTolerances) -> Result<Verification> {
    let asymptotics = asymptotics_report(sol, b)?;
    let field_bounds = check_field_bounds(sol, b);
    let last = sol.n.len() - 1;
    let interior = &sol.n[1..last];
    let n_min = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let n_max = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cap = b.sup_b() + tol.upper_bound_slack;
    let a = &asymptotics;

    let mut checks = vec![
        Check::new(
            "residual",
            sol.residual_norm <= sol.newton_tol,
            sol.residual_norm,
            sol.newton_tol,
            "max-norm weak residual".into(),
        ),
        Check::new("interior_subsonic", n_min > 1.0, n_min, 1.0, "min of n over interior nodes".into()),
        Check::new("density_upper_bound", n_max <= cap, n_max, cap, "max of n against sup b".into()),
        Check::new(
            "field_bound",
            field_bounds.bound_ok,
            field_bounds.max_abs_e,
            field_bounds.e_bound,
            "max |E| against alpha + 2 sup b".into(),
        ),
        Check::new("field_at_0", field_bounds.e0_ok, field_bounds.e_at_0, sol.alpha, "E(0) equals alpha".into()),
        Check::new("field_at_1", field_bounds.e1_ok, field_bounds.e_at_1, sol.alpha, "E(1) below alpha".into()),
        Check::new(
            "right_exponent",
            (a.right_exponent - tol.exponent_target).abs() <= tol.exponent_tol && a.right_r2 >= tol.min_r2,
            a.right_exponent,
            tol.exponent_tol,
            format!("target {} with r2 {:.5} (min {})", tol.exponent_target, a.right_r2, tol.min_r2),
        ),
    ];

    match a.a_predicted {
        Some(pred) if !a.a_near_threshold => {
            let err = relative_error(a.a_fitted, pred);
            checks.push(Check::new(
                "left_slope",
                err <= tol.slope_rel_tol,
                err,
                tol.slope_rel_tol,
                format!("fitted {:.6} vs predicted {pred:.6}", a.a_fitted),
            ));
        }
        Some(pred) => checks.push(Check::skipped(
            "left_slope",
            format!("alpha within 10% of threshold {:.4}; fitted {:.6} vs predicted {pred:.6}", a.a_threshold, a.a_fitted),
        )),
        None => checks.push(Check::skipped(
            "left_slope",
            format!("closed form not applicable: alpha below threshold {:.4}", a.a_threshold),
        )),
    }

    let b_err = relative_error(a.b_fitted, a.b_predicted);
    checks.push(Check::new(
        "right_weighted_slope",
        b_err <= tol.slope_rel_tol,
        b_err,
        tol.slope_rel_tol,
        format!("fitted {:.6} vs predicted {:.6}", a.b_fitted, a.b_predicted),
    ));
    checks.push(Check::new(
        "slope_identity",
        a.identity_gap <= tol.identity_tol,
        a.identity_gap,
        tol.identity_tol,
        "B^2 against (alpha - E(1))/4".into(),
    ));

    match a.rho0_limit_predicted {
        Some(pred) if !a.a_near_threshold => {
            let err = relative_error(a.rho0_limit_fitted, pred);
            checks.push(Check::new(
                "rho0_limit",
                a.rho0_limit_fitted < sol.alpha && err <= tol.rho0_rel_tol,
                err,
                tol.rho0_rel_tol,
                format!("fitted {:.6} vs predicted {pred:.6}, alpha {}", a.rho0_limit_fitted, sol.alpha),
            ));
        }
        _ => checks.push(Check::skipped("rho0_limit", "left slope closed form not asserted".into())),
    }

    Ok(Verification { asymptotics, field_bounds, summary: VerificationSummary::new(checks) })
}
