//! Post-processing of computed solutions: boundary asymptotics, field
//! bounds, the comparison principle and structural-stability norms.
//!
//! Verification routines return reports with pass/fail flags; errors are
//! reserved for malformed inputs and inconsistent solutions.

mod asymptotics;
mod bounds;
mod fit;
mod stability;
mod verify;

pub use asymptotics::{
    asymptotics_report, fitted_left_slope, fitted_rho0_limit, fitted_right_weighted_slope, left_slope_limit,
    left_flux_offset, left_slope_threshold, lower_bound_amplitude, rho0_limit, right_weighted_slope_from_values,
    right_weighted_slope_limit, weighted_slope_from_integral, AsymptoticsReport, NEAR_THRESHOLD_FRACTION,
    RHO0_DEGREE, WEIGHTED_SLOPE_DEGREE,
};
pub use bounds::{check_field_bounds, FieldBoundsReport};
pub use fit::{
    fit_boundary_exponent, fit_exponent_on_nodes, fit_power_law, window_nodes, Endpoint, PowerFit, BOUNDARY_SKIP,
    LEFT_WINDOW, MIN_FIT_NODES, RIGHT_WINDOW,
};
pub use stability::{
    check_comparison, estimate_intrinsic_radii, stability_norms, ComparisonReport, IntrinsicRadii, StabilityReport,
    MAX_RADIUS, RADIUS_FACTOR, UNIQUENESS_FACTOR,
};
pub use verify::{verify_solution, Check, CheckStatus, Verification, VerificationSummary, VerifyTolerances};
