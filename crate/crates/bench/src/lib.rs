//! Benchmark fixtures.

use subsonic_core::{continuation_solve, DopingProfile, SolutionPair, SolveOptions};

pub const ALPHA: f64 = 5.0;

pub fn reference_profile() -> DopingProfile {
    DopingProfile::sine_bump(2.0, 0.5).expect("valid profile")
}

pub fn options(cells: usize) -> SolveOptions {
    SolveOptions::default().with_cells(cells)
}

/// A converged solution to assemble residuals around.
pub fn converged(cells: usize) -> SolutionPair {
    continuation_solve(&reference_profile(), ALPHA, &options(cells)).expect("reference solve converges")
}
