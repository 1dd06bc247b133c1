//! Interior subsonic steady states of the one-dimensional isothermal
//! Euler-Poisson (hydrodynamic semiconductor) model with sonic boundary
//! conditions, and numerical checks of their boundary asymptotics,
//! comparison principle and structural stability.
//!
//! The crate is split into:
//! - [`profiles`]: subsonic doping profiles and their order relations,
//! - [`model`]: the equations, the regularized flux and field reconstruction,
//! - [`solver`]: graded grids, the discrete weak form and Newton continuation,
//! - [`analysis`]: asymptotics, comparison and stability reports.

pub mod analysis;
pub mod error;
pub mod model;
pub mod numerics;
pub mod profiles;
pub mod solver;

pub use error::{Error, Result};
pub use model::ModelState;
pub use profiles::{DopingProfile, PhysicalParams, ProfileKind, ProfileOrder};
pub use solver::{continuation_solve, solve_pair, Grid, SolutionPair, SolveOptions};
