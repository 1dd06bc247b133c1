use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use subsonic_core::analysis::VerifyTolerances;
use subsonic_core::SolveOptions;

#[derive(Debug, Parser)]
#[command(name = "subsonic", version, about = "Interior subsonic solutions with sonic boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one profile and write the solution table.
    Solve(SingleArgs),
    /// Solve, then check boundary asymptotics and field bounds.
    Verify(VerifyArgs),
    /// Solve two ordered profiles and report the stability norms.
    Compare(CompareArgs),
    /// Compare b against b - eps over a grid of (eps, alpha).
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Compare(_) => "compare",
            Command::Sweep(_) => "sweep",
        }
    }
}

/// Solver and output options shared by every command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Number of grid cells.
    #[arg(long, default_value_t = 400)]
    pub cells: usize,
    /// Grading exponent toward x = 1.
    #[arg(long, default_value_t = 2.0)]
    pub grading_exponent: f64,
    /// Regularization levels, increasing and ending at 1.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,0.999,1.0")]
    pub j_schedule: Vec<f64>,
    /// Max-norm tolerance on the weak residual.
    #[arg(long, default_value_t = 1e-10)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_newton_iters: usize,
    /// Smallest damping factor of the backtracking line search.
    #[arg(long, default_value_t = 1e-8)]
    pub damping_min: f64,
    /// Output directory [default: ./out/<command>-<unix time>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SolverArgs {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            cells: self.cells,
            grading_exponent: self.grading_exponent,
            j_schedule: self.j_schedule.clone(),
            newton_tol: self.newton_tol,
            max_newton_iters: self.max_newton_iters,
            damping_min: self.damping_min,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SingleArgs {
    /// `constant:V`, `affine:B0,SLOPE`, `sinebump:BASE,AMP`,
    /// `piecewise:X:B,...`, `csv:PATH` or a CSV path.
    #[arg(long)]
    pub profile: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ToleranceArgs {
    /// Allowed excess of n over sup b.
    #[arg(long, default_value_t = 1e-6)]
    pub upper_bound_slack: f64,
    #[arg(long, default_value_t = 0.05)]
    pub exponent_tol: f64,
    #[arg(long, default_value_t = 0.99)]
    pub min_r2: f64,
    /// Relative tolerance on the fitted boundary slopes.
    #[arg(long, default_value_t = 0.02)]
    pub slope_rel_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub identity_tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub rho0_rel_tol: f64,
}

impl ToleranceArgs {
    pub fn tolerances(&self) -> VerifyTolerances {
        VerifyTolerances {
            upper_bound_slack: self.upper_bound_slack,
            exponent_tol: self.exponent_tol,
            min_r2: self.min_r2,
            slope_rel_tol: self.slope_rel_tol,
            identity_tol: self.identity_tol,
            rho0_rel_tol: self.rho0_rel_tol,
            ..VerifyTolerances::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub single: SingleArgs,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Fit exact power-law data on the grid instead of a solution.
    #[arg(long, hide = true)]
    pub synthetic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Two profiles; the dominating one is taken as b1.
    #[arg(num_args = 2, required = true)]
    pub profiles: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Fail instead of reordering when the first profile does not dominate.
    #[arg(long)]
    pub strict_order: bool,
    /// Tolerance of the comparison check n1 >= n2 - tol.
    #[arg(long, default_value_t = 1e-8)]
    pub comparison_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Base profile b; each cell compares b with b - eps.
    #[arg(long)]
    pub profile: String,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    pub eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "6")]
    pub alpha: Vec<f64>,
    /// Additional seeded random ordered pairs per alpha.
    #[arg(long, default_value_t = 0)]
    pub random_pairs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub comparison_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}
